import numpy as np
import pytest

from gbb.arms import NodeArmSet, random_unit_arms
from gbb.design import DesignDistribution, covariance, frank_wolfe_design, product_distribution
from gbb.graphs import GraphError, graph_with_edges, make_circle, make_matching, make_star
from gbb.variance import (VarianceBoundSpec, estimate_bound_constants, exact_variance, matrix_variance,
                          sample_A1, sample_A1_batch, scaling_slope, spectral_norm, table1_bound,
                          variance_norm)


@pytest.fixture(scope="module")
def unit_arms():
    X = random_unit_arms(100, 5, 0)
    return X, frank_wolfe_design(X).distribution


def test_spectral_norm_power_iteration(rng):
    for _ in range(10):
        B = rng.standard_normal((9, 9))
        S = B @ B.T
        assert spectral_norm(S) == pytest.approx(np.linalg.eigvalsh(S)[-1], rel=1e-6)
        assert spectral_norm(B) == pytest.approx(np.linalg.norm(B, 2), rel=1e-6)
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_single_arm_is_deterministic(rng):
    X = NodeArmSet([[1.0]])
    mu = DesignDistribution.uniform(1)
    g = make_circle(5)
    A = sample_A1(g, X, mu, rng)
    np.testing.assert_array_equal(A, sample_A1(g, X, mu, rng))
    assert variance_norm(g, X, mu, 20, seed=0).spectral_norm == 0.0


def test_point_mass_zero_variance():
    X = random_unit_arms(6, 3, 1)
    est = variance_norm(make_star(5), X, DesignDistribution.point_mass(6, 2), 20, seed=0)
    assert est.spectral_norm == pytest.approx(0.0, abs=1e-12)


def test_matching_two_edges(rng):
    X = random_unit_arms(4, 2, 2)
    mu = DesignDistribution.uniform(4)
    g = make_matching(2)
    r1, r2 = np.random.default_rng(3), np.random.default_rng(3)
    A = sample_A1(g, X, mu, r1)
    a, b = np.minimum(np.searchsorted(mu.cdf, r2.random(2), side="right"), 3)
    Z = X.edge_arms
    z, zr = Z.vectors[Z.index(a, b)], Z.vectors[Z.index(b, a)]
    np.testing.assert_allclose(A, np.outer(z, z) + np.outer(zr, zr), atol=1e-14)


def test_sample_mean_matches_expected_design():
    X = random_unit_arms(5, 2, 3)
    mu = frank_wolfe_design(X).distribution
    g = make_circle(6)
    samples = sample_A1_batch(g, X, mu, 10_000, np.random.default_rng(0))
    expected = g.n_edges * covariance(X.edge_arms, product_distribution(mu))
    se = samples.std(axis=0, ddof=1) / np.sqrt(len(samples))
    assert np.all(np.abs(samples.mean(axis=0) - expected) <= 3 * se + 1e-12) or \
        np.mean(np.abs(samples.mean(axis=0) - expected) <= 3 * se + 1e-12) >= 0.97


def test_monte_carlo_agrees_with_enumeration():
    X = random_unit_arms(3, 2, 5)
    mu = DesignDistribution.normalized([0.5, 0.3, 0.2])
    for g in (make_star(4), make_circle(4), make_matching(4)):
        exact = exact_variance(g, X, mu)
        mc = matrix_variance(sample_A1_batch(g, X, mu, 20_000, np.random.default_rng(1)))
        assert spectral_norm(mc) == pytest.approx(spectral_norm(exact), rel=0.05)
        ev = np.linalg.eigvalsh(mc)
        assert ev[0] >= -1e-8 * max(1.0, ev[-1])
        np.testing.assert_allclose(mc, mc.T)


def test_star_exceeds_circle(unit_arms):
    X, mu = unit_arms
    star = variance_norm(graph_with_edges("star", 40), X, mu, 100, seed=1)
    circ = variance_norm(graph_with_edges("circle", 40), X, mu, 100, seed=1)
    assert star.spectral_norm > circ.spectral_norm + star.std_error + circ.std_error


def test_ordering_at_fixed_m(unit_arms):
    X, mu = unit_arms
    m = 56
    est = {k: variance_norm(graph_with_edges(k, m), X, mu, 200, seed=2)
           for k in ("star", "complete", "circle", "matching")}
    order = ["star", "complete", "circle", "matching"]
    for hi, lo in zip(order, order[1:]):
        assert est[hi].spectral_norm - est[lo].spectral_norm > max(est[hi].std_error, est[lo].std_error)


def test_disjoint_edges_uncorrelated():
    X = random_unit_arms(6, 2, 4)
    mu = frank_wolfe_design(X).distribution
    rng = np.random.default_rng(0)
    Z = X.edge_arms.vectors
    n = 20_000
    draws = np.minimum(np.searchsorted(mu.cdf, rng.random((n, 4)), side="right"), 5)
    z1 = Z[draws[:, 0] * 6 + draws[:, 1]]
    z2 = Z[draws[:, 2] * 6 + draws[:, 3]]
    A = np.einsum("ni,nj->nij", z1, z1)
    B = np.einsum("ni,nj->nij", z2, z2)
    C = np.einsum("nij,njl->il", A - A.mean(0), B - B.mean(0)) / n
    scale = spectral_norm(matrix_variance(A))
    assert spectral_norm(C) < 0.05 * scale


def test_scaling_slope_validation():
    with pytest.raises(GraphError):
        scaling_slope("complete", [12, 14, 56])
    with pytest.raises(GraphError):
        scaling_slope("circle", [12, 20])
    with pytest.raises(GraphError):
        scaling_slope("circle", [12, 20, 30])


def test_table1_bound_values():
    one = VarianceBoundSpec(1.0, 1.0, 1.0)
    assert table1_bound("matching", 10, one) == 20
    P, M, N = 0.3, 0.7, 1.1
    spec = VarianceBoundSpec(P, M, N)
    assert table1_bound("star", 6, spec) == pytest.approx(6 * P + 6 * M + 12 * N)
    assert table1_bound("circle", 10, spec) == pytest.approx(10 * P + 10 * M + 20 * N)
    n = 5
    assert table1_bound("complete", 20, spec) == pytest.approx(20 * P + n * (n - 1) * (n - 2) * M
                                                             + n * (n - 1) ** 2 * N)
    with pytest.raises(GraphError):
        table1_bound("complete", 22, spec)
    with pytest.raises(ValueError):
        VarianceBoundSpec(-1.0, 0.0, 0.0)


def test_bound_constants_basic():
    X = NodeArmSet([[1.0]])
    spec = estimate_bound_constants(X, DesignDistribution.uniform(1), 50, seed=0)
    assert (spec.P, spec.M, spec.N) == (0.0, 0.0, 0.0)
    X = random_unit_arms(10, 3, 0)
    spec = estimate_bound_constants(X, frank_wolfe_design(X).distribution, 500, seed=0)
    assert spec.P >= 0 and np.isfinite(spec.M) and np.isfinite(spec.N)


def test_variance_below_table_bound(unit_arms):
    X, mu = unit_arms
    spec = estimate_bound_constants(X, mu, 4000, seed=3)
    for kind in ("star", "complete", "circle", "matching"):
        for m in (12, 20, 30):
            try:
                g = graph_with_edges(kind, m)
            except GraphError:
                continue
            est = variance_norm(g, X, mu, 200, seed=4, n_boot=0)
            assert est.spectral_norm <= table1_bound(kind, m, spec) * 1.25
