import numpy as np
import pytest

from gbb.arms import lift, soare_arm_set
from gbb.environment import (BilinearParameter, DimensionError, NoiseModel, augment, augment_arms,
                             expected_reward, global_reward, sample_reward, soare_parameter, symmetrize)
from gbb.graphs import make_circle, make_complete, make_star, random_symmetric_graph


def test_soare_expected_rewards():
    d = 4
    P = soare_parameter(d)
    e = np.eye(d)
    assert expected_reward(e[0], e[0], P) == 2.0
    assert expected_reward(e[0], e[1], P) == 0.0
    for omega in (0.1, 0.7, 1.3):
        x = soare_arm_set(d, omega)[d]
        assert expected_reward(x, x, P) == pytest.approx(2 * np.cos(omega) ** 2, abs=1e-14)
    np.testing.assert_array_equal(P.theta, np.r_[2.0, np.zeros(d * d - 1)])


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        expected_reward(np.ones(3), np.ones(2), soare_parameter(2))
    with pytest.raises(DimensionError):
        BilinearParameter(np.ones((2, 3)))


def test_linear_identity(rng):
    X = rng.standard_normal((6, 3))
    P = BilinearParameter(rng.standard_normal((3, 3)))
    for a in range(6):
        for b in range(6):
            assert lift(X[a], X[b]) @ P.theta == pytest.approx(expected_reward(X[a], X[b], P), rel=1e-10, abs=1e-12)


def test_sample_reward_noise():
    P = soare_parameter(3)
    e = np.eye(3)
    rng = np.random.default_rng(0)
    assert sample_reward(e[0], e[0], P, NoiseModel(0.0), rng) == 2.0
    a = [sample_reward(e[0], e[1], P, NoiseModel(1.0), np.random.default_rng(5)) for _ in range(2)]
    assert a[0] == a[1]
    rng = np.random.default_rng(1)
    draws = np.array([sample_reward(e[0], e[0], P, NoiseModel(1.0), rng) for _ in range(100_000)])
    assert abs(draws.mean() - 2.0) <= 3.0 / np.sqrt(100_000)
    assert draws.var() == pytest.approx(1.0, rel=0.02)
    with pytest.raises(ValueError):
        NoiseModel(-1.0)


def test_global_reward_cases():
    d = 3
    P = soare_parameter(d)
    X = soare_arm_set(d, 0.4).arms
    for g in (make_star(5), make_circle(6), make_complete(4)):
        assert global_reward([0] * g.n_nodes, g, P, X) == 2 * g.n_edges
        assert global_reward([1] * g.n_nodes, g, BilinearParameter(np.zeros((d, d))), X) == 0.0
    # triangle, max-cut style parameter, brute-force sum over 6 directed edges
    tri = make_complete(3)
    Mc = BilinearParameter([[0.0, 1.0], [1.0, 0.0]])
    E = np.eye(2)
    alloc = [0, 1, 0]
    brute = sum(E[alloc[i]] @ Mc.matrix @ E[alloc[j]] for i, j in tri.edges)
    assert brute == 4.0
    assert global_reward(alloc, tri, Mc, E) == 4.0
    with pytest.raises(ValueError):
        global_reward([0, 1], tri, Mc, E)
    with pytest.raises(IndexError):
        global_reward([0, 1, 5], tri, Mc, E)


def test_symmetrize():
    np.testing.assert_array_equal(symmetrize([[0, 1], [0, 0]]).matrix, [[0, 1], [1, 0]])
    S = np.array([[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_array_equal(symmetrize(S).matrix, 2 * S)
    with pytest.raises(DimensionError):
        symmetrize(np.ones((2, 3)))


def test_directed_sum_equals_symmetrized_undirected_sum(rng):
    for _ in range(50):
        n, d, K = int(rng.integers(3, 9)), int(rng.integers(2, 5)), 5
        g = random_symmetric_graph(n, 0.6, rng)
        M = rng.standard_normal((d, d))
        X = rng.standard_normal((K, d))
        alloc = rng.integers(0, K, n)
        directed = global_reward(alloc, g, BilinearParameter(M), X)
        Ms = symmetrize(M).matrix
        undirected = sum(X[alloc[i]] @ Ms @ X[alloc[j]] for i, j in g.undirected_edges())
        assert directed == pytest.approx(undirected, rel=1e-10, abs=1e-10)


def test_augment_identity(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        M, beta = rng.standard_normal((d, d)), rng.standard_normal(d)
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        P = augment(M, beta)
        xt, yt = augment_arms(np.vstack([x, y]))
        lhs = xt @ P.matrix @ yt
        rhs = x @ M @ y + x @ beta
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
        assert P.dim == d + 1


def test_augment_special_cases(rng):
    d = 3
    M = rng.standard_normal((d, d))
    x, y = rng.standard_normal(d), rng.standard_normal(d)
    xt, yt = augment_arms(np.vstack([x, y]))
    assert xt @ augment(M, np.zeros(d)).matrix @ yt == pytest.approx(x @ M @ y, abs=1e-12)
    P = augment(np.zeros((d, d)), np.eye(d)[0])
    assert xt @ P.matrix @ yt == pytest.approx(x[0], abs=1e-15)
    np.testing.assert_array_equal(P.matrix[-1], 0.0)
    with pytest.raises(DimensionError):
        augment(M, np.ones(2))
