import itertools

import numpy as np
import pytest

from gbb.graphs import (Graph, GraphError, from_edge_list, graph_with_edges, make_circle,
                        make_complete, make_graph, make_matching, make_star, nodes_for_edges,
                        parse_edge_list, random_symmetric_graph)


def _components(g: Graph) -> int:
    seen, comps = set(), 0
    for s in range(g.n_nodes):
        if s in seen:
            continue
        comps += 1
        stack = [s]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(g.neighbors(u))
    return comps


def _assert_valid(g: Graph):
    es = set(g.edges)
    for i, j in g.edges:
        assert i != j
        assert (j, i) in es
    assert g.n_edges % 2 == 0
    for i in range(g.n_nodes):
        assert sorted(g.neighbors(i)) == sorted(j for a, j in g.edges if a == i)


def test_star_sizes():
    assert make_star(4).n_edges == 6
    assert make_star(2).edges == ((0, 1), (1, 0))
    assert make_star(79).n_edges == 156
    g = make_star(6)
    assert set(g.neighbors(0)) == set(range(1, 6))
    assert all(g.neighbors(i) == (0,) for i in range(1, 6))


def test_complete_sizes():
    assert make_complete(13).n_edges == 156
    assert make_complete(2).edges == make_star(2).edges
    pairs = [(i, j) for i, j in itertools.product(range(4), repeat=2) if i != j]
    assert make_complete(4).n_edges == len(pairs) == 12


def test_circle_sizes():
    assert make_circle(78).n_edges == 156
    assert make_circle(3).edges == make_complete(3).edges
    g = make_circle(5)
    assert all(len(set(g.neighbors(i))) == 2 for i in range(5))


def test_matching_sizes():
    assert make_matching(156).n_edges == 156
    assert make_matching(2).edges == ((0, 1), (1, 0))
    g = make_matching(6)
    assert _components(g) == 3
    und = g.undirected_edges()
    nodes = [v for e in und for v in e]
    assert len(nodes) == len(set(nodes))


@pytest.mark.parametrize("kind,n", [(k, n) for k in ("star", "complete", "circle") for n in range(3, 12)]
                         + [("matching", n) for n in range(2, 14, 2)])
def test_generators_valid_and_identities(kind, n):
    g = make_graph(kind, n)
    _assert_valid(g)
    m = g.n_edges
    expected = {"star": 2 * (n - 1), "complete": n * (n - 1), "circle": 2 * n, "matching": n}[kind]
    assert m == expected
    assert nodes_for_edges(kind, m) == n
    assert list(g.edges) == sorted(g.edges)


@pytest.mark.parametrize("fn,n", [(make_star, 1), (make_complete, 1), (make_circle, 2),
                                  (make_matching, 3), (make_matching, 0)])
def test_invalid_sizes(fn, n):
    with pytest.raises(GraphError):
        fn(n)


def test_unrealizable_edge_counts():
    with pytest.raises(GraphError):
        nodes_for_edges("complete", 14)
    with pytest.raises(GraphError):
        nodes_for_edges("circle", 4)
    with pytest.raises(GraphError):
        nodes_for_edges("star", 7)
    assert graph_with_edges("complete", 156).n_nodes == 13


def test_asymmetric_input_rejected():
    with pytest.raises(GraphError):
        from_edge_list(3, [(0, 1), (1, 0), (1, 2)])
    with pytest.raises(GraphError):
        from_edge_list(2, [(0, 0)])


def test_edge_list_roundtrip(tmp_path):
    g = make_circle(6)
    path = tmp_path / "g.txt"
    g.save(path)
    text = path.read_text().splitlines()
    assert text[0] == "6 12"
    g2 = parse_edge_list(path.read_text())
    assert g2.edges == g.edges and g2.n_nodes == 6


def test_edge_list_header_mismatch():
    with pytest.raises(GraphError):
        parse_edge_list("3 4\n0 1\n1 0\n")


def test_random_graph_symmetric():
    rng = np.random.default_rng(0)
    for _ in range(20):
        _assert_valid(random_symmetric_graph(7, 0.5, rng))
