"""Directed symmetric graphs over which agents interact.

Every undirected link {i, j} is stored as the two directed edges (i, j) and
(j, i), so ``n_edges`` is always even.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

KINDS = ("star", "complete", "circle", "matching")


class GraphError(ValueError):
    """Invalid graph size or malformed edge list."""


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    kind: str = "custom"
    _neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise GraphError(f"n_nodes must be positive, got {self.n_nodes}")
        edges = tuple(sorted((int(i), int(j)) for i, j in self.edges))
        if len(set(edges)) != len(edges):
            raise GraphError("duplicate directed edge")
        edge_set = set(edges)
        for i, j in edges:
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise GraphError(f"edge ({i}, {j}) out of range for {self.n_nodes} nodes")
            if i == j:
                raise GraphError(f"self-loop on node {i}")
            if (j, i) not in edge_set:
                raise GraphError(f"edge ({i}, {j}) has no reverse edge ({j}, {i})")
        object.__setattr__(self, "edges", edges)
        nbrs: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for i, j in edges:
            nbrs[i].append(j)
        object.__setattr__(self, "_neighbors", tuple(tuple(v) for v in nbrs))

    @property
    def n_edges(self) -> int:
        """Number of directed edges m."""
        return len(self.edges)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._neighbors[i]

    def degree(self, i: int) -> int:
        return len(self._neighbors[i])

    @property
    def heads(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=np.int64)

    @property
    def tails(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=np.int64)

    def undirected_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in self.edges if i < j]

    def to_text(self) -> str:
        lines = [f"{self.n_nodes} {self.n_edges}"]
        lines += [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def _symmetric(pairs: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    out = set()
    for i, j in pairs:
        out.add((i, j))
        out.add((j, i))
    return sorted(out)


def make_star(n_nodes: int) -> Graph:
    """Star with center node 0."""
    if n_nodes < 2:
        raise GraphError(f"star needs at least 2 nodes, got {n_nodes}")
    return Graph(n_nodes, tuple(_symmetric((0, j) for j in range(1, n_nodes))), "star")


def make_complete(n_nodes: int) -> Graph:
    if n_nodes < 2:
        raise GraphError(f"complete graph needs at least 2 nodes, got {n_nodes}")
    edges = tuple((i, j) for i in range(n_nodes) for j in range(n_nodes) if i != j)
    return Graph(n_nodes, edges, "complete")


def make_circle(n_nodes: int) -> Graph:
    if n_nodes < 3:
        raise GraphError(f"circle needs at least 3 nodes, got {n_nodes}")
    return Graph(n_nodes, tuple(_symmetric((i, (i + 1) % n_nodes) for i in range(n_nodes))), "circle")


def make_matching(n_nodes: int) -> Graph:
    if n_nodes < 2 or n_nodes % 2:
        raise GraphError(f"matching needs an even node count >= 2, got {n_nodes}")
    return Graph(n_nodes, tuple(_symmetric((2 * k, 2 * k + 1) for k in range(n_nodes // 2))), "matching")


def make_graph(kind: str, n_nodes: int) -> Graph:
    builders = {
        "star": make_star,
        "complete": make_complete,
        "circle": make_circle,
        "matching": make_matching,
    }
    if kind not in builders:
        raise GraphError(f"unknown graph kind {kind!r}")
    return builders[kind](n_nodes)


def nodes_for_edges(kind: str, m: int) -> int:
    """Node count giving exactly ``m`` directed edges for ``kind``.

    Raises GraphError when no graph of that kind has m edges.
    """
    if m < 2 or m % 2:
        raise GraphError(f"m must be an even integer >= 2, got {m}")
    if kind == "star":
        n = m // 2 + 1
    elif kind == "complete":
        n = int(round((1 + np.sqrt(4 * m + 1)) / 2))
        if n * (n - 1) != m:
            raise GraphError(f"no complete graph has {m} directed edges")
    elif kind == "circle":
        n = m // 2
        if n < 3:
            raise GraphError(f"no circle graph has {m} directed edges")
    elif kind == "matching":
        n = m
    else:
        raise GraphError(f"unknown graph kind {kind!r}")
    return n


def graph_with_edges(kind: str, m: int) -> Graph:
    return make_graph(kind, nodes_for_edges(kind, m))


def random_symmetric_graph(n_nodes: int, p: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi G(n, p) stored as a directed symmetric graph."""
    pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes) if rng.random() < p]
    return Graph(n_nodes, tuple(_symmetric(pairs)), "custom")


def from_edge_list(n_nodes: int, edges: Sequence[Sequence[int]]) -> Graph:
    """Build a custom graph; asymmetric input is rejected, not completed."""
    return Graph(n_nodes, tuple((int(i), int(j)) for i, j in edges), "custom")


def parse_edge_list(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise GraphError("edge-list header must be 'n m'")
    n, m = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header announces {m} edges but {len(body)} follow")
    edges = []
    for row in body:
        if len(row) != 2:
            raise GraphError(f"malformed edge line: {' '.join(row)!r}")
        edges.append((int(row[0]), int(row[1])))
    return from_edge_list(n, edges)


def load_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())
