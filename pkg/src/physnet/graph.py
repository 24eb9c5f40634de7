"""Weighted directed multigraphs, incidence matrices and connectivity.

Indexing convention: :func:`build_graph` and the JSON format use 1-based
vertex labels, as in the usual mathematical notation. Everything else in
the Python API (``DirectedGraph.tails``, component lists, the ``v``
argument of :func:`spanning_trees_towards`) is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cs_components

from .errors import (
    GraphTooLargeForOracle,
    IndexOutOfRange,
    NonPositiveWeight,
    SelfLoop,
)

ORACLE_MAX_VERTICES = 8


@dataclass(frozen=True)
class DirectedGraph:
    """Directed multigraph on vertices ``0..n-1``.

    Edge ``j`` runs from ``tails[j]`` to ``heads[j]`` with positive weight
    ``weights[j]``. The edge order fixes the column order of the incidence
    matrix.
    """

    n: int
    tails: tuple[int, ...]
    heads: tuple[int, ...]
    weights: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.tails)

    def edges(self):
        """Iterate over ``(tail, head, weight)`` triples, 0-based."""
        return zip(self.tails, self.heads, self.weights)

    def reverse(self) -> "DirectedGraph":
        """Same graph with every edge orientation flipped."""
        return DirectedGraph(self.n, self.heads, self.tails, self.weights)

    def with_weights(self, weights: Sequence[float]) -> "DirectedGraph":
        return _validated(self.n, self.tails, self.heads, weights)

    def subgraph(self, vertices: Sequence[int]) -> tuple["DirectedGraph", list[int]]:
        """Induced subgraph on ``vertices``; also returns the kept edge indices."""
        index = {v: k for k, v in enumerate(vertices)}
        kept = [j for j, (t, h) in enumerate(zip(self.tails, self.heads))
                if t in index and h in index]
        sub = DirectedGraph(
            len(vertices),
            tuple(index[self.tails[j]] for j in kept),
            tuple(index[self.heads[j]] for j in kept),
            tuple(self.weights[j] for j in kept),
        )
        return sub, kept

    def to_dict(self) -> dict:
        """JSON-ready dict with 1-based vertex labels."""
        return {
            "n": self.n,
            "edges": [{"tail": t + 1, "head": h + 1, "weight": float(w)}
                      for t, h, w in self.edges()],
        }


def _validated(n, tails, heads, weights) -> DirectedGraph:
    if int(n) != n or n < 1:
        raise IndexOutOfRange(f"vertex count must be a positive integer, got {n!r}")
    n = int(n)
    for j, (t, h, w) in enumerate(zip(tails, heads, weights)):
        if not (0 <= t < n and 0 <= h < n):
            raise IndexOutOfRange(
                f"edge {j + 1}: endpoints ({t + 1}, {h + 1}) outside 1..{n}")
        if t == h:
            raise SelfLoop(f"edge {j + 1}: self-loop at vertex {t + 1}")
        if not (np.isfinite(w) and w > 0):
            raise NonPositiveWeight(f"edge {j + 1}: weight {w!r} is not positive")
    return DirectedGraph(n, tuple(int(t) for t in tails), tuple(int(h) for h in heads),
                         tuple(float(w) for w in weights))


def build_graph(n: int, edge_list: Iterable[Sequence]) -> DirectedGraph:
    """Validate and build a graph from 1-based ``(tail, head[, weight])`` tuples.

    Weight defaults to 1.0 when a tuple has only two entries.

    >>> g = build_graph(3, [(1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0)])
    >>> g.m
    3
    """
    tails, heads, weights = [], [], []
    for edge in edge_list:
        if len(edge) == 2:
            t, h, w = edge[0], edge[1], 1.0
        else:
            t, h, w = edge
        if int(t) != t or int(h) != h:
            raise IndexOutOfRange(f"edge endpoints must be integers, got ({t!r}, {h!r})")
        tails.append(int(t) - 1)
        heads.append(int(h) - 1)
        weights.append(w)
    return _validated(n, tails, heads, weights)


def graph_from_dict(data: dict) -> DirectedGraph:
    """Inverse of :meth:`DirectedGraph.to_dict` (weights default to 1.0)."""
    return build_graph(
        data["n"],
        [(e["tail"], e["head"], e.get("weight", 1.0)) for e in data["edges"]],
    )


def incidence_matrix(g: DirectedGraph) -> np.ndarray:
    """n x m integer matrix: -1 at the tail row and +1 at the head row of each column."""
    D = np.zeros((g.n, g.m), dtype=np.int64)
    cols = np.arange(g.m)
    D[list(g.tails), cols] = -1
    D[list(g.heads), cols] = 1
    return D


def kron_extend(D: np.ndarray, d: int) -> np.ndarray:
    """Incidence operator for vertex states in R^d: ``D kron I_d`` (vertex-major)."""
    if d < 1:
        raise ValueError(f"spatial dimension must be >= 1, got {d}")
    D = np.asarray(D)
    if d == 1:
        return D.copy()
    return np.kron(D, np.eye(d, dtype=D.dtype))


def _adjacency(g: DirectedGraph):
    return coo_matrix((np.ones(g.m), (list(g.tails), list(g.heads))), shape=(g.n, g.n)).tocsr()


def _relabel(labels: np.ndarray) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for v, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(v)
    return sorted(groups.values(), key=lambda c: c[0])


def connected_components(g: DirectedGraph) -> list[list[int]]:
    """Weak components, ordered by their smallest vertex."""
    _, labels = _cs_components(_adjacency(g), directed=True, connection="weak")
    return _relabel(labels)


def strongly_connected_components(g: DirectedGraph) -> list[list[int]]:
    """Strong components, ordered by their smallest vertex."""
    _, labels = _cs_components(_adjacency(g), directed=True, connection="strong")
    return _relabel(labels)


def is_strongly_connected(g: DirectedGraph) -> bool:
    return len(strongly_connected_components(g)) == 1


def _is_in_tree(n: int, v: int, out_edge: dict[int, int], heads) -> bool:
    # every vertex != v has exactly one chosen out-edge; check all paths end at v
    for start in range(n):
        seen = set()
        u = start
        while u != v:
            if u in seen:
                return False
            seen.add(u)
            u = heads[out_edge[u]]
    return True


def spanning_trees_towards(g: DirectedGraph, v: int,
                           max_vertices: int = ORACLE_MAX_VERTICES) -> list[frozenset[int]]:
    """All spanning trees directed towards vertex ``v`` (0-based), by brute force.

    Each tree is returned as a frozenset of edge indices. Every vertex other
    than ``v`` has exactly one outgoing tree edge, and following those edges
    always ends at ``v``. This is exhaustive over all (n-1)-edge subsets and
    is meant as a test oracle, hence the size limit.
    """
    if g.n > max_vertices:
        raise GraphTooLargeForOracle(
            f"{g.n} vertices exceeds the oracle limit of {max_vertices}")
    if not 0 <= v < g.n:
        raise IndexOutOfRange(f"root {v} outside 0..{g.n - 1}")
    if g.n == 1:
        return [frozenset()]
    # only edges leaving a non-root vertex can be tree edges
    candidates = [j for j in range(g.m) if g.tails[j] != v]
    trees = []
    for subset in combinations(candidates, g.n - 1):
        out_edge = {}
        for j in subset:
            t = g.tails[j]
            if t in out_edge:
                break
            out_edge[t] = j
        else:
            if _is_in_tree(g.n, v, out_edge, g.heads):
                trees.append(frozenset(subset))
    return trees


def tree_weight_sums(g: DirectedGraph, max_vertices: int = ORACLE_MAX_VERTICES) -> np.ndarray:
    """Per-vertex sum over in-trees of the product of edge weights (oracle)."""
    out = np.zeros(g.n)
    for v in range(g.n):
        for tree in spanning_trees_towards(g, v, max_vertices):
            out[v] += float(np.prod([g.weights[j] for j in tree]))
    return out
