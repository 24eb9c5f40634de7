"""Symmetric, flow and consensus Laplacians of weighted digraphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NotDiagonallyDominant, NotLaplacian, NotMetzler
from .graph import DirectedGraph, incidence_matrix


class LaplacianKind(str, Enum):
    SYMMETRIC = "symmetric"
    FLOW = "flow"
    CONSENSUS = "consensus"
    BALANCED = "balanced"


@dataclass(frozen=True)
class LaplacianMatrix:
    """A dense n x n Laplacian together with how it was built.

    ``provenance`` is a free-form record (source graph, construction name,
    sigma used for balancing, ...). It is never read by numerical code.
    """

    entries: np.ndarray
    kind: LaplacianKind
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"Laplacian must be square, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "kind", LaplacianKind(self.kind))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n": self.n, "entries": self.entries.tolist()}


def as_array(L) -> np.ndarray:
    if isinstance(L, LaplacianMatrix):
        return L.entries
    return np.asarray(L, dtype=float)


def transport_matrix(g: DirectedGraph) -> np.ndarray:
    """m x n matrix K with ``K[j, tail(j)] = weight(j)`` and zeros elsewhere."""
    K = np.zeros((g.m, g.n))
    K[np.arange(g.m), list(g.tails)] = g.weights
    return K


def degree_adjacency(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Out-degree diagonal and weighted adjacency so that the flow Laplacian is ``Delta - A``.

    ``A[h, t]`` accumulates the weights of all edges ``t -> h``.
    """
    A = np.zeros((g.n, g.n))
    np.add.at(A, (list(g.heads), list(g.tails)), g.weights)
    out = np.zeros(g.n)
    np.add.at(out, list(g.tails), g.weights)
    return np.diag(out), A


def symmetric_laplacian(g: DirectedGraph) -> LaplacianMatrix:
    D = incidence_matrix(g).astype(float)
    L = D @ np.diag(g.weights) @ D.T if g.m else np.zeros((g.n, g.n))
    return LaplacianMatrix(L, LaplacianKind.SYMMETRIC, {"construction": "D R D^T", "graph": g})


def flow_laplacian(g: DirectedGraph) -> LaplacianMatrix:
    """``L = -D K``: column sums vanish, flows leave each edge's tail."""
    D = incidence_matrix(g).astype(float)
    L = -D @ transport_matrix(g) if g.m else np.zeros((g.n, g.n))
    return LaplacianMatrix(L, LaplacianKind.FLOW, {"construction": "-D K", "graph": g})


def consensus_laplacian(g: DirectedGraph) -> LaplacianMatrix:
    """Row-sum-zero Laplacian in which each head agent listens to the edge's tail.

    An edge ``t -> h`` with weight ``a`` contributes ``a`` to ``L[h, h]`` and
    ``-a`` to ``L[h, t]``.
    """
    L = np.zeros((g.n, g.n))
    np.add.at(L, (list(g.heads), list(g.heads)), g.weights)
    np.add.at(L, (list(g.heads), list(g.tails)), -np.asarray(g.weights))
    return LaplacianMatrix(L, LaplacianKind.CONSENSUS, {"construction": "consensus", "graph": g})


def balance_tolerance(L) -> float:
    a = as_array(L)
    return 1e-9 * (1.0 + np.abs(a).sum(axis=1).max(initial=0.0))


def eigen_tolerance(L) -> float:
    a = as_array(L)
    return 1e-8 * np.abs(a).sum(axis=1).max(initial=0.0)


def symmetric_part_min_eig(L) -> float:
    a = as_array(L)
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])


def is_balanced(L, tol: float | None = None) -> bool:
    """True when both row and column sums vanish.

    For Laplacian sign patterns this is equivalent to ``L + L^T >= 0``; the
    eigenvalue side is re-checked whenever the sums test passes.
    """
    a = as_array(L)
    tau = balance_tolerance(a) if tol is None else tol
    balanced = bool(np.abs(a.sum(axis=0)).max(initial=0.0) <= tau
                    and np.abs(a.sum(axis=1)).max(initial=0.0) <= tau)
    if balanced:
        lam = symmetric_part_min_eig(a)
        if lam < -eigen_tolerance(a):
            raise NotLaplacian(
                f"zero row and column sums but indefinite symmetric part (min eig {lam:.3e});"
                " input lacks the Laplacian sign pattern")
    return balanced


def metzler_augment(M) -> LaplacianMatrix:
    """Close a compartmental system ``x' = M x`` with an extra sink vertex.

    ``M`` must have nonnegative off-diagonal entries and satisfy column
    dominance ``-M[i, i] >= sum_{j != i} M[j, i]``. The sink row receives the
    column surplus ``-sum_i M[i, j]``; the returned flow Laplacian is the
    negative of the augmented (n+1) x (n+1) matrix.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"M must be square, got shape {M.shape}")
    n = M.shape[0]
    off = M - np.diag(np.diag(M))
    if (off < 0).any():
        i, j = np.argwhere(off < 0)[0]
        raise NotMetzler(f"off-diagonal entry M[{i + 1},{j + 1}] = {M[i, j]} is negative")
    surplus = -M.sum(axis=0)
    tol = 1e-12 * (1.0 + np.abs(M).sum(axis=0).max(initial=0.0))
    if (surplus < -tol).any():
        j = int(np.argmin(surplus))
        raise NotDiagonallyDominant(f"column {j + 1} violates -m_jj >= sum of off-diagonal entries")
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = M
    aug[n, :n] = np.where(np.abs(surplus) <= tol, 0.0, surplus)
    return LaplacianMatrix(-aug, LaplacianKind.FLOW, {"construction": "metzler sink augmentation"})
