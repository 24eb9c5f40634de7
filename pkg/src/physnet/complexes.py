"""Chain complexes given by boundary matrices, and heat transfer on 2-complexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionChainBroken, LevelOutOfRange, OutOfEntropyDomain
from .graph import DirectedGraph, incidence_matrix


@dataclass(frozen=True)
class ChainComplex:
    """Boundary operators ``[d_k, ..., d_1]`` (highest level first).

    ``boundary(j)`` maps j-chains to (j-1)-chains and has shape
    ``(cell_counts[j-1], cell_counts[j])``.
    """

    boundaries: tuple[np.ndarray, ...]
    cell_counts: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        mats = tuple(np.array(b, dtype=np.int64, ndmin=2) for b in self.boundaries)
        if not mats:
            raise DimensionChainBroken("a complex needs at least one boundary operator")
        ascending = mats[::-1]
        counts = [ascending[0].shape[0]]
        for j, b in enumerate(ascending, start=1):
            if b.shape[0] != counts[-1]:
                raise DimensionChainBroken(
                    f"boundary {j} has {b.shape[0]} rows, expected {counts[-1]}")
            counts.append(b.shape[1])
        object.__setattr__(self, "boundaries", mats)
        object.__setattr__(self, "cell_counts", tuple(counts))

    @property
    def k(self) -> int:
        return len(self.boundaries)

    def boundary(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.k:
            raise LevelOutOfRange(f"level {j} outside 1..{self.k}")
        return self.boundaries[self.k - j]

    @classmethod
    def from_graph(cls, g: DirectedGraph) -> "ChainComplex":
        return cls((incidence_matrix(g),))

    @classmethod
    def from_dict(cls, data: dict) -> "ChainComplex":
        """Parse ``{"cells": [n0, ..., nk], "boundaries": {"d1": ..., "dk": ...}}``."""
        cells = list(data["cells"])
        bd = data["boundaries"]
        k = len(cells) - 1
        mats = []
        for j in range(k, 0, -1):
            b = np.array(bd[f"d{j}"], dtype=np.int64).reshape(cells[j - 1], cells[j])
            mats.append(b)
        return cls(tuple(mats))

    def to_dict(self) -> dict:
        return {
            "cells": list(self.cell_counts),
            "boundaries": {f"d{j}": self.boundary(j).tolist() for j in range(self.k, 0, -1)},
        }


def validate_complex(c: ChainComplex) -> bool:
    """True iff every composition ``d_{j-1} d_j`` vanishes (integer arithmetic)."""
    return all(
        not (c.boundary(j - 1) @ c.boundary(j)).any()
        for j in range(2, c.k + 1)
    )


def coboundary(c: ChainComplex, j: int) -> np.ndarray:
    """Adjoint map on cochains, the transpose of ``boundary(j)``."""
    return c.boundary(j).T.copy()


@dataclass(frozen=True)
class Entropy:
    """Additive entropy ``s(u) = sum_i s_i(u_i)`` with its gradient and domain test."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    in_domain: Callable[[np.ndarray], bool] = lambda u: bool(np.isfinite(u).all())


LOG_ENTROPY = Entropy(
    value=lambda u: float(np.sum(np.log(u))),
    gradient=lambda u: 1.0 / u,
    in_domain=lambda u: bool((u > 0).all() and np.isfinite(u).all()),
)


@dataclass(frozen=True)
class HeatComplexSystem:
    """Face energies ``u`` exchanging heat through shared edges.

    ``conduction`` is either a vector of nonnegative per-edge conductances
    or a callable ``e_u -> R(e_u)`` returning a symmetric PSD edge matrix.
    For open complexes give boundary edges zero conductance (insulated).
    """

    complex: ChainComplex
    conduction: np.ndarray | float | Callable[[np.ndarray], np.ndarray] = 1.0
    entropy: Entropy = LOG_ENTROPY

    def __post_init__(self):
        if self.complex.k != 2:
            raise DimensionChainBroken(f"heat transfer needs a 2-complex, got k={self.complex.k}")
        if not callable(self.conduction):
            r = np.asarray(self.conduction, dtype=float)
            if r.ndim == 0:
                r = np.full(self.complex.cell_counts[1], float(r))
            if r.shape != (self.complex.cell_counts[1],) or (r < 0).any():
                raise ValueError("conduction needs one nonnegative value per edge")
            object.__setattr__(self, "conduction", r)

    def conduction_matrix(self, e_u: np.ndarray) -> np.ndarray:
        if callable(self.conduction):
            return np.asarray(self.conduction(e_u), dtype=float)
        return np.diag(self.conduction)

    def driving_force(self, u) -> tuple[np.ndarray, np.ndarray]:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.complex.cell_counts[2],):
            raise ValueError("need one energy per face")
        if not self.entropy.in_domain(u):
            raise OutOfEntropyDomain("face energies outside the entropy domain")
        e_u = self.entropy.gradient(u)
        return e_u, self.complex.boundary(2) @ e_u


def heat_field(sys: HeatComplexSystem) -> Callable[[np.ndarray], np.ndarray]:
    """Vector field ``u -> d_2^T R(e_u) d_2 ds/du(u)``.

    The sign makes heat flow from hot to cold faces, so that the entropy
    rate ``e^T R e`` is nonnegative.
    """
    d2 = sys.complex.boundary(2).astype(float)

    def f(u):
        e_u, e = sys.driving_force(u)
        return d2.T @ (sys.conduction_matrix(e_u) @ e)

    return f


def entropy_rate(sys: HeatComplexSystem, u) -> float:
    """``ds/dt = e^T R(e_u) e`` with ``e = d_2 ds/du``."""
    e_u, e = sys.driving_force(u)
    return float(e @ sys.conduction_matrix(e_u) @ e)


def is_closed(c: ChainComplex) -> bool:
    """Every edge of the top level appears with cancelling orientations."""
    return not c.boundary(c.k).sum(axis=1).any()

