"""Available storage of passive network systems with flow sources.

For ``x' = D u`` on a connected graph the states reachable from ``x`` are
exactly those with the same total ``sum(x)``, so the extractable energy is
``H(x) - min {H(z) : sum(z) = sum(x)}``. The minimizer equalizes the
vertex potentials ``dH_i(z_i)`` at a common value ``lam``, which is found
here by a scalar root search on ``sum_i dH_i^{-1}(lam) = sum(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import HamiltonianSpec
from .errors import (
    BracketingFailed,
    DimensionMismatch,
    DisconnectedInput,
    NoInverseProvided,
    NonPositiveMass,
    NotControllable,
    NotStrictlyConvex,
)
from .graph import DirectedGraph, incidence_matrix

MAX_ITER = 100
MAX_EXPANSIONS = 60


@dataclass(frozen=True)
class StorageResult:
    value: float
    minimizer: np.ndarray
    lagrange_multiplier: float | np.ndarray

    def to_dict(self) -> dict:
        lam = self.lagrange_multiplier
        return {
            "value": float(self.value),
            "minimizer": np.asarray(self.minimizer).tolist(),
            "lambda": lam.tolist() if isinstance(lam, np.ndarray) else float(lam),
        }


def available_storage_quadratic(x) -> StorageResult:
    """Closed form for ``H = |x|^2 / 2``: ``x^T (I - 11^T/n) x / 2``.

    ``x`` may be ``(n,)`` or ``(n, d)`` for vertex states in R^d.
    """
    x = np.asarray(x, dtype=float)
    mean = x.mean(axis=0)
    centered = x - mean
    value = 0.5 * float(np.sum(centered * centered))
    return StorageResult(value, np.broadcast_to(mean, x.shape).copy(), mean)


def _numeric_inverse(H: HamiltonianSpec):
    """Invert each ``dH_i`` by bisection (opt-in fallback)."""

    def inv(y):
        y = np.asarray(y, dtype=float)
        lo = np.full(H.n, -1.0)
        hi = np.full(H.n, 1.0)
        for _ in range(MAX_EXPANSIONS):
            bad = H.gradient(lo) > y
            if not bad.any():
                break
            lo = np.where(bad, 2 * lo - 1.0, lo)
        for _ in range(MAX_EXPANSIONS):
            bad = H.gradient(hi) < y
            if not bad.any():
                break
            hi = np.where(bad, 2 * hi + 1.0, hi)
        if (H.gradient(lo) > y).any() or (H.gradient(hi) < y).any():
            raise BracketingFailed("could not bracket the inverse of dH")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            up = H.gradient(mid) < y
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
            if (hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))).all():
                break
        return 0.5 * (lo + hi)

    return inv


def _check_convexity(H: HamiltonianSpec, x: np.ndarray):
    width = 1.0 + np.abs(x).max(initial=0.0)
    offsets = np.linspace(-width, width, 33)
    samples = np.array([H.gradient(x + t) for t in offsets])
    finite = np.isfinite(samples)
    for i in range(H.n):
        col = samples[finite[:, i], i]
        if col.size > 1 and not (np.diff(col) > 0).all():
            raise NotStrictlyConvex(f"dH_{i + 1} is not strictly increasing near x_{i + 1}")


def constrained_minimizer(H: HamiltonianSpec, x, numeric_inverse: bool = False) -> StorageResult:
    """Minimize ``H(z)`` subject to ``sum(z) = sum(x)``.

    Solves ``g(lam) = sum_i dH_i^{-1}(lam) = sum(x)`` with a Newton
    iteration safeguarded by the bracket ``[min dH(x), max dH(x)]`` and a
    bisection fallback. ``g`` is increasing for strictly convex ``H``, so
    the bracket always contains the root. ``value`` is ``H(x) - H(z)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (H.n,):
        raise DimensionMismatch(f"state has shape {x.shape}, Hamiltonian has {H.n} components")
    inv = H.inverse_gradient
    if inv is None:
        if not numeric_inverse:
            raise NoInverseProvided(
                f"Hamiltonian of kind {H.kind!r} has no inverse gradient; "
                "pass numeric_inverse=True to invert it by bisection")
        inv = _numeric_inverse(H)
    _check_convexity(H, x)

    target = float(x.sum())
    scale = 1.0 + float(np.abs(x).sum())
    tol = 1e-12 * scale

    def g(lam):
        return float(np.sum(inv(np.full(H.n, lam)))) - target

    e = H.gradient(x)
    lo, hi = float(e.min()), float(e.max())
    glo, ghi = g(lo), g(hi)
    for _ in range(MAX_EXPANSIONS):
        if glo <= 0 <= ghi:
            break
        # rounding in a user inverse can push the endpoints slightly off
        step = max(hi - lo, 1e-12 * (1.0 + abs(lo) + abs(hi)))
        if glo > 0:
            lo -= step
            glo = g(lo)
        if ghi < 0:
            hi += step
            ghi = g(hi)
    else:
        raise BracketingFailed(f"no sign change of the constraint residual in [{lo}, {hi}]")
    if not (np.isfinite(glo) and np.isfinite(ghi)):
        raise BracketingFailed("constraint residual is not finite on the bracket")

    if abs(glo) <= tol:
        lam = lo
    elif abs(ghi) <= tol:
        lam = hi
    else:
        lam = 0.5 * (lo + hi)
        for _ in range(MAX_ITER):
            r = g(lam)
            if abs(r) <= tol or hi - lo <= 2 * np.finfo(float).eps * max(1.0, abs(lam)):
                break
            if r > 0:
                hi = lam
            else:
                lo = lam
            h = 1e-7 * (1.0 + abs(lam))
            slope = (g(lam + h) - g(lam - h)) / (2 * h)
            newton = lam - r / slope if slope > 0 and np.isfinite(slope) else np.nan
            lam = newton if lo < newton < hi else 0.5 * (lo + hi)

    z = inv(np.full(H.n, lam))
    return StorageResult(H(x) - H(z), z, float(lam))


def available_storage_general(H: HamiltonianSpec, x, numeric_inverse: bool = False) -> StorageResult:
    """Available storage ``H(x) - H(x*)`` for strictly convex additive ``H``.

    Only the total ``sum(x)`` is invariant under the source flows, so the
    result does not depend on which connected graph links the vertices.
    """
    return constrained_minimizer(H, x, numeric_inverse=numeric_inverse)


def motion_energy(m, p, d: int = 1) -> float:
    """Energy extractable from point masses by forces summing to zero.

    ``p`` is ``(n,)``, ``(n, d)``, or a flat vertex-major vector of length
    ``n * d``. Computed from the pairwise velocity differences.
    """
    m = np.asarray(m, dtype=float)
    if (m <= 0).any():
        raise NonPositiveMass("masses must be positive")
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p.reshape(len(m), d) if d > 1 else p[:, None]
    if p.shape[0] != len(m):
        raise DimensionMismatch("need one momentum per mass")
    v = p / m[:, None]
    total = m.sum()
    value = 0.0
    n = len(m)
    for i in range(n):
        for j in range(i + 1, n):
            diff = v[i] - v[j]
            value += m[i] * m[j] / total * float(diff @ diff)
    return 0.5 * value


@dataclass(frozen=True)
class GeneralizedSystem:
    """``x' = -D_u R_u D_u^T dH(x) + D_s u`` with output ``y = D_s^T dH(x)``.

    ``D_s`` holds the incidence columns of flow-source edges, ``D_u`` those
    of resistive edges with positive weights ``R_u``.
    """

    D_s: np.ndarray
    D_u: np.ndarray
    R_u: np.ndarray
    H: HamiltonianSpec

    def __post_init__(self):
        Ds = np.asarray(self.D_s, dtype=float)
        Du = np.asarray(self.D_u, dtype=float)
        n = self.H.n
        Ds = Ds.reshape(n, -1) if Ds.size == 0 else Ds
        Du = Du.reshape(n, -1) if Du.size == 0 else Du
        Ru = np.asarray(self.R_u, dtype=float).reshape(-1)
        if Ds.shape[0] != n or Du.shape[0] != n:
            raise DimensionMismatch("D_s and D_u need one row per vertex")
        if Ru.shape != (Du.shape[1],):
            raise DimensionMismatch("R_u needs one weight per resistive edge")
        if (Ru <= 0).any():
            raise ValueError("resistive weights must be positive")
        object.__setattr__(self, "D_s", Ds)
        object.__setattr__(self, "D_u", Du)
        object.__setattr__(self, "R_u", Ru)

    @classmethod
    def from_graph(cls, g: DirectedGraph, source_edges: Sequence[int],
                   H: HamiltonianSpec) -> "GeneralizedSystem":
        """Split ``g``'s edges; ``source_edges`` are 0-based edge indices.

        The remaining edges are resistive with their graph weights.
        """
        D = incidence_matrix(g).astype(float)
        src = sorted(set(source_edges))
        if any(not 0 <= j < g.m for j in src):
            raise DimensionMismatch("source edge index out of range")
        res = [j for j in range(g.m) if j not in src]
        return cls(D[:, src], D[:, res], np.array([g.weights[j] for j in res]), H)

    @property
    def incidence(self) -> np.ndarray:
        return np.hstack([self.D_s, self.D_u])

    def partial_laplacian(self) -> np.ndarray:
        return self.D_u @ np.diag(self.R_u) @ self.D_u.T


def _orth(M: np.ndarray, tol: float) -> np.ndarray:
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol]


def controllability_check(sys: GeneralizedSystem) -> bool:
    """Kalman test: does the smallest ``A``-invariant subspace containing
    ``im D_s`` equal ``im D``, with ``A = D_u R_u D_u^T``?

    Exact for the quadratic Hamiltonian ``|x|^2 / 2``. For other
    Hamiltonians the test is applied to the same pair unchanged, which
    checks controllability of the linearization at the identity metric only.
    """
    A = sys.partial_laplacian()
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).sum(axis=1).max(initial=0.0)))
    tol = 1e-10 * scale * n
    basis = _orth(sys.D_s, tol)
    for _ in range(n):
        grown = _orth(np.hstack([basis, A @ basis]), tol)
        if grown.shape[1] == basis.shape[1]:
            break
        basis = grown
    rank_D = np.linalg.matrix_rank(sys.incidence) if sys.incidence.size else 0
    return basis.shape[1] == rank_D


def available_storage_generalized(sys: GeneralizedSystem, x,
                                  numeric_inverse: bool = False) -> StorageResult:
    """Available storage of a controllable source/resistor split.

    Equal to :func:`available_storage_general`: dissipation vanishes at the
    consensus minimizer, so it can be approached with arbitrarily little
    loss. Refuses uncontrollable splits rather than returning a bound.
    """
    n = sys.H.n
    D = sys.incidence
    if (np.linalg.matrix_rank(D) if D.size else 0) != n - 1:
        raise DisconnectedInput("the network must be connected")
    if not controllability_check(sys):
        raise NotControllable("source edges do not control the network on x + im D")
    return available_storage_general(sys.H, x, numeric_inverse=numeric_inverse)
