"""Constructive Matrix-Tree machinery.

The kernel vector of a flow Laplacian is read off from its cofactors: for a
matrix with zero column sums every row of the adjugate's transpose is the
same vector ``sigma`` and ``L @ sigma = 0``. Entry ``sigma[i]`` equals the
total weight of the spanning trees directed towards vertex ``i``, so it is
nonnegative, and strictly positive everywhere exactly when the graph is
strongly connected. Scaling the columns of ``L`` by ``sigma`` then gives a
balanced Laplacian.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import det as _lu_det, null_space
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cs_components

from .errors import (
    DisconnectedInput,
    NoSpanningTree,
    NotBalanced,
    NotLaplacian,
    NotStronglyConnected,
    NumericallyIndeterminate,
)
from .laplacian import (
    LaplacianKind,
    LaplacianMatrix,
    as_array,
    eigen_tolerance,
    is_balanced,
)

POSITIVITY_THRESHOLD = 1e-12
EXACT_MAX_N = 10


@dataclass(frozen=True)
class SigmaVector:
    values: np.ndarray
    normalized: np.ndarray
    strictly_positive: bool

    @classmethod
    def from_raw(cls, raw) -> "SigmaVector":
        raw = np.asarray(raw, dtype=float)
        top = raw.max(initial=0.0)
        normalized = raw / top if top > 0 else raw.copy()
        positive = bool(top > 0 and (raw > POSITIVITY_THRESHOLD * top).all())
        return cls(raw, normalized, positive)

    def __len__(self):
        return len(self.values)

    def to_dict(self) -> dict:
        return {
            "sigma": self.values.tolist(),
            "normalized": self.normalized.tolist(),
            "strictly_positive": self.strictly_positive,
        }


@dataclass(frozen=True)
class JRDecomposition:
    """``L = -J + R`` with ``J`` skew-symmetric and ``R`` symmetric PSD."""

    J: np.ndarray
    R: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return -self.J + self.R


def _minor(a: np.ndarray, i: int, j: int) -> np.ndarray:
    return np.delete(np.delete(a, i, axis=0), j, axis=1)


def _cofactor(a: np.ndarray, i: int, j: int) -> float:
    if a.shape[0] == 1:
        return 1.0
    return (-1.0) ** (i + j) * float(_lu_det(_minor(a, i, j), check_finite=False))


def _det_exact(rows: list[list[Fraction]]) -> Fraction:
    a = [row[:] for row in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _cofactor_exact(rows: list[list[Fraction]], i: int, j: int) -> Fraction:
    if len(rows) == 1:
        return Fraction(1)
    minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
    return (-1) ** (i + j) * _det_exact(minor)


def _to_fractions(a) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in np.asarray(a, dtype=object).tolist()]


def adjugate(L, exact: bool = False, jobs: int = 1):
    """Classical adjoint: entry ``(i, j)`` is the cofactor ``C[j, i]``.

    Each minor determinant is computed by LU with partial pivoting. With
    ``exact=True`` the entries are converted to :class:`fractions.Fraction`
    (exact for binary floats) and the result is an object array of
    Fractions; this path is limited to ``n <= 10``. ``jobs > 1`` evaluates
    the minors on a thread pool; the result does not depend on ``jobs``.
    """
    if exact:
        rows = _to_fractions(as_array(L) if not isinstance(L, list) else L)
        n = len(rows)
        if n > EXACT_MAX_N:
            raise ValueError(f"exact adjugate limited to n <= {EXACT_MAX_N}, got {n}")
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = _cofactor_exact(rows, j, i)
        return out
    a = as_array(L)
    n = a.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(n)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            vals = list(pool.map(lambda ij: _cofactor(a, ij[1], ij[0]), pairs))
    else:
        vals = [_cofactor(a, j, i) for i, j in pairs]
    return np.array(vals, dtype=float).reshape(n, n)


def weak_components_of_matrix(L) -> list[list[int]]:
    """Weak components of the graph given by the off-diagonal support of ``L``."""
    a = as_array(L)
    pattern = (a != 0) | (a.T != 0)
    np.fill_diagonal(pattern, False)
    _, labels = _cs_components(csr_matrix(pattern), directed=False)
    groups: dict[int, list[int]] = {}
    for v, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(v)
    return sorted(groups.values(), key=lambda c: c[0])


def tree_roots(L) -> np.ndarray:
    """Mask of vertices reachable from every vertex along flow edges.

    These are exactly the vertices with at least one spanning tree directed
    towards them, i.e. the structurally nonzero entries of sigma. A flow
    edge ``t -> h`` is read off from ``L[h, t] < 0``.
    """
    a = as_array(L)
    n = a.shape[0]
    adj = (a < 0).T
    np.fill_diagonal(adj, False)
    reach = np.eye(n, dtype=bool) | adj
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2)))))):
        reach = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
    return reach.all(axis=0)


def _check_flow(a: np.ndarray):
    scale = 1.0 + np.abs(a).sum(axis=0).max(initial=0.0)
    if np.abs(a.sum(axis=0)).max(initial=0.0) > 1e-9 * scale:
        raise NotLaplacian("column sums must vanish (flow Laplacian expected)")


def sigma_right(L, exact: bool = False, jobs: int = 1) -> SigmaVector:
    """Tree-weight kernel vector of a weakly connected flow Laplacian.

    ``sigma[j]`` is the cofactor ``C[0, j]``. Entries for vertices with no
    spanning tree directed towards them are structural zeros and are set to
    exactly 0 (see :func:`tree_roots`). A structurally positive entry whose
    computed cofactor is not positive raises
    :class:`NumericallyIndeterminate`.

    >>> sigma_right([[2.0, -3.0], [-2.0, 3.0]]).values
    array([3., 2.])
    """
    a = as_array(L)
    _check_flow(a)
    if len(weak_components_of_matrix(a)) > 1:
        raise DisconnectedInput("graph has several weak components; use sigma_per_component")
    n = a.shape[0]
    if exact:
        rows = _to_fractions(a)
        return SigmaVector.from_raw([float(_cofactor_exact(rows, 0, j)) for j in range(n)])
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = np.array(list(pool.map(lambda j: _cofactor(a, 0, j), range(n))))
    else:
        raw = np.array([_cofactor(a, 0, j) for j in range(n)])
    roots = tree_roots(a)
    raw[~roots] = 0.0
    if (raw[roots] <= 0).any():
        bad = int(np.flatnonzero(roots & (raw <= 0))[0])
        raise NumericallyIndeterminate(
            f"cofactor for vertex {bad + 1} is {raw[bad]:.3e} although a spanning tree"
            " is directed towards it; determinant rounding dominates")
    return SigmaVector.from_raw(raw)


def sigma_left(Lc, exact: bool = False, jobs: int = 1) -> SigmaVector:
    """Row vector with ``sigma @ Lc = 0`` for a consensus Laplacian.

    Entry ``i`` sums tree weights over spanning trees directed from ``i``.
    """
    return sigma_right(as_array(Lc).T, exact=exact, jobs=jobs)


def sigma_per_component(L, left: bool = False, exact: bool = False, jobs: int = 1) -> SigmaVector:
    """Apply :func:`sigma_right` (or :func:`sigma_left`) on each weak component."""
    a = as_array(L)
    if left:
        a = a.T
    raw = np.zeros(a.shape[0])
    for comp in weak_components_of_matrix(a):
        idx = np.ix_(comp, comp)
        raw[comp] = sigma_right(a[idx], exact=exact, jobs=jobs).values
    sig = SigmaVector.from_raw(raw)
    # positivity must hold per component, not relative to the global maximum
    positive = all(
        SigmaVector.from_raw(raw[comp]).strictly_positive
        for comp in weak_components_of_matrix(a)
    )
    return SigmaVector(sig.values, sig.normalized, positive)


def nullspace_direction(L) -> np.ndarray:
    """Unit kernel direction from an SVD, sign-fixed to a nonnegative sum.

    Used only to cross-check the cofactor construction.
    """
    a = as_array(L)
    ns = null_space(a, rcond=1e-10)
    if ns.shape[1] != 1:
        raise DisconnectedInput(f"kernel has dimension {ns.shape[1]}, expected 1")
    v = ns[:, 0]
    return v if v.sum() >= 0 else -v


def balance(L, normalized: bool = False) -> tuple[LaplacianMatrix, np.ndarray]:
    """Balanced Laplacian ``L Sigma`` and the diagonal matrix ``Sigma``.

    Every weak component must be strongly connected. Components are handled
    independently. ``normalized=True`` rescales sigma so that its largest
    entry is one.
    """
    sig = sigma_per_component(L)
    if not sig.strictly_positive:
        zeros = [i + 1 for i in np.flatnonzero(sig.values <= 0)]
        raise NotStronglyConnected(
            f"vertices {zeros} have no spanning tree directed towards them")
    s = sig.normalized if normalized else sig.values
    Sigma = np.diag(s)
    Lb = as_array(L) @ Sigma
    return LaplacianMatrix(Lb, LaplacianKind.BALANCED, {"construction": "L Sigma", "sigma": s}), Sigma


def consensus_value(Lc, x0: Sequence[float]) -> float:
    """Limit value reached by ``x' = -Lc x`` from ``x0``.

    The sigma-weighted average of the initial states; vertices from which no
    spanning tree is directed carry zero weight.
    """
    a = as_array(Lc)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (a.shape[0],):
        raise ValueError(f"x0 must have length {a.shape[0]}")
    if len(weak_components_of_matrix(a)) > 1:
        raise NoSpanningTree("consensus graph is not weakly connected")
    sig = sigma_left(a).values
    total = sig.sum()
    if total <= 0:
        raise NoSpanningTree("no vertex roots a spanning tree; consensus is not guaranteed")
    return float(sig @ x0 / total)


def jr_decomposition(Lb) -> JRDecomposition:
    """Split a balanced Laplacian into skew part ``J`` and PSD symmetric part ``R``."""
    a = as_array(Lb)
    if not is_balanced(a):
        raise NotBalanced("row or column sums do not vanish")
    J = 0.5 * (a.T - a)
    R = 0.5 * (a + a.T)
    lam = float(np.linalg.eigvalsh(R)[0])
    if lam < -eigen_tolerance(a):
        raise NotBalanced(f"symmetric part has negative eigenvalue {lam:.3e}")
    return JRDecomposition(J, R)
