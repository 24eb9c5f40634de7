"""Network dynamics ``x' = -L dH(x)``, RK4 integration and diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteState,
    NotBalanced,
    NotStronglyConnected,
    ZeroSigmaEntry,
)
from .kirchhoff import JRDecomposition, SigmaVector, jr_decomposition, sigma_per_component
from .laplacian import LaplacianKind, LaplacianMatrix, as_array, eigen_tolerance, is_balanced

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HamiltonianSpec:
    """Additive energy ``H(x) = sum_i H_i(x_i)``.

    The three callables act elementwise on a full state vector and return
    the per-vertex values ``H_i(x_i)``, ``dH_i(x_i)`` and (optionally) the
    inverse of ``dH_i``. Use the factory functions below rather than
    building one by hand.
    """

    n: int
    components: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    inverse_gradient: Callable[[np.ndarray], np.ndarray] | None = None
    kind: str = "custom"
    params: Mapping = field(default_factory=dict)

    def __call__(self, x) -> float:
        return float(np.sum(self.components(np.asarray(x, dtype=float))))

    def grad(self, x) -> np.ndarray:
        return self.gradient(np.asarray(x, dtype=float))


def quadratic(coefficients) -> HamiltonianSpec:
    """``H_i(x) = c_i x^2 / 2`` with ``c_i > 0``."""
    c = np.asarray(coefficients, dtype=float)
    if (c <= 0).any():
        raise ValueError("quadratic coefficients must be positive")
    return HamiltonianSpec(
        len(c),
        lambda x: 0.5 * c * x**2,
        lambda x: c * x,
        lambda y: y / c,
        kind="quadratic",
        params={"coefficients": c},
    )


def unit_quadratic(n: int) -> HamiltonianSpec:
    return quadratic(np.ones(n))


def kinetic(masses) -> HamiltonianSpec:
    """Kinetic energy ``p_i^2 / (2 m_i)`` of point masses."""
    m = np.asarray(masses, dtype=float)
    if (m <= 0).any():
        raise ValueError("masses must be positive")
    return HamiltonianSpec(
        len(m),
        lambda p: 0.5 * p**2 / m,
        lambda p: p / m,
        lambda v: m * v,
        kind="kinetic",
        params={"masses": m},
    )


def exponential(n: int) -> HamiltonianSpec:
    """``H_i(x) = exp(x)``, strictly convex and bounded below."""
    return HamiltonianSpec(n, np.exp, np.exp, np.log, kind="exponential", params={})


def custom(energies: Sequence[Callable], derivatives: Sequence[Callable],
           inverses: Sequence[Callable] | None = None) -> HamiltonianSpec:
    """Build a Hamiltonian from per-vertex scalar functions."""
    n = len(energies)
    if len(derivatives) != n or (inverses is not None and len(inverses) != n):
        raise DimensionMismatch("need one energy, derivative (and inverse) per vertex")

    def lift(fs):
        return lambda x: np.array([f(float(xi)) for f, xi in zip(fs, x)])

    return HamiltonianSpec(
        n, lift(energies), lift(derivatives),
        lift(inverses) if inverses is not None else None,
        kind="custom",
    )


def polynomial(n: int, coefficients: Sequence[float]) -> HamiltonianSpec:
    """Identical components ``H_i(x) = sum_k a_k x^k``; no closed-form inverse."""
    poly = np.polynomial.Polynomial(coefficients)
    dpoly = poly.deriv()
    return HamiltonianSpec(n, poly, dpoly, None, kind="polynomial",
                           params={"coefficients": list(coefficients)})


def gradient_flow_field(L, H: HamiltonianSpec) -> Field:
    """Vector field ``x -> -L dH(x)``."""
    a = as_array(L)
    if a.shape != (H.n, H.n):
        raise DimensionMismatch(f"Laplacian is {a.shape}, Hamiltonian has {H.n} components")
    return lambda x: -a @ H.gradient(x)


def transformed_hamiltonian(H: HamiltonianSpec, sigma) -> HamiltonianSpec:
    """Componentwise rescaled energy ``H_i / sigma_i``.

    Pairs with the balanced Laplacian ``L Sigma``: the two gradient flows
    coincide because ``L Sigma Sigma^-1 dH = L dH``.
    """
    s = np.asarray(sigma.values if isinstance(sigma, SigmaVector) else sigma, dtype=float)
    if s.shape != (H.n,):
        raise DimensionMismatch("sigma length differs from Hamiltonian size")
    if (s <= 0).any():
        raise ZeroSigmaEntry(f"sigma has nonpositive entries at {np.flatnonzero(s <= 0) + 1}")
    if H.kind == "quadratic":
        return quadratic(H.params["coefficients"] / s)
    if H.kind == "kinetic":
        return kinetic(H.params["masses"] * s)
    inv = H.inverse_gradient
    return HamiltonianSpec(
        H.n,
        lambda x: H.components(x) / s,
        lambda x: H.gradient(x) / s,
        (lambda y: inv(s * y)) if inv is not None else None,
        kind="custom",
        params={"base": H.kind, "sigma": s},
    )


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _rk4_step(f: Field, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def default_step(L) -> float:
    """``1e-3`` times the characteristic time ``1 / ||L||_inf``."""
    norm = np.abs(as_array(L)).sum(axis=1).max(initial=0.0)
    return 1e-3 / norm if norm > 0 else 1e-3


def simulate(field_: Field, x0, dt: float, T: float,
             diagnostics: Mapping[str, Callable[[np.ndarray], float]] | None = None,
             converge_tol: float | None = None) -> Trajectory:
    """Fixed-step classical Runge-Kutta integration on ``[0, T]``.

    The grid is uniform with step ``dt``; if ``T`` is not a multiple of
    ``dt`` the last step is shortened to land on ``T``. ``diagnostics`` maps
    names to scalar functions of the state, evaluated on every grid point.
    With ``converge_tol`` set, integration stops early once
    ``||f(x)||_inf < converge_tol``.

    Raises :class:`NonFiniteState` (carrying the partial trajectory) if the
    state stops being finite.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not T >= dt:
        raise ValueError(f"T must be at least dt, got T={T}, dt={dt}")
    diagnostics = dict(diagnostics or {})
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    x = np.array(x0, dtype=float)
    times = [0.0]
    states = [x.copy()]
    diag = {k: [float(fn(x))] for k, fn in diagnostics.items()}

    def partial():
        return Trajectory(np.array(times), np.array(states),
                          {k: np.array(v) for k, v in diag.items()})

    for k in range(1, nsteps + 1):
        t_next = T if k == nsteps else k * dt
        x = _rk4_step(field_, x, t_next - times[-1])
        if not np.isfinite(x).all():
            raise NonFiniteState(f"state became non-finite at t={t_next:.6g}", partial())
        times.append(t_next)
        states.append(x.copy())
        for name, fn in diagnostics.items():
            diag[name].append(float(fn(x)))
        if converge_tol is not None and np.abs(field_(x)).max(initial=0.0) < converge_tol:
            break
    return partial()


def conserved_quantity_check(trajectory: Trajectory, sigma=None) -> float:
    """Largest deviation of ``sigma . x(t)`` from its initial value.

    ``sigma`` defaults to the all-ones vector, the conserved total of flow
    Laplacian dynamics. For consensus dynamics pass the left kernel vector.
    """
    X = trajectory.states
    if sigma is None:
        s = np.ones(X.shape[1])
    else:
        s = np.asarray(sigma.values if isinstance(sigma, SigmaVector) else sigma, dtype=float)
    q = X @ s
    return float(np.abs(q - q[0]).max(initial=0.0))


def _require_balanced(L):
    a = as_array(L)
    if isinstance(L, LaplacianMatrix) and L.kind is LaplacianKind.SYMMETRIC:
        return a
    if not is_balanced(a):
        raise NotBalanced("Lyapunov rate needs a balanced or symmetric Laplacian")
    return a


def lyapunov_rate(L, H: HamiltonianSpec, x) -> float:
    """Time derivative ``-dH^T L dH`` of ``H`` along the gradient flow."""
    a = _require_balanced(L)
    e = H.grad(x)
    return float(-e @ a @ e)


@dataclass(frozen=True)
class PassivityCertificate:
    """Weights ``1/sigma_i`` for the combined storage plus the balanced certificate."""

    weights: np.ndarray
    sigma: np.ndarray
    certificate: JRDecomposition
    scaled_min_eigenvalue: float


def scaled_passivity_weights(L) -> PassivityCertificate:
    """Storage weights making ``u = -L y + v`` interconnections passive.

    With ``Sigma`` from the Matrix-Tree construction, ``L Sigma`` is
    balanced, so ``Sigma^-1 (L Sigma) Sigma^-1`` has a PSD symmetric part.
    """
    a = as_array(L)
    sig = sigma_per_component(a)
    if not sig.strictly_positive:
        raise NotStronglyConnected("some weak component is not strongly connected")
    s = sig.values
    Lb = a * s[None, :]
    cert = jr_decomposition(Lb)
    scaled = Lb / s[:, None] / s[None, :]
    lam = float(np.linalg.eigvalsh(0.5 * (scaled + scaled.T))[0])
    if lam < -eigen_tolerance(scaled):
        raise NotBalanced(f"scaled certificate has negative eigenvalue {lam:.3e}")
    return PassivityCertificate(1.0 / s, s, cert, lam)
