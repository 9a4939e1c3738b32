"""Pressure of two-cylinder potentials and its parametric families.

For a potential ``A`` the transfer matrix is ``M[b, a] = exp(A[a, b])`` and
``P(A) = log rho(M)``.  With right Perron vector ``r`` the normalised
Jacobian

    J'(a, b) = exp(A[a, b]) r(a) / (rho r(b))

has unit column sums, and the Markov measure it defines is the equilibrium
state of ``A``.  Taking ``A = log J`` of a Markov system gives ``rho = 1``
with ``r = 1``, so ``P(log J) = 0`` and the system is its own equilibrium
state.

Families ``t -> P(t B + A)`` are handled by :class:`PressureCurve`; its
first and second derivatives come from eigenvalue perturbation, not from
differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, NoConvergence
from .maxplus import karp
from .model import MarkovSystem, TwoCylinderPotential, integrate, log_likelihood_ratio, markov_system_from_jacobian

PERRON_TOL = 1e-13
PERRON_MAXITER = 1_000_000


def perron_root(m: np.ndarray, tol: float = PERRON_TOL, maxiter: int = PERRON_MAXITER):
    """Spectral radius and positive right eigenvector of a non-negative matrix.

    Returns ``(rho, r)`` with ``max(r) = 1``.
    """
    m = np.ascontiguousarray(m, dtype=float)
    rho, r, used = kernels.perron(m, tol, maxiter)
    if used < 0:
        raise NoConvergence(f"power iteration did not settle within {maxiter} steps")
    if not (rho > 0 and np.all(r > 0)):
        raise NoConvergence("transfer matrix is numerically reducible (Perron vector not positive)")
    return rho, r


def _transfer(a: TwoCylinderPotential):
    shift = float(np.max(a.values))
    return np.exp(a.values - shift).T, shift


def pressure(a: TwoCylinderPotential) -> float:
    """``log`` of the spectral radius of ``exp(A)`` (transposed)."""
    m, shift = _transfer(a)
    rho, _ = perron_root(m)
    return math.log(rho) + shift


def restricted_pressure(a: TwoCylinderPotential, mask: np.ndarray) -> float:
    """Pressure of ``A`` on the subshift that only allows edges in ``mask``.

    ``mask[a, b]`` permits the transition ``a -> b``.  Used for the limiting
    rate at the end points of the derivative range.
    """
    m, shift = _transfer(a)
    m = m * np.asarray(mask, dtype=bool).T
    rho, _, used = kernels.perron(np.ascontiguousarray(m), PERRON_TOL, PERRON_MAXITER)
    if used < 0 or not rho > 0:
        raise NoConvergence("restricted transfer matrix: power iteration failed")
    return math.log(rho) + shift


@dataclass(frozen=True)
class EquilibriumState:
    system: MarkovSystem
    log_eigenvalue: float
    tilt: float = 0.0


def _eigendata(a: TwoCylinderPotential):
    m, shift = _transfer(a)
    rho, r = perron_root(m)
    jac = m.T * r[:, None] / (rho * r[None, :])
    return m, shift, rho, r, markov_system_from_jacobian(jac)


def equilibrium_state(a: TwoCylinderPotential, tilt: float = 0.0) -> EquilibriumState:
    """Gibbs measure of ``A`` as a Markov system, with ``P(A)``."""
    _, shift, rho, _, system = _eigendata(a)
    return EquilibriumState(system, math.log(rho) + shift, tilt)


LIKELIHOOD = "likelihood"
BAYES = "bayes"


@dataclass(frozen=True)
class CurvePoint:
    t: float
    value: float
    slope: float
    curvature: float
    equilibrium: EquilibriumState


@dataclass(frozen=True, eq=False)
class PressureCurve:
    """``t -> P(t * direction + base)`` with its derivative range ``(c_minus, c_plus)``.

    ``family`` is ``"likelihood"`` (direction ``K = log J0 - log J1``) or
    ``"bayes"`` (direction ``log J_lambda``); ``j`` names the base ``log J_j``.
    """

    family: str
    j: int
    direction: TwoCylinderPotential
    base: TwoCylinderPotential
    c_minus: float
    c_plus: float
    lam: float | None = None

    def potential(self, t: float) -> TwoCylinderPotential:
        return TwoCylinderPotential(t * self.direction.values + self.base.values)

    def __call__(self, t: float) -> float:
        return pressure(self.potential(t))

    value = __call__

    def equilibrium(self, t: float) -> EquilibriumState:
        return equilibrium_state(self.potential(t), t)

    def derivative(self, t: float) -> float:
        return integrate(self.direction, self.equilibrium(t).system)

    def second_derivative(self, t: float) -> float:
        return self.evaluate(t).curvature

    def evaluate(self, t: float) -> CurvePoint:
        """Value, first and second derivative at ``t`` from one eigensolve."""
        m, shift, rho, r, system = _eigendata(self.potential(t))
        eq = EquilibriumState(system, math.log(rho) + shift, t)
        b = self.direction.values.T
        left = system.stationary / r
        m1 = m * b
        m2 = m1 * b
        drho = left @ m1 @ r
        d = len(r)
        # derivative of the Perron vector, pinned by left . r' = 0
        bordered = np.zeros((d + 1, d + 1))
        bordered[:d, :d] = rho * np.eye(d) - m
        bordered[:d, d] = r
        bordered[d, :d] = left
        rhs = np.zeros(d + 1)
        rhs[:d] = m1 @ r - drho * r
        dr = np.linalg.solve(bordered, rhs)[:d]
        d2rho = left @ m2 @ r + 2.0 * left @ (m1 @ dr - drho * dr)
        slope = integrate(self.direction, system)
        curvature = d2rho / rho - (drho / rho) ** 2
        return CurvePoint(t, eq.log_eigenvalue, slope, float(max(curvature, 0.0)), eq)


def pressure_curve(direction: TwoCylinderPotential, base: TwoCylinderPotential, family: str = LIKELIHOOD,
                   j: int = 0, lam: float | None = None) -> PressureCurve:
    """Build a curve; the derivative range comes from the max-plus cycle means of ``direction``."""
    if direction.d != base.d:
        raise DimensionMismatch(f"direction has d={direction.d}, base has d={base.d}")
    c_plus = karp(direction.values)
    c_minus = -karp(-direction.values)
    return PressureCurve(family, j, direction, base, c_minus, c_plus, lam)


def likelihood_curve(sys0: MarkovSystem, sys1: MarkovSystem, j: int) -> PressureCurve:
    """``P_j(t) = P(t K + log J_j)``."""
    k = log_likelihood_ratio(sys0, sys1)
    base = (sys0, sys1)[j].log_jacobian()
    return pressure_curve(k, base, LIKELIHOOD, j)


def mixed_jacobian(sys0: MarkovSystem, sys1: MarkovSystem, lam: float) -> TwoCylinderPotential:
    """``J_lambda = lam J1 + (1 - lam) J0`` (a mixture of Jacobians, not of logs)."""
    return TwoCylinderPotential(lam * sys1.jacobian.values + (1.0 - lam) * sys0.jacobian.values)


def bayes_curve(sys0: MarkovSystem, sys1: MarkovSystem, j: int, lam: float) -> PressureCurve:
    """``P_{j, lam}(t) = P(t log J_lambda + log J_j)``."""
    direction = TwoCylinderPotential(np.log(mixed_jacobian(sys0, sys1, lam).values))
    base = (sys0, sys1)[j].log_jacobian()
    return pressure_curve(direction, base, BAYES, j, lam)


def pressure_derivative(curve: PressureCurve, t: float) -> float:
    return curve.derivative(t)


def closed_form_pressure_2x2(a: TwoCylinderPotential) -> float:
    """Largest root of the characteristic quadratic, for ``d = 2`` only."""
    if a.d != 2:
        raise DimensionMismatch("closed form needs d = 2")
    m = np.exp(a.values)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return math.log(0.5 * (tr + math.sqrt(tr * tr - 4.0 * det)))
