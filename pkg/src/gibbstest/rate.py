"""Large-deviation rate functions of the averaged statistic.

Under ``mu_j`` the statistic ``S_n - E`` satisfies a large-deviation
principle with rate

    I_j(x) = sup_t [t (x + E) - P_j(t)],

the Legendre transform of a pressure curve.  The supremum is attained at the
tilt ``t`` with ``P_j'(t) = x + E``, found here by a bracketed Newton
iteration using the analytic second derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IdentityViolation, NoConvergence, SlopeOutOfRange
from .maxplus import critical_edges
from .model import MarkovSystem, integrate, log_likelihood_ratio
from .pressure import EquilibriumState, PressureCurve, likelihood_curve, restricted_pressure

INFINITE = math.inf
TILT_TOL = 1e-10
T_MAX = 1e4
IDENTITY_CHECK_TOL = 1e-9

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "infinite"
DEGENERATE = "degenerate"


def safeguarded_newton(f, target, x0=0.0, tol=TILT_TOL, xmax=T_MAX, maxiter=200):
    """Root of the increasing function ``f(x) - target``.

    ``f`` returns ``(value, derivative, payload)``.  Newton steps are taken
    while they stay inside the current bracket; otherwise the bracket is
    bisected, or, while one side is still open, the step length is doubled.
    Once the residual is below ``tol`` one further Newton step is tried and
    kept if it improves the residual.

    Returns ``(x, residual, payload, iterations)``.
    """
    lo, hi = -math.inf, math.inf
    x = float(x0)
    step = 1.0
    for it in range(1, maxiter + 1):
        fx, dfx, payload = f(x)
        g = fx - target
        if abs(g) < tol:
            if dfx > 0:
                xp = x - g / dfx
                fp, _, pp = f(xp)
                if abs(fp - target) < abs(g):
                    return xp, fp - target, pp, it + 1
            return x, g, payload, it
        if g < 0:
            lo = x
        else:
            hi = x
        xn = x - g / dfx if dfx > 0 else math.nan
        if math.isfinite(lo) and math.isfinite(hi):
            if not (lo < xn < hi):
                xn = 0.5 * (lo + hi)
            if hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
                break
        elif not math.isfinite(xn) or abs(xn - x) > step or (g < 0 and xn <= x) or (g > 0 and xn >= x):
            # bracket still open on one side: expand geometrically
            xn = x + step if g < 0 else x - step
            step *= 2.0
        if abs(xn) > xmax:
            raise NoConvergence(f"tilt left [-{xmax:g}, {xmax:g}] (target {target!r} at the edge of the range?)")
        x = xn
    raise NoConvergence(f"no root after {maxiter} iterations, last residual {g:.3e}")


@dataclass(frozen=True)
class TiltSolution:
    t: float
    pressure_at_t: float
    equilibrium: EquilibriumState
    rate_at_zero: float
    E: float
    residual: float = 0.0
    iterations: int = 0


def solve_tilt(curve: PressureCurve, E: float, t_start: float = 0.0, tol: float = TILT_TOL) -> TiltSolution:
    """The tilt ``t`` with ``P'(t) = E`` and ``I(0) = t E - P(t)``.

    Raises
    ------
    SlopeOutOfRange
        If ``E`` is not strictly inside ``(c_minus, c_plus)``.
    """
    if not (curve.c_minus < E < curve.c_plus):
        raise SlopeOutOfRange(f"E={E!r} outside the derivative range ({curve.c_minus!r}, {curve.c_plus!r})")

    def f(t):
        p = curve.evaluate(t)
        return p.slope, p.curvature, p

    t, res, point, its = safeguarded_newton(f, E, t_start, tol)
    return TiltSolution(float(t), point.value, point.equilibrium, float(t * E - point.value), E, float(res), its)


@dataclass(frozen=True)
class RatePoint:
    x: float
    value: float
    t: float
    status: str


@dataclass(frozen=True, eq=False)
class RateFunction:
    """``x -> I_j(x)`` for the curve ``P_j`` and threshold limit ``E``."""

    curve: PressureCurve
    E: float
    j: int = 0

    @property
    def degenerate(self) -> bool:
        return self.curve.c_plus - self.curve.c_minus <= 1e-12 * max(1.0, abs(self.curve.c_plus))

    @property
    def v(self) -> float:
        """Zero of the rate function: ``-E + P_j'(0)``."""
        return -self.E + self.curve.derivative(0.0)

    def evaluate(self, x: float, t_start: float = 0.0) -> RatePoint:
        s = x + self.E
        lo, hi = self.curve.c_minus, self.curve.c_plus
        scale = max(1.0, abs(lo), abs(hi))
        if self.degenerate:
            hit = abs(s - hi) <= 1e-12 * scale
            return RatePoint(x, 0.0 if hit else INFINITE, math.nan, DEGENERATE)
        if s < lo - 1e-12 * scale or s > hi + 1e-12 * scale:
            return RatePoint(x, INFINITE, math.nan, OUTSIDE)
        if abs(s - hi) <= 1e-12 * scale:
            crit = critical_edges(self.curve.direction)
            return RatePoint(x, -restricted_pressure(self.curve.base, crit), math.inf, BOUNDARY)
        if abs(s - lo) <= 1e-12 * scale:
            crit = critical_edges(-self.curve.direction)
            return RatePoint(x, -restricted_pressure(self.curve.base, crit), -math.inf, BOUNDARY)
        # the tilt is solved with threshold x + E, so its rate at zero is I(x)
        sol = solve_tilt(self.curve, s, t_start)
        return RatePoint(x, sol.rate_at_zero, sol.t, INTERIOR)

    def __call__(self, x: float) -> float:
        return self.evaluate(x).value


def rate_value(rf: RateFunction, x: float) -> float:
    return rf(x)


@dataclass(frozen=True)
class IdentityReport:
    E: float
    t0: float
    t1: float
    rate0: float
    rate1: float
    residuals: dict


def rate_identities_check(sys0: MarkovSystem, sys1: MarkovSystem, E: float,
                          tol: float = IDENTITY_CHECK_TOL) -> IdentityReport:
    """Check ``t0 = t1 - 1``, ``P0(t0) = P1(t1)`` and ``I0(0) = I1(0) - E``."""
    s0 = solve_tilt(likelihood_curve(sys0, sys1, 0), E)
    s1 = solve_tilt(likelihood_curve(sys0, sys1, 1), E, s0.t + 1.0)
    res = {
        "tilt_shift": abs(s0.t - (s1.t - 1.0)),
        "pressure": abs(s0.pressure_at_t - s1.pressure_at_t),
        "rate_shift": abs(s0.rate_at_zero - (s1.rate_at_zero - E)),
    }
    for name, r in res.items():
        if not r <= tol:
            raise IdentityViolation(f"identity '{name}' violated at E={E!r}", r)
    return IdentityReport(E, s0.t, s1.t, s0.rate_at_zero, s1.rate_at_zero, res)


@dataclass(frozen=True)
class DegenerateLimits:
    """Half-line infima of the two rate functions.

    ``type2_limit`` is true when ``mu_1(S_n >= u_n) -> 1`` (``E`` below the
    mean of ``K`` under ``mu_1``); ``type1_limit`` when ``mu_0(S_n < u_n) -> 1``.
    """

    E: float
    v0: float
    v1: float
    inf_rate1_right: float
    inf_rate0_left: float
    type1_limit: bool
    type2_limit: bool


def degenerate_limits(sys0: MarkovSystem, sys1: MarkovSystem, E: float) -> DegenerateLimits:
    k = log_likelihood_ratio(sys0, sys1)
    v0 = -E + integrate(k, sys0)
    v1 = -E + integrate(k, sys1)
    # I_j is convex with its zero at v_j, so on a half-line the infimum is
    # 0 when v_j lies inside and the value at the end point 0 otherwise
    inf1 = 0.0 if v1 >= 0 else float(RateFunction(likelihood_curve(sys0, sys1, 1), E, 1)(0.0))
    inf0 = 0.0 if v0 <= 0 else float(RateFunction(likelihood_curve(sys0, sys1, 0), E, 0)(0.0))
    return DegenerateLimits(E, v0, v1, inf1, inf0, type1_limit=v0 < 0, type2_limit=v1 > 0)
