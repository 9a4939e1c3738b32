"""Threshold planners for testing ``mu_0`` against ``mu_1``.

Every planner returns a :class:`TestPlan`: the limit ``E`` of the threshold
sequence, the tilts that realise the two exponents, and the exponents
themselves.  The decision rule is "announce ``mu_1`` when ``S_n < u_n``", so

* type-I error  = ``mu_0(S_n < u_n)``, decaying like ``exp(-n I_0(0))``;
* type-II error = ``mu_1(S_n >= u_n)``, decaying like ``exp(-n I_1(0))``.

``S_n`` averages ``K = log J0 - log J1`` for the Neyman-Pearson and min-max
plans and ``log J_lambda`` for the Bayesian plans.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateHypotheses, InputError, InvalidAlternative, LambdaOutOfRange, NoConvergence, NoCrossing, SlopeOutOfRange
from .model import IDENTITY_TOL, MarkovSystem, TwoCylinderPotential, integrate, log_likelihood_ratio
from .pressure import bayes_curve, likelihood_curve, mixed_jacobian
from .rate import RateFunction, solve_tilt

NP = "NP"
MINMAX = "MINMAX"
BAYES = "BAYES"

CROSSING_TOL = 1e-12
LAMBDA_TOL = 1e-12


@dataclass(frozen=True)
class TestPlan:
    """Threshold limit and predicted error exponents of a test."""

    __test__ = False  # not a pytest class

    kind: str
    E: float
    t0: float
    t1: float
    exponent_type1: float
    exponent_type2: float
    lam: float | None = None
    loss_constants: tuple[float, float] | None = None
    priors: tuple[float, float] | None = None
    diagnostics: dict = field(default_factory=dict)

    def statistic(self, sys0: MarkovSystem, sys1: MarkovSystem) -> TwoCylinderPotential:
        """The potential averaged by ``S_n`` for this plan."""
        if self.kind == BAYES:
            return TwoCylinderPotential(np.log(mixed_jacobian(sys0, sys1, self.lam).values))
        return log_likelihood_ratio(sys0, sys1)

    def core(self) -> dict:
        """Plan fields that depend on the two systems only."""
        d = asdict(self)
        for k in ("loss_constants", "priors"):
            d.pop(k)
        return d

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TestPlan":
        d = json.loads(text)
        for k in ("loss_constants", "priors"):
            if d.get(k) is not None:
                d[k] = tuple(d[k])
        return cls(**d)


def _metadata(loss_constants, priors):
    if loss_constants is not None:
        loss_constants = tuple(float(x) for x in loss_constants)
        if len(loss_constants) != 2 or min(loss_constants) <= 0:
            raise InputError("loss_constants must be two positive numbers")
    if priors is not None:
        priors = tuple(float(x) for x in priors)
        if len(priors) != 2 or min(priors) < 0 or abs(sum(priors) - 1.0) > 1e-9:
            raise InputError("priors must be two non-negative numbers summing to 1")
    return loss_constants, priors


def _require_distinct(sys0: MarkovSystem, sys1: MarkovSystem):
    if sys0.same_as(sys1):
        raise DegenerateHypotheses("the two systems have the same Jacobian")


def kl_rate(sys0: MarkovSystem, sys1: MarkovSystem) -> float:
    """``integral of (log J0 - log J1) d mu_0``, the relative entropy rate."""
    return integrate(log_likelihood_ratio(sys0, sys1), sys0)


def case3_interval(sys0: MarkovSystem, sys1: MarkovSystem) -> tuple[float, float]:
    """Thresholds ``E`` for which both error probabilities decay."""
    k = log_likelihood_ratio(sys0, sys1)
    return integrate(k, sys1), integrate(k, sys0)


# -- Neyman-Pearson ---------------------------------------------------------


def np_plan(sys0, sys1, loss_constants=None, priors=None) -> TestPlan:
    """Fixed-size test: ``E`` is the relative entropy rate and so is the type-II exponent.

    At ``E = E_NP`` the tilts are exactly ``t1 = 1`` and ``t0 = 0``, since
    ``P_1'(1) = P_0'(0)`` is the mean of ``K`` under ``mu_0``.  The type-I
    error is held at the size ``alpha`` rather than decaying.
    """
    loss_constants, priors = _metadata(loss_constants, priors)
    _require_distinct(sys0, sys1)
    e = kl_rate(sys0, sys1)
    if not e > 0:
        raise DegenerateHypotheses(f"relative entropy rate is {e!r}")
    check = RateFunction(likelihood_curve(sys0, sys1, 1), e, 1)(0.0)
    return TestPlan(NP, e, 0.0, 1.0, 0.0, e, None, loss_constants, priors,
                    {"rate1_at_zero": check, "stein_residual": abs(check - e)})


@dataclass(frozen=True)
class AlternativeComparison:
    G: float
    G1: float
    exp_np: float
    exp_alt: float


def np_compare_alternative(sys0, sys1, G: float) -> AlternativeComparison:
    """Type-II exponents of the NP threshold and of a smaller limit ``G``.

    Both are read off ``I_1`` with ``E = E_NP``: the NP test at 0 and the
    alternative at ``G1 = G - E_NP < 0``.
    """
    e = kl_rate(sys0, sys1)
    if not 0.0 < G < e:
        raise InvalidAlternative(f"G={G!r} must lie in (0, {e!r})")
    rf = RateFunction(likelihood_curve(sys0, sys1, 1), e, 1)
    return AlternativeComparison(G, G - e, rf(0.0), rf(G - e))


# -- Min-max ----------------------------------------------------------------


def minmax_plan(sys0, sys1, loss_constants=None, priors=None) -> TestPlan:
    """``E = 0``: both exponents equal ``-min_t P_1(t)``."""
    loss_constants, priors = _metadata(loss_constants, priors)
    _require_distinct(sys0, sys1)
    sol1 = solve_tilt(likelihood_curve(sys0, sys1, 1), 0.0, 0.5)
    sol0 = solve_tilt(likelihood_curve(sys0, sys1, 0), 0.0, sol1.t - 1.0)
    rate = -sol1.pressure_at_t
    lo, hi = case3_interval(sys0, sys1)
    diag = {
        "case3_interval": [lo, hi],
        "rate0_at_zero": sol0.rate_at_zero,
        "rate1_at_zero": sol1.rate_at_zero,
        "crossing_residual": abs(sol0.rate_at_zero - sol1.rate_at_zero),
        "r_at_interval_ends": [minmax_r(sys0, sys1, lo)[2], minmax_r(sys0, sys1, hi)[2]],
    }
    return TestPlan(MINMAX, 0.0, sol0.t, sol1.t, rate, rate, None, loss_constants, priors, diag)


def minmax_r(sys0, sys1, E: float, t_start: float = 0.0) -> tuple[float, float, float]:
    """``(I_0(0), I_1(0), max of the two)`` for a threshold ``E`` between the two means of ``K``."""
    lo, hi = case3_interval(sys0, sys1)
    tol = IDENTITY_TOL * max(1.0, abs(lo), abs(hi))
    if not lo - tol <= E <= hi + tol:
        raise SlopeOutOfRange(f"E={E!r} outside [{lo!r}, {hi!r}]: one error probability does not decay")
    E = min(max(E, lo), hi)
    r1 = solve_tilt(likelihood_curve(sys0, sys1, 1), E, t_start)
    r0 = r1.rate_at_zero - E
    return r0, r1.rate_at_zero, max(r0, r1.rate_at_zero)


def minmax_sweep(sys0, sys1, grid) -> list[tuple[float, float, float, float]]:
    """Rows ``(E, rate0, rate1, rmax)`` over ``grid``."""
    rows = []
    curve1 = likelihood_curve(sys0, sys1, 1)
    t = 0.0
    lo, hi = case3_interval(sys0, sys1)
    for E in grid:
        if not lo <= E <= hi:
            raise SlopeOutOfRange(f"E={E!r} outside [{lo!r}, {hi!r}]")
        sol = solve_tilt(curve1, E, t)
        t = sol.t
        rows.append((float(E), sol.rate_at_zero - E, sol.rate_at_zero, max(sol.rate_at_zero - E, sol.rate_at_zero)))
    return rows


# -- Bayes / Chernoff -------------------------------------------------------


def bayes_g(sys_j: MarkovSystem, lam: float, sys0: MarkovSystem, sys1: MarkovSystem) -> float:
    """``g_j(lam)``: mean of ``log J_lambda`` under ``sys_j``."""
    if not 0.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"lambda={lam!r} outside [0, 1]")
    jl = mixed_jacobian(sys0, sys1, lam).values
    return float(np.sum(np.log(jl) * sys_j.pair_measure))


def bayes_lambda_s(sys0, sys1) -> float:
    """The unique ``lam`` in (0, 1) with ``g_0(lam) = g_1(lam)``, by bisection."""
    _require_distinct(sys0, sys1)

    def h(lam):
        return bayes_g(sys0, lam, sys0, sys1) - bayes_g(sys1, lam, sys0, sys1)

    lo, hi = 0.0, 1.0
    if not (h(lo) > 0 > h(hi)):
        # the crossing needs the entropy gap to be dominated by the divergences
        raise NoCrossing(f"g_0 - g_1 does not change sign on [0, 1] (ends {h(lo):.3e}, {h(hi):.3e})")
    while True:
        mid = 0.5 * (lo + hi)
        hm = h(mid)
        if abs(hm) < LAMBDA_TOL or mid in (lo, hi):
            return mid
        if hm > 0:
            lo = mid
        else:
            hi = mid


@dataclass(frozen=True)
class BayesCurvePoint:
    lam: float
    E_lambda: float
    rate: float
    g0: float = math.nan
    g1: float = math.nan
    t0: float = math.nan
    t1: float = math.nan
    residual: float = 0.0


def bayes_E_lambda(sys0, sys1, lam: float, lam_s: float | None = None, warm=None) -> BayesCurvePoint:
    """Crossing ``I_0(0) = I_1(0)`` of the two rates for the statistic ``log J_lambda``.

    ``d/dE I_j(0) = t_j``, so the gap ``I_0 - I_1`` decreases with slope
    ``t_0 - t_1 < 0`` and Newton's method in ``E`` is safeguarded by the
    band ``[g_1, g_0]``.  ``warm`` is an optional ``(E, t0, t1)`` start.
    """
    lam_s = bayes_lambda_s(sys0, sys1) if lam_s is None else lam_s
    if not 0.0 <= lam < lam_s:
        raise LambdaOutOfRange(f"lambda={lam!r} must lie in [0, {lam_s!r})")
    c0 = bayes_curve(sys0, sys1, 0, lam)
    c1 = bayes_curve(sys0, sys1, 1, lam)
    g0 = bayes_g(sys0, lam, sys0, sys1)
    g1 = bayes_g(sys1, lam, sys0, sys1)
    lo, hi = g1, g0
    if warm is not None and lo < warm[0] < hi:
        E, t0, t1 = warm
    else:
        E, t0, t1 = 0.5 * (lo + hi), 0.0, 0.0
    best = None
    for _ in range(200):
        s0 = solve_tilt(c0, E, t0)
        s1 = solve_tilt(c1, E, t1)
        t0, t1 = s0.t, s1.t
        gap = s0.rate_at_zero - s1.rate_at_zero
        if best is None or abs(gap) < abs(best[1]):
            best = (E, gap, s0, s1)
        if abs(gap) < CROSSING_TOL * max(1.0, s0.rate_at_zero) or hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
            break
        if gap > 0:
            lo = E
        else:
            hi = E
        slope = t0 - t1
        En = E - gap / slope if slope < 0 else math.nan
        E = En if lo < En < hi else 0.5 * (lo + hi)
    else:
        raise NoConvergence(f"crossing not found at lambda={lam!r}")
    E, gap, s0, s1 = best
    return BayesCurvePoint(lam, E, s0.rate_at_zero, g0, g1, s0.t, s1.t, abs(gap))


def bayes_plan(sys0, sys1, lam: float = 0.0, loss_constants=None, priors=None) -> TestPlan:
    loss_constants, priors = _metadata(loss_constants, priors)
    _require_distinct(sys0, sys1)
    lam_s = bayes_lambda_s(sys0, sys1)
    pt = bayes_E_lambda(sys0, sys1, lam, lam_s)
    # the same exponent as a relative entropy of the tilted measure
    eq = bayes_curve(sys0, sys1, 0, lam).equilibrium(pt.t0).system
    kl = integrate(eq.log_jacobian(), eq) - integrate(sys0.log_jacobian(), eq)
    diag = {
        "lambda_s": lam_s,
        "band": [pt.g1, pt.g0],
        "crossing_residual": pt.residual,
        "relative_entropy": kl,
        "relative_entropy_residual": abs(kl - pt.rate),
    }
    return TestPlan(BAYES, pt.E_lambda, pt.t0, pt.t1, pt.rate, pt.rate, float(lam), loss_constants, priors, diag)


def chernoff_plan(sys0, sys1, loss_constants=None, priors=None) -> TestPlan:
    """Bayesian plan at ``lam = 0``, the best total-error exponent; the statistic averages ``log J0``."""
    return bayes_plan(sys0, sys1, 0.0, loss_constants, priors)


def bayes_lambda_grid(lam_s: float, points: int = 101) -> np.ndarray:
    """``points`` equally spaced values ``lam_s * k / points``, ``k = 0 .. points-1``."""
    return lam_s * np.arange(points) / points


def bayes_rate_sweep(sys0, sys1, lambdas=None, points: int = 101) -> list[BayesCurvePoint]:
    """``R(lam)`` and the band ``[g_1, g_0]`` with ``E_lam`` on a grid in ``[0, lam_s)``."""
    lam_s = bayes_lambda_s(sys0, sys1)
    lambdas = bayes_lambda_grid(lam_s, points) if lambdas is None else lambdas
    out = []
    warm = None
    for lam in lambdas:
        pt = bayes_E_lambda(sys0, sys1, float(lam), lam_s, warm)
        warm = (pt.E_lambda, pt.t0, pt.t1)
        out.append(pt)
    return out
