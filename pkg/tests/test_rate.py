import math

import numpy as np
import pytest

from gibbstest.errors import NoConvergence, SlopeOutOfRange
from gibbstest.model import integrate
from gibbstest.pressure import likelihood_curve
from gibbstest.rate import (
    BOUNDARY,
    DEGENERATE,
    INFINITE,
    INTERIOR,
    OUTSIDE,
    RateFunction,
    degenerate_limits,
    rate_identities_check,
    rate_value,
    safeguarded_newton,
    solve_tilt,
)


@pytest.fixture(scope="module")
def means(sys0, sys1, K):
    return integrate(K, sys1), integrate(K, sys0)


@pytest.fixture(scope="module")
def curve1(sys0, sys1):
    return likelihood_curve(sys0, sys1, 1)


class TestNewton:
    def test_cubic(self):
        x, res, _, _ = safeguarded_newton(lambda x: (x ** 3 + x, 3 * x * x + 1, None), 10.0)
        assert x == pytest.approx(2.0, abs=1e-12)

    def test_flat_start_uses_doubling(self):
        # tanh is nearly flat far out, so raw Newton steps would overshoot
        f = lambda x: (math.tanh(x - 40), 1 - math.tanh(x - 40) ** 2, None)  # noqa: E731
        x, res, _, _ = safeguarded_newton(f, 0.5, xmax=1e4)
        assert abs(res) < 1e-10 and x == pytest.approx(40 + math.atanh(0.5), abs=1e-9)

    def test_unreachable(self):
        with pytest.raises(NoConvergence):
            safeguarded_newton(lambda x: (math.tanh(x), 1 - math.tanh(x) ** 2, None), 2.0, xmax=100)


class TestTilt:
    def test_mean_gives_zero(self, curve1, means):
        sol = solve_tilt(curve1, means[0])
        assert abs(sol.t) < 1e-12 and abs(sol.rate_at_zero) < 1e-14

    def test_np_threshold(self, sys0, sys1, means):
        e = means[1]
        s1 = solve_tilt(likelihood_curve(sys0, sys1, 1), e)
        s0 = solve_tilt(likelihood_curve(sys0, sys1, 0), e)
        assert s1.t == pytest.approx(1.0, abs=1e-10)
        assert s0.t == pytest.approx(0.0, abs=1e-10)

    def test_invariants(self, curve1):
        for E in (-0.9, -0.2, 0.0, 0.4, 0.85):
            sol = solve_tilt(curve1, E)
            assert abs(curve1.derivative(sol.t) - E) < 1e-10
            assert abs(sol.rate_at_zero - (sol.t * E - sol.pressure_at_t)) < 1e-12

    def test_outside_range(self, curve1):
        with pytest.raises(SlopeOutOfRange):
            solve_tilt(curve1, 0.9)
        with pytest.raises(SlopeOutOfRange):
            solve_tilt(curve1, curve1.c_minus)


class TestRateFunction:
    def test_zero_at_v(self, curve1):
        for E in (-0.5, 0.0, 0.3):
            rf = RateFunction(curve1, E, 1)
            assert abs(rf(rf.v)) < 1e-10

    def test_zero_is_rate_at_zero(self, curve1):
        rf = RateFunction(curve1, 0.1, 1)
        assert rate_value(rf, 0.0) == pytest.approx(solve_tilt(curve1, 0.1).rate_at_zero, abs=1e-15)

    def test_outside_is_infinite(self, curve1):
        rf = RateFunction(curve1, 0.0, 1)
        p = rf.evaluate(1.0)
        assert p.value == INFINITE and p.status == OUTSIDE
        assert rf(-1.0) == math.inf

    def test_boundary_value(self, curve1):
        rf = RateFunction(curve1, 0.0, 1)
        p = rf.evaluate(curve1.c_plus)
        assert p.status == BOUNDARY
        # on the critical 2-cycle J1 has product (1/5)(1/3)
        assert p.value == pytest.approx(0.5 * math.log(15), abs=1e-12)
        near = rf(curve1.c_plus - 1e-7)
        assert near == pytest.approx(p.value, abs=1e-4)

    def test_lower_boundary_value(self, curve1):
        rf = RateFunction(curve1, 0.0, 1)
        p = rf.evaluate(curve1.c_minus)
        assert p.status == BOUNDARY
        assert p.value == pytest.approx(-math.log(2 / 3), abs=1e-12)
        assert rf(curve1.c_minus + 1e-7) == pytest.approx(p.value, abs=1e-4)

    def test_degenerate_pair(self, sys0):
        curve = likelihood_curve(sys0, sys0, 1)
        rf = RateFunction(curve, 0.3, 1)
        assert rf.evaluate(-0.3).status == DEGENERATE
        assert rf(-0.3) == 0.0
        assert rf(0.0) == INFINITE

    def test_nonnegative_convex(self, curve1):
        rf = RateFunction(curve1, 0.0, 1)
        xs = np.linspace(-0.95, 0.85, 61)
        vals = np.array([rf(x) for x in xs])
        assert np.all(vals >= -1e-14)
        assert np.all(vals[:-2] - 2 * vals[1:-1] + vals[2:] >= -1e-10)

    def test_legendre_lower_bounds(self, curve1):
        rf = RateFunction(curve1, 0.1, 1)
        ts = np.linspace(-4, 4, 33)
        ps = np.array([curve1(t) for t in ts])
        for x in (-0.8, -0.3, 0.0, 0.5):
            point = rf.evaluate(x)
            assert np.all(point.value >= ts * (x + 0.1) - ps - 1e-12)
            assert point.value == pytest.approx(point.t * (x + 0.1) - curve1(point.t), abs=1e-12)

    def test_against_grid_maximisation(self, curve1):
        rf = RateFunction(curve1, 0.0, 1)
        ts = np.arange(-30000, 30001) / 1000
        ps = np.array([curve1(t) for t in ts[::10]])
        # coarse grid first, refined around the maximiser at step 1e-3
        for x in (-0.6, 0.0, 0.5):
            i = int(np.argmax(ts[::10] * x - ps))
            fine = ts[max(0, 10 * i - 20):10 * i + 21]
            best = max(t * x - curve1(t) for t in fine)
            assert rf(x) == pytest.approx(best, abs=1e-5)


class TestIdentities:
    def test_grid(self, sys0, sys1, means):
        for E in np.linspace(*means, 9):
            rep = rate_identities_check(sys0, sys1, float(E))
            assert max(rep.residuals.values()) < 1e-9

    def test_zero(self, sys0, sys1):
        rep = rate_identities_check(sys0, sys1, 0.0)
        assert rep.rate0 == pytest.approx(rep.rate1, abs=1e-9)

    def test_np_end(self, sys0, sys1, means):
        rep = rate_identities_check(sys0, sys1, means[1])
        assert rep.rate1 == pytest.approx(means[1], abs=1e-9)
        assert rep.rate0 == pytest.approx(0.0, abs=1e-9)

    def test_other_end(self, sys0, sys1, means):
        rep = rate_identities_check(sys0, sys1, means[0])
        assert rep.rate1 == pytest.approx(0.0, abs=1e-9)
        assert rep.rate0 == pytest.approx(-means[0], abs=1e-9)
        assert rep.rate0 > 0

    def test_monotone_in_E(self, sys0, sys1, means):
        reps = [rate_identities_check(sys0, sys1, float(E)) for E in np.linspace(*means, 15)]
        r1 = [r.rate1 for r in reps]
        r0 = [r.rate0 for r in reps]
        assert all(b >= a - 1e-12 for a, b in zip(r1, r1[1:]))
        assert all(b <= a + 1e-12 for a, b in zip(r0, r0[1:]))


class TestDegenerateLimits:
    def test_below(self, sys0, sys1, means):
        lim = degenerate_limits(sys0, sys1, means[0] - 0.2)
        assert lim.type2_limit and lim.inf_rate1_right == 0.0
        assert lim.inf_rate0_left > 0

    def test_above(self, sys0, sys1, means):
        lim = degenerate_limits(sys0, sys1, means[1] + 0.2)
        assert lim.type1_limit and lim.inf_rate0_left == 0.0
        assert lim.inf_rate1_right > 0

    def test_inside(self, sys0, sys1):
        lim = degenerate_limits(sys0, sys1, 0.0)
        assert not lim.type1_limit and not lim.type2_limit
        assert lim.inf_rate0_left > 0 and lim.inf_rate1_right > 0

    def test_half_line_infimum_by_sampling(self, sys0, sys1, means):
        E = means[0] - 0.2
        rf = RateFunction(likelihood_curve(sys0, sys1, 1), E, 1)
        sampled = min(rf(x) for x in np.linspace(0, 1.0, 201))
        assert sampled == pytest.approx(degenerate_limits(sys0, sys1, E).inf_rate1_right, abs=1e-6)
        assert rf.evaluate(0.5).status == INTERIOR
