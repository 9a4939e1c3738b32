import json
import math

import numpy as np
import pytest

from gibbstest.errors import (
    DegenerateHypotheses,
    InputError,
    InvalidAlternative,
    LambdaOutOfRange,
    NoCrossing,
    SlopeOutOfRange,
)
from gibbstest.hypotests import (
    BAYES,
    MINMAX,
    NP,
    TestPlan,
    bayes_E_lambda,
    bayes_g,
    bayes_lambda_grid,
    bayes_lambda_s,
    bayes_plan,
    bayes_rate_sweep,
    case3_interval,
    chernoff_plan,
    kl_rate,
    minmax_plan,
    minmax_r,
    minmax_sweep,
    np_compare_alternative,
    np_plan,
)
from gibbstest.model import entropy, integrate, markov_system
from gibbstest.pressure import likelihood_curve
from gibbstest.rate import RateFunction

E_NP = 0.27908227035225197


def entropy_preserving_perturbation(sys, eps):
    """Move column 0 by ``eps`` and pick the column-1 move that restores the entropy."""
    target = entropy(sys)

    def build(delta):
        t = sys.trans.copy()
        t[:, 0] += [eps, -eps]
        t[:, 1] += [delta, -delta]
        return markov_system(t)

    lo, hi = -100 * eps, 100 * eps
    flo = entropy(build(lo)) - target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = entropy(build(mid)) - target
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return build(0.5 * (lo + hi))


def kl_four_terms(s0, s1):
    return sum(s0.stationary[a] * s0.trans[b, a] * math.log(s0.jacobian(a, b) / s1.jacobian(a, b))
               for a in range(2) for b in range(2))


@pytest.fixture(scope="module")
def sweep(sys0, sys1):
    return bayes_rate_sweep(sys0, sys1)


class TestNeymanPearson:
    def test_plan(self, sys0, sys1):
        plan = np_plan(sys0, sys1)
        assert plan.kind == NP
        assert plan.E == pytest.approx(kl_four_terms(sys0, sys1), abs=1e-15)
        assert plan.E > 0
        assert plan.t1 == 1.0 and plan.t0 == 0.0
        assert plan.exponent_type2 == plan.E

    def test_stein_identity(self, sys0, sys1):
        rf = RateFunction(likelihood_curve(sys0, sys1, 1), kl_rate(sys0, sys1), 1)
        assert rf(0.0) == pytest.approx(E_NP, abs=1e-9)

    def test_identical(self, sys0):
        with pytest.raises(DegenerateHypotheses):
            np_plan(sys0, sys0)

    def test_swapped_roles(self, sys0, sys1):
        swapped = np_plan(sys1, sys0).E
        assert swapped == pytest.approx(kl_four_terms(sys1, sys0), abs=1e-15)
        assert swapped > 0 and abs(swapped - E_NP) > 1e-3

    def test_alternative_worse(self, sys0, sys1):
        rng = np.random.default_rng(11)
        for G in rng.uniform(0, E_NP, 10):
            cmp = np_compare_alternative(sys0, sys1, float(G))
            assert cmp.exp_alt < cmp.exp_np
            assert cmp.G1 == pytest.approx(G - E_NP)

    def test_alternative_continuity(self, sys0, sys1):
        cmp = np_compare_alternative(sys0, sys1, E_NP - 1e-7)
        assert cmp.exp_alt == pytest.approx(cmp.exp_np, abs=1e-6)

    def test_alternative_near_zero(self, sys0, sys1):
        # a vanishing type-I exponent pushes the threshold to zero, the min-max point
        cmp = np_compare_alternative(sys0, sys1, 1e-9)
        assert cmp.exp_alt == pytest.approx(minmax_plan(sys0, sys1).exponent_type2, abs=1e-7)

    def test_alternative_monotone(self, sys0, sys1):
        vals = [np_compare_alternative(sys0, sys1, G).exp_alt for G in np.linspace(0.01, 0.27, 14)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("G", [0.0, -0.1, E_NP, 1.0])
    def test_alternative_range(self, sys0, sys1, G):
        with pytest.raises(InvalidAlternative):
            np_compare_alternative(sys0, sys1, G)


class TestMinMax:
    def test_plan(self, sys0, sys1):
        plan = minmax_plan(sys0, sys1)
        assert plan.kind == MINMAX and plan.E == 0.0
        curve = likelihood_curve(sys0, sys1, 1)
        assert abs(curve.derivative(plan.t1)) < 1e-10
        assert plan.exponent_type1 == plan.exponent_type2 == pytest.approx(-curve(plan.t1), abs=1e-15)
        assert plan.exponent_type1 > 0
        assert plan.t0 == pytest.approx(plan.t1 - 1, abs=1e-9)
        assert plan.diagnostics["case3_interval"] == pytest.approx(list(case3_interval(sys0, sys1)))

    def test_minimum_over_t(self, sys0, sys1):
        curve = likelihood_curve(sys0, sys1, 1)
        grid_min = min(curve(t) for t in np.linspace(0, 1, 1001))
        assert -grid_min == pytest.approx(minmax_plan(sys0, sys1).exponent_type1, abs=1e-7)

    def test_r_at_zero(self, sys0, sys1):
        plan = minmax_plan(sys0, sys1)
        r0, r1, rmax = minmax_r(sys0, sys1, 0.0)
        assert r0 == pytest.approx(r1, abs=1e-9)
        assert rmax == pytest.approx(plan.exponent_type1, abs=1e-9)

    def test_symmetric_pair(self, symmetric_pair):
        plan = minmax_plan(*symmetric_pair)
        assert plan.t1 == pytest.approx(0.5, abs=1e-10)

    def test_grid_argmin(self, sys0, sys1):
        lo, hi = case3_interval(sys0, sys1)
        grid = np.arange(lo, hi, 1e-2)
        rows = minmax_sweep(sys0, sys1, grid)
        best = grid[int(np.argmin([r[3] for r in rows]))]
        assert abs(best) <= 1e-2

    def test_outside_case3(self, sys0, sys1):
        lo, hi = case3_interval(sys0, sys1)
        with pytest.raises(SlopeOutOfRange):
            minmax_r(sys0, sys1, hi + 0.01)
        with pytest.raises(SlopeOutOfRange):
            minmax_sweep(sys0, sys1, [lo - 0.01])


class TestBayes:
    def test_g_ordering(self, sys0, sys1):
        assert bayes_g(sys0, 0.0, sys0, sys1) > bayes_g(sys1, 0.0, sys0, sys1)
        assert bayes_g(sys0, 1.0, sys0, sys1) < bayes_g(sys1, 1.0, sys0, sys1)
        assert bayes_g(sys0, 0.0, sys0, sys1) == pytest.approx(integrate(sys0.log_jacobian(), sys0))

    def test_g_identical(self, sys0):
        for lam in (0.0, 0.4, 1.0):
            assert bayes_g(sys0, lam, sys0, sys0) == bayes_g(sys0, lam, sys0, sys0)

    def test_g_monotone(self, sys0, sys1):
        lams = np.linspace(0, 1, 51)
        g0 = [bayes_g(sys0, lam, sys0, sys1) for lam in lams]
        g1 = [bayes_g(sys1, lam, sys0, sys1) for lam in lams]
        assert np.all(np.diff(g0) < 0) and np.all(np.diff(g1) > 0)

    def test_g_range(self, sys0, sys1):
        with pytest.raises(LambdaOutOfRange):
            bayes_g(sys0, 1.5, sys0, sys1)

    def test_lambda_s(self, sys0, sys1):
        lam = bayes_lambda_s(sys0, sys1)
        assert 0 < lam < 1
        assert abs(bayes_g(sys0, lam, sys0, sys1) - bayes_g(sys1, lam, sys0, sys1)) < 1e-12
        assert lam == pytest.approx(0.32805388512133504, abs=1e-12)

    def test_lambda_s_symmetric(self, symmetric_pair):
        assert bayes_lambda_s(*symmetric_pair) == pytest.approx(0.5, abs=1e-12)

    def test_lambda_s_nearly_identical(self, sys0):
        # the crossing exists when entropy is kept fixed to second order
        eps = 1e-6
        near = entropy_preserving_perturbation(sys0, eps)
        assert abs(entropy(near) - entropy(sys0)) < 1e-15
        lam = bayes_lambda_s(sys0, near)
        assert 0.2 < lam < 0.8
        assert abs(bayes_g(sys0, lam, sys0, near) - bayes_g(near, lam, sys0, near)) < 1e-12
        # the same answer comes back under a tenfold smaller perturbation
        assert bayes_lambda_s(sys0, entropy_preserving_perturbation(sys0, eps / 10)) == pytest.approx(lam, abs=0.05)

    def test_generic_perturbation_has_no_crossing(self, sys0):
        # first-order entropy change beats the second-order divergences
        j = sys0.trans.copy()
        j[:, 0] += [1e-6, -1e-6]
        with pytest.raises(NoCrossing):
            bayes_lambda_s(sys0, markov_system(j))

    def test_crossing(self, sys0, sys1):
        pt = bayes_E_lambda(sys0, sys1, 0.1)
        assert pt.g1 <= pt.E_lambda <= pt.g0
        assert pt.residual < 1e-8
        assert pt.rate > 0

    def test_lambda_range(self, sys0, sys1):
        lam_s = bayes_lambda_s(sys0, sys1)
        with pytest.raises(LambdaOutOfRange):
            bayes_E_lambda(sys0, sys1, lam_s)
        with pytest.raises(LambdaOutOfRange):
            bayes_E_lambda(sys0, sys1, -0.1)

    def test_sweep(self, sweep, sys0, sys1):
        assert len(sweep) == 101
        assert sweep[0].lam == 0.0
        rates = [p.rate for p in sweep]
        assert all(b <= a for a, b in zip(rates, rates[1:]))
        assert rates[-1] < 1e-3
        assert max(p.residual for p in sweep) < 1e-8
        np.testing.assert_allclose([p.lam for p in sweep], bayes_lambda_grid(bayes_lambda_s(sys0, sys1)))

    def test_chernoff_point(self, sys0, sys1):
        plan = chernoff_plan(sys0, sys1)
        assert plan.kind == BAYES and plan.lam == 0.0
        assert plan.exponent_type1 == plan.exponent_type2 > 0
        c0 = likelihood_curve(sys0, sys1, 0)
        # at lam = 0 both slopes meet E_0
        from gibbstest.pressure import bayes_curve
        assert bayes_curve(sys0, sys1, 0, 0.0).derivative(plan.t0) == pytest.approx(plan.E, abs=1e-10)
        assert bayes_curve(sys0, sys1, 1, 0.0).derivative(plan.t1) == pytest.approx(plan.E, abs=1e-10)
        assert c0.c_plus > 0

    def test_relative_entropy_form(self, sys0, sys1):
        plan = chernoff_plan(sys0, sys1)
        assert plan.diagnostics["relative_entropy"] == pytest.approx(plan.exponent_type1, abs=1e-8)

    def test_chernoff_beats_other_lambdas(self, sys0, sys1, sweep):
        plan = chernoff_plan(sys0, sys1)
        assert all(plan.exponent_type1 >= p.rate - 1e-12 for p in sweep)

    def test_general_lambda_plan(self, sys0, sys1):
        plan = bayes_plan(sys0, sys1, 0.2)
        assert plan.lam == 0.2
        assert plan.diagnostics["crossing_residual"] < 1e-8


class TestMetadata:
    @pytest.mark.parametrize("builder", [minmax_plan, chernoff_plan, np_plan])
    def test_priors_and_losses_do_not_matter(self, sys0, sys1, builder):
        base = builder(sys0, sys1).core()
        for priors in ((0.1, 0.9), (0.5, 0.5), (0.9, 0.1)):
            for losses in ((1.0, 1.0), (3.0, 0.2)):
                plan = builder(sys0, sys1, loss_constants=losses, priors=priors)
                assert plan.core() == base
                assert plan.priors == priors

    def test_bad_priors(self, sys0, sys1):
        with pytest.raises(InputError):
            minmax_plan(sys0, sys1, priors=(0.3, 0.3))
        with pytest.raises(InputError):
            minmax_plan(sys0, sys1, loss_constants=(0.0, 1.0))

    def test_json_round_trip(self, sys0, sys1):
        for plan in (np_plan(sys0, sys1), minmax_plan(sys0, sys1, priors=(0.2, 0.8)), chernoff_plan(sys0, sys1)):
            text = plan.to_json()
            again = TestPlan.from_json(text)
            assert again.to_json() == text
            assert json.loads(text)["kind"] == plan.kind

    def test_statistic(self, sys0, sys1, K):
        assert np_plan(sys0, sys1).statistic(sys0, sys1).allclose(K)
        assert chernoff_plan(sys0, sys1).statistic(sys0, sys1).allclose(sys0.log_jacobian())
