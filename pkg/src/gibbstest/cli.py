"""Command-line front end.

Exit status: 0 success, 2 bad input or configuration, 3 numerical failure,
4 enumeration too large.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import hypotests, sim
from .errors import GibbsTestError, InputError, NumericError, TooLarge
from .maxplus import c_bounds, calibrated_subaction, max_cycle_mean
from .model import load_system, log_likelihood_ratio
from .pressure import likelihood_curve
from .rate import RateFunction

EXIT_CONFIG, EXIT_NUMERIC, EXIT_TOO_LARGE = 2, 3, 4


def parse_grid(text: str) -> np.ndarray:
    """``a:b:step``, both ends included."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"--grid: expected a:b:step, got {text!r}") from None
    if not (step > 0 and b >= a and all(map(math.isfinite, (a, b, step)))):
        raise InputError(f"--grid: empty grid {text!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    # rounding keeps grid points such as 0 and 1 exact
    return np.round(a + step * np.arange(count), 12)


def parse_n(text: str) -> list[int]:
    """``8..18`` or ``25,50,100``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            ns = list(range(lo, hi + 1))
        else:
            ns = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--n: cannot parse {text!r}") from None
    if not ns or min(ns) < 1:
        raise InputError(f"--n: need positive sample sizes, got {text!r}")
    return ns


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _table(header: list[str], rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, map(float, r))) for r in rows], indent=2) + "\n"
    return "\n".join([",".join(header)] + [",".join(_fmt(x) for x in r) for r in rows]) + "\n"


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _systems(args):
    if not args.sys0 or not args.sys1:
        raise InputError("--sys0 and --sys1 are both required")
    s0 = load_system(args.sys0, args.orientation)
    s1 = load_system(args.sys1, args.orientation)
    if s0.d != s1.d:
        raise InputError(f"--sys1: alphabet size {s1.d} differs from --sys0 ({s0.d})")
    return s0, s1


PLANS = {"np": hypotests.np_plan, "minmax": hypotests.minmax_plan, "chernoff": hypotests.chernoff_plan}


def cmd_pressure(args):
    s0, s1 = _systems(args)
    grid = parse_grid(args.grid or "-3:3:0.1")
    c0, c1 = likelihood_curve(s0, s1, 0), likelihood_curve(s0, s1, 1)
    rows = []
    for t in grid:
        p0, p1 = c0.evaluate(float(t)), c1.evaluate(float(t))
        rows.append((t, p0.value, p1.value, p0.slope, p1.slope))
    _write(_table(["t", "P0", "P1", "P0'", "P1'"], rows, args.format), args.out)


def cmd_rate(args):
    s0, s1 = _systems(args)
    if args.E is None:
        raise InputError("--E is required for rate")
    grid = parse_grid(args.grid or "-1:1:0.05")
    r0 = RateFunction(likelihood_curve(s0, s1, 0), args.E, 0)
    r1 = RateFunction(likelihood_curve(s0, s1, 1), args.E, 1)
    rows = [(x, r0(float(x)), r1(float(x))) for x in grid]
    _write(_table(["x", "rate0", "rate1"], rows, args.format), args.out)


def cmd_test(args):
    s0, s1 = _systems(args)
    kind = args.kind
    if kind == "np":
        plan = hypotests.np_plan(s0, s1)
    elif kind == "minmax":
        plan = hypotests.minmax_plan(s0, s1)
    else:
        plan = hypotests.bayes_plan(s0, s1, args.lam)
    _write(plan.to_json(), args.out)
    if kind == "bayes":
        sweep = hypotests.bayes_rate_sweep(s0, s1, points=args.points)
        stem = Path(args.out).with_suffix("") if args.out else Path("bayes")
        rl = [(p.lam, p.E_lambda, p.rate) for p in sweep]
        band = [(p.lam, p.g0, p.g1, p.E_lambda) for p in sweep]
        _write(_table(["lambda", "E_lambda", "rate"], rl, "csv"), f"{stem}_rlambda.csv")
        _write(_table(["lambda", "g0", "g1", "E_lambda"], band, "csv"), f"{stem}_band.csv")


def cmd_sweep(args):
    s0, s1 = _systems(args)
    lo, hi = hypotests.case3_interval(s0, s1)
    grid = parse_grid(args.grid) if args.grid else np.linspace(lo, hi, 101)
    rows = hypotests.minmax_sweep(s0, s1, grid)
    _write(_table(["E", "rate0", "rate1", "rmax"], rows, args.format), args.out)


def cmd_maxplus(args):
    s0, s1 = _systems(args)
    k = log_likelihood_ratio(s0, s1)
    plus, minus = max_cycle_mean(k), max_cycle_mean(-k)
    c_minus, c_plus = c_bounds(k)
    u, v = calibrated_subaction(k), calibrated_subaction(-k)
    doc = {
        "m_K": plus.value,
        "m_minus_K": minus.value,
        "c_minus": c_minus,
        "c_plus": c_plus,
        "witness_K": [a + 1 for a in plus.witness_cycle],
        "witness_minus_K": [a + 1 for a in minus.witness_cycle],
        "subaction_K": u.u.tolist(),
        "subaction_minus_K": v.u.tolist(),
        "residual_K": u.residual,
        "residual_minus_K": v.residual,
    }
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = "".join(f"{key}: {val}\n" for key, val in doc.items())
    _write(text, args.out)


def _report_text(report, fmt):
    return report.to_json() if fmt == "json" else report.to_csv()


def _plan(args, s0, s1):
    if args.plan not in PLANS:
        raise InputError(f"--plan must be one of {sorted(PLANS)}")
    return PLANS[args.plan](s0, s1)


def cmd_simulate(args):
    s0, s1 = _systems(args)
    if args.seed is None:
        raise InputError("--seed is required for simulate")
    cfg = sim.SimConfig(tuple(parse_n(args.n or "25,50,100")), args.replicas, args.seed,
                        args.threshold, args.alpha, args.workers)
    report = sim.mc_error_probs(s0, s1, _plan(args, s0, s1), cfg)
    _write(_report_text(report, args.format), args.out)


def cmd_oracle(args):
    s0, s1 = _systems(args)
    plan = _plan(args, s0, s1)
    ns = parse_n(args.n or "8..18")
    v = plan.statistic(s0, s1)
    if args.threshold == "np_quantile":
        u = lambda n: sim.np_quantile_u_n(s0, s1, args.alpha, n, sim.EXACT, statistic=v)  # noqa: E731
    else:
        u = plan.E
    report = sim.exact_report(s0, s1, ns, u, v)
    _write(_report_text(report, args.format), args.out)
    print(f"fitted slopes: type1 {report.fit_type1.slope:.6g}, type2 {report.fit_type2.slope:.6g}; "
          f"predicted: type1 {plan.exponent_type1:.6g}, type2 {plan.exponent_type2:.6g}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sys0", help="system definition (JSON) for the null hypothesis")
    common.add_argument("--sys1", help="system definition (JSON) for the alternative")
    common.add_argument("--orientation", choices=["column", "row"], default=None,
                        help="matrix orientation when the file does not say (default column)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    p = argparse.ArgumentParser(prog="gibbstest", description="Error exponents for tests between two Markov measures.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pressure", parents=[common], help="sample P0, P1 and their derivatives")
    sp.add_argument("--grid", help="t grid a:b:step (default -3:3:0.1)")
    sp.set_defaults(func=cmd_pressure)

    sp = sub.add_parser("rate", parents=[common], help="sample the rate functions I0, I1")
    sp.add_argument("--E", type=float, help="threshold limit")
    sp.add_argument("--grid", help="x grid a:b:step (default -1:1:0.05)")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("test", parents=[common], help="plan a test and write it as JSON")
    sp.add_argument("kind", choices=["np", "minmax", "bayes"])
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0, help="mixing weight for bayes (default 0)")
    sp.add_argument("--points", type=int, default=101, help="lambda grid size for the bayes sweeps")
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("sweep", parents=[common], help="min-max rates over thresholds E")
    sp.add_argument("--grid", help="E grid a:b:step (default: 101 points across the decaying range)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("maxplus", parents=[common], help="cycle means, bounds and subactions")
    sp.set_defaults(func=cmd_maxplus, format="text")

    for name, func, default_n in (("simulate", cmd_simulate, "25,50,100"), ("oracle", cmd_oracle, "8..18")):
        sp = sub.add_parser(name, parents=[common], help=f"{'Monte Carlo' if name == 'simulate' else 'exact'} error probabilities")
        sp.add_argument("--plan", default="minmax", help="np, minmax or chernoff")
        sp.add_argument("--n", help=f"sample sizes, list or a..b (default {default_n})")
        sp.add_argument("--threshold", choices=["constant", "np_quantile"], default="constant")
        sp.add_argument("--alpha", type=float, default=0.05)
        if name == "simulate":
            sp.add_argument("--replicas", type=int, default=100_000)
            sp.add_argument("--seed", type=int, help="unsigned 64-bit seed (required)")
            sp.add_argument("--workers", type=int, default=1)
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except TooLarge as exc:
        print(f"gibbstest: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (InputError, OSError) as exc:
        print(f"gibbstest: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, GibbsTestError) as exc:
        print(f"gibbstest: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
