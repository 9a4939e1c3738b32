"""Finite-n error probabilities: exact enumeration and Monte Carlo.

Error events follow the decision rule of :mod:`gibbstest.hypotests`:
type-I is ``mu_0(S_n < u)`` and type-II is ``mu_1(S_n >= u)``, with
``S_n`` the left-to-right sum of the statistic over the ``n`` pairs of a
word of length ``n + 1``, divided by ``n``.

An ``S_n`` within ``tie_tolerance`` of ``u`` counts as equal to it.  Word
classes whose exact statistic equals the threshold otherwise land on either
side depending on rounding in the summation order.

Random streams are counter based.  Replica ``r`` of hypothesis ``j`` draws
from a SplitMix64 sequence keyed by ``(seed, j, r)``, so results do not
depend on chunking or on the number of worker threads.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import AllZeroCounts, InputError, TooLarge
from .model import MarkovSystem, TwoCylinderPotential, log_likelihood_ratio

MASK64 = (1 << 64) - 1
MIN_CI_REPLICAS = 100
ENUMERATION_CAP = 1 << 23
Z95 = 1.959963984540054
EXACT = "EXACT"
MC = "MC"
CSV_HEADER = "n,p1,p1_lo,p1_hi,p2,p2_lo,p2_hi,method"
TIE_RTOL = 1e-12


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_base(seed: int, stream: int) -> int:
    """Key of an independent family of replica streams."""
    return mix64((seed & MASK64) ^ mix64(stream + 0x632BE59BD9B4E019))


def _sampling_tables(sys: MarkovSystem):
    cdf0 = np.ascontiguousarray(np.cumsum(sys.stationary))
    cdft = np.ascontiguousarray(np.cumsum(sys.trans, axis=0).T)
    return cdf0, cdft


def sample_path(sys: MarkovSystem, length: int, seed: int = 0, stream: int = 0, replica: int = 0) -> np.ndarray:
    """Word of ``length`` symbols: ``X_0`` stationary, then the chain.

    The same ``(seed, stream, replica)`` reproduces the path used by
    :func:`mc_error_probs` for that replica.
    """
    if length < 2:
        raise InputError("length must be at least 2")
    cdf0, cdft = _sampling_tables(sys)
    return kernels.walk(cdf0, cdft, int(length), stream_base(seed, stream), int(replica))


# -- exact ------------------------------------------------------------------


def _statistic(sys0, sys1, statistic):
    if statistic is None:
        statistic = log_likelihood_ratio(sys0, sys1)
    v = statistic.values if isinstance(statistic, TwoCylinderPotential) else statistic
    return np.ascontiguousarray(v, dtype=float)


def tie_tolerance(v) -> float:
    """Band around the threshold inside which ``S_n`` is treated as equal to it."""
    return TIE_RTOL * max(1.0, float(np.max(np.abs(v))))


def error_events(s, u, tol):
    """Boolean masks ``(type-I, type-II)``: ``S_n < u`` and ``S_n >= u`` up to ties."""
    below = s < u - tol
    return below, ~below


def enumerate_statistic(sys0: MarkovSystem, sys1: MarkovSystem, n: int, statistic=None):
    """``(S_n, mu_0 word mass, mu_1 word mass)`` for every word of length ``n + 1``.

    Raises
    ------
    TooLarge
        If ``d ** (n + 1)`` exceeds ``ENUMERATION_CAP``.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    words = sys0.d ** (n + 1)
    if words > ENUMERATION_CAP:
        raise TooLarge(f"{words} words for n={n} exceeds the enumeration cap {ENUMERATION_CAP}")
    v = _statistic(sys0, sys1, statistic)
    sums, p0, p1 = kernels.enumerate_words(
        np.ascontiguousarray(sys0.stationary), np.ascontiguousarray(sys0.trans),
        np.ascontiguousarray(sys1.stationary), np.ascontiguousarray(sys1.trans), v, int(n))
    return sums / n, p0, p1


@dataclass(frozen=True)
class ErrorProbs:
    n: int
    u: float
    p_type1: float
    p_type2: float


def exact_error_probs(sys0, sys1, u: float, n: int, statistic=None) -> ErrorProbs:
    v = _statistic(sys0, sys1, statistic)
    s, p0, p1 = enumerate_statistic(sys0, sys1, n, v)
    e1, e2 = error_events(s, u, tie_tolerance(v))
    return ErrorProbs(n, float(u), float(np.sum(p0[e1])), float(np.sum(p1[e2])))


# -- intervals and fits -----------------------------------------------------


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval; ``k = 0`` gives the rule-of-three bound ``[0, 3/n]``."""
    if n <= 0:
        raise InputError("interval needs at least one trial")
    if k == 0:
        return 0.0, min(1.0, 3.0 / n)
    p = k / n
    z2 = z * z
    centre = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class ExponentFit:
    """Slope of ``-log p`` against ``n``; ``nan`` with ``ok=False`` if under two usable rows."""

    slope: float
    stderr: float
    intercept: float
    points: int
    ok: bool


def fit_exponent(ns, ps, counts=None, replicas=None) -> ExponentFit:
    """Least-squares slope of ``-log p`` on ``n``.

    With ``counts``/``replicas`` (Monte Carlo) each row is weighted by the
    inverse variance of ``log p``, about ``N p / (1 - p)``; rows with a zero
    count are dropped.  Without them (exact values) the fit is unweighted.
    """
    ns = np.asarray(ns, dtype=float)
    ps = np.asarray(ps, dtype=float)
    keep = ps > 0
    if counts is not None:
        keep &= np.asarray(counts) > 0
    if keep.sum() < 2:
        return ExponentFit(math.nan, math.nan, math.nan, int(keep.sum()), False)
    x, y = ns[keep], -np.log(ps[keep])
    if replicas is None:
        w = np.ones_like(x)
    else:
        p = ps[keep]
        w = replicas * p / np.maximum(1.0 - p, 1.0 / replicas)
    sw = w.sum()
    xm, ym = (w * x).sum() / sw, (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    if x.size > 2:
        resid = y - intercept - slope * x
        sigma2 = (w * resid ** 2).sum() / (x.size - 2)
        stderr = math.sqrt(sigma2 / sxx)
    elif replicas is not None:
        stderr = math.sqrt(1.0 / sxx)
    else:
        stderr = 0.0
    return ExponentFit(float(slope), float(stderr), float(intercept), int(x.size), True)


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class SimRow:
    n: int
    u: float
    p1: float
    p1_lo: float
    p1_hi: float
    p2: float
    p2_lo: float
    p2_hi: float
    method: str
    count1: int | None = None
    count2: int | None = None

    @property
    def flags(self) -> list[str]:
        out = []
        if self.count1 == 0:
            out.append("zero_type1")
        if self.count2 == 0:
            out.append("zero_type2")
        return out


@dataclass(frozen=True)
class SimReport:
    method: str
    rows: list[SimRow]
    fit_type1: ExponentFit
    fit_type2: ExponentFit
    replicas: int | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([str(r.n)] + [repr(float(x)) for x in (r.p1, r.p1_lo, r.p1_hi, r.p2, r.p2_lo, r.p2_hi)] + [r.method]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        d = asdict(self)
        for row, r in zip(d["rows"], self.rows):
            row["flags"] = r.flags
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    def require_fit(self, kind: int) -> ExponentFit:
        fit = self.fit_type1 if kind == 1 else self.fit_type2
        if not fit.ok:
            raise AllZeroCounts(f"type-{kind} exponent: fewer than two rows with nonzero error counts")
        return fit


def exact_report(sys0, sys1, n_values, u, statistic=None) -> SimReport:
    """Exact rows for each ``n``; ``u`` is a number or a callable ``n -> u_n``."""
    rows = []
    for n in sorted(n_values):
        un = u(n) if callable(u) else u
        e = exact_error_probs(sys0, sys1, un, n, statistic)
        rows.append(SimRow(n, float(un), e.p_type1, e.p_type1, e.p_type1, e.p_type2, e.p_type2, e.p_type2, EXACT))
    ns = [r.n for r in rows]
    return SimReport(EXACT, rows, fit_exponent(ns, [r.p1 for r in rows]), fit_exponent(ns, [r.p2 for r in rows]))


# -- Monte Carlo ------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    """Replica count, seed and threshold policy for :func:`mc_error_probs`.

    ``threshold_policy`` is ``"constant"`` (``u_n = plan.E``) or
    ``"np_quantile"`` (``u_n`` the exact ``alpha``-quantile of ``S_n`` under
    ``mu_0`` when enumerable, the Monte Carlo one otherwise).
    """

    n_values: tuple[int, ...]
    replicas: int
    seed: int
    threshold_policy: str = "constant"
    alpha: float = 0.05
    workers: int = 1
    chunk: int = 1 << 16

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if not ns or min(ns) < 1:
            raise InputError("n_values must be a non-empty list of positive integers")
        object.__setattr__(self, "n_values", tuple(sorted(set(ns))))
        if self.replicas < 1:
            raise InputError("replicas must be at least 1")
        if self.replicas < MIN_CI_REPLICAS:
            warnings.warn(f"{self.replicas} replicas: confidence intervals are unreliable below {MIN_CI_REPLICAS}",
                          stacklevel=3)
        if not 0 <= self.seed <= MASK64:
            raise InputError("seed must be an unsigned 64-bit integer")
        if self.threshold_policy not in ("constant", "np_quantile"):
            raise InputError(f"unknown threshold policy {self.threshold_policy!r}")
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        if self.workers < 1 or self.chunk < 1:
            raise InputError("workers and chunk must be positive")


def simulate_statistic(sys: MarkovSystem, v: np.ndarray, n_values, replicas: int, seed: int, stream: int,
                       workers: int = 1, chunk: int = 1 << 16, reduce=None):
    """Run ``replicas`` paths and return ``S_n`` for every replica and ``n``.

    With ``reduce`` given, each chunk's ``(replicas x len(n_values))`` block
    of ``S_n`` is passed to it and the list of its results is returned in
    chunk order instead, so memory stays bounded.
    """
    cdf0, cdft = _sampling_tables(sys)
    checkpoints = np.asarray(sorted(n_values), dtype=np.int_)
    base = stream_base(seed, stream)
    v = np.ascontiguousarray(v, dtype=float)
    starts = list(range(0, replicas, chunk))

    def run(start):
        count = min(chunk, replicas - start)
        out = np.empty((count, checkpoints.size))
        kernels.simulate_sums(v, cdf0, cdft, checkpoints, base, start, out)
        s = out / checkpoints[None, :]
        return reduce(s) if reduce is not None else s

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return parts if reduce is not None else np.vstack(parts)


def _count(s, u, tol, kind):
    return error_events(s, u[None, :], tol)[kind - 1].sum(axis=0)


def mc_error_probs(sys0, sys1, plan, cfg: SimConfig) -> SimReport:
    """Monte Carlo error frequencies for ``plan`` at every ``n`` of ``cfg``."""
    v = plan.statistic(sys0, sys1).values
    ns = list(cfg.n_values)
    if cfg.threshold_policy == "constant":
        u = np.full(len(ns), float(plan.E))
    else:
        u = np.array([np_quantile_u_n(sys0, sys1, cfg.alpha, n, EXACT if sys0.d ** (n + 1) <= ENUMERATION_CAP else MC,
                                      replicas=cfg.replicas, seed=cfg.seed, statistic=v) for n in ns])
    tol = tie_tolerance(v)
    k1 = sum(simulate_statistic(sys0, v, ns, cfg.replicas, cfg.seed, 0, cfg.workers, cfg.chunk,
                                lambda s: _count(s, u, tol, 1)))
    k2 = sum(simulate_statistic(sys1, v, ns, cfg.replicas, cfg.seed, 1, cfg.workers, cfg.chunk,
                                lambda s: _count(s, u, tol, 2)))
    N = cfg.replicas
    rows = []
    for i, n in enumerate(ns):
        a, b = int(k1[i]), int(k2[i])
        rows.append(SimRow(n, float(u[i]), a / N, *wilson_interval(a, N), b / N, *wilson_interval(b, N), MC, a, b))
    fit1 = fit_exponent(ns, [r.p1 for r in rows], [r.count1 for r in rows], N)
    fit2 = fit_exponent(ns, [r.p2 for r in rows], [r.count2 for r in rows], N)
    meta = {"plan": plan.kind, "threshold_policy": cfg.threshold_policy, "backend": kernels.BACKEND}
    if cfg.threshold_policy == "np_quantile":
        meta["alpha"] = cfg.alpha
    return SimReport(MC, rows, fit1, fit2, N, cfg.seed, meta)


# -- NP size quantile ---------------------------------------------------------


def _quantile_from_atoms(values: np.ndarray, weights: np.ndarray, alpha: float, tol: float) -> float:
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, alpha * cum[-1], side="left"))
    k = min(k, len(order) - 1)
    # the event is S_n < u - tol, so u sits just past the tie band of the atom
    return float(np.nextafter(values[order[k]] + 2 * tol, np.inf))


def np_quantile_u_n(sys0, sys1, alpha: float, n: int, mode: str = EXACT, replicas: int = 100_000,
                    seed: int = 0, statistic=None) -> float:
    """Smallest ``u`` with ``mu_0(S_n < u) >= alpha``.

    ``S_n`` has a discrete law, so the answer sits just above the first atom
    at which the inclusive distribution function reaches ``alpha``, clear
    of that atom's tie band.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    v = _statistic(sys0, sys1, statistic)
    if mode == EXACT:
        s, p0, _ = enumerate_statistic(sys0, sys1, n, v)
        return _quantile_from_atoms(s, p0, alpha, tie_tolerance(v))
    if mode == MC:
        s = simulate_statistic(sys0, v, [n], replicas, seed, 0)[:, 0]
        return _quantile_from_atoms(s, np.ones_like(s), alpha, tie_tolerance(v))
    raise InputError(f"mode must be {EXACT!r} or {MC!r}")
