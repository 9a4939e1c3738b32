"""Ergodic optimisation of two-cylinder potentials in the max-plus semiring.

A potential ``K`` defines weights on the complete directed graph over the
alphabet: the edge ``a -> b`` carries ``K[a, b]``, so a path reads symbols in
the same order as the test statistic.  The largest mean weight of a cycle
``m(K)`` is the asymptotic slope of ``t -> P(t K + A)`` as ``t -> +inf`` for
any base potential ``A``; likewise ``-m(-K)`` as ``t -> -inf``.

A calibrated subaction is a vector ``u`` with

    max_a [K(a, b) + u(a)] = m(K) + u(b)    for every b,

i.e. a max-plus eigenvector of the weight matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHypotheses
from .model import TwoCylinderPotential

NEG_INF = -np.inf


@dataclass(frozen=True)
class CycleMeanResult:
    value: float
    witness_cycle: tuple[int, ...]
    cycle_length: int

    def witness_mean(self, k: TwoCylinderPotential) -> float:
        c = self.witness_cycle
        return float(np.mean([k.values[c[i], c[(i + 1) % len(c)]] for i in range(len(c))]))


@dataclass(frozen=True, eq=False)
class Subaction:
    u: np.ndarray
    mean: float
    residual: float


def _weights(k) -> np.ndarray:
    return np.asarray(k.values if isinstance(k, TwoCylinderPotential) else k, dtype=float)


def karp(w: np.ndarray) -> float:
    """Maximum cycle mean of the weight matrix ``w`` (``-inf`` = no edge).

    Karp's recursion from a virtual source joined to every node, so the
    graph need not be strongly connected.  Returns ``-inf`` if acyclic.
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    dist = np.empty((n + 1, n))
    dist[0] = 0.0
    for k in range(1, n + 1):
        dist[k] = np.max(dist[k - 1][:, None] + w, axis=0)
    best = NEG_INF
    with np.errstate(invalid="ignore"):
        for v in range(n):
            if dist[n, v] == NEG_INF:
                continue
            ratios = [(dist[n, v] - dist[k, v]) / (n - k) for k in range(n) if dist[k, v] > NEG_INF]
            best = max(best, min(ratios))
    return float(best)


def maxplus_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.max(a[:, :, None] + b[None, :, :], axis=1)


def kleene_plus(a: np.ndarray) -> np.ndarray:
    """Max-plus transitive closure ``A + A^2 + ...`` by Floyd-Warshall.

    Requires no cycle of positive weight.
    """
    p = np.array(a, dtype=float)
    for k in range(p.shape[0]):
        p = np.maximum(p, p[:, k, None] + p[None, k, :])
    return p


def trace_cycle_mean(w: np.ndarray, nmax: int | None = None) -> float:
    """``max_{n <= nmax} Tr(W^n) / n`` with max-plus powers and trace."""
    w = np.asarray(w, dtype=float)
    nmax = w.shape[0] if nmax is None else nmax
    power = w.copy()
    best = np.max(np.diag(power))
    for n in range(2, nmax + 1):
        power = maxplus_matmul(power, w)
        best = max(best, np.max(np.diag(power)) / n)
    return float(best)


def cylinder_lift(k: TwoCylinderPotential) -> np.ndarray:
    """Weight matrix on two-cylinders: ``(a, b) -> (b, c)`` costs ``K[a, b]``."""
    kv = _weights(k)
    d = kv.shape[0]
    w = np.full((d * d, d * d), NEG_INF)
    for a in range(d):
        for b in range(d):
            for c in range(d):
                w[a * d + b, b * d + c] = kv[a, b]
    return w


def _tight_mask(kv: np.ndarray, u: np.ndarray, m: float) -> np.ndarray:
    slack = m + u[None, :] - kv - u[:, None]
    tol = 1e-10 * max(1.0, float(np.max(np.abs(kv))))
    return slack <= tol


def _reach(mask: np.ndarray) -> np.ndarray:
    r = mask.copy()
    for k in range(r.shape[0]):
        r |= r[:, k, None] & r[None, k, :]
    return r


def critical_edges(k: TwoCylinderPotential) -> np.ndarray:
    """Boolean mask of edges lying on some cycle of maximal mean."""
    kv = _weights(k)
    sub = calibrated_subaction(k)
    tight = _tight_mask(kv, sub.u, sub.mean)
    reach = _reach(tight)
    return tight & reach.T


def _shortest_critical_cycle(crit: np.ndarray) -> tuple[int, ...]:
    d = crit.shape[0]
    best: tuple[int, ...] | None = None
    # cycles are enumerated from their smallest symbol, so each appears once
    for s in range(d):
        stack = [(s, (s,))]
        while stack:
            node, path = stack.pop()
            if best is not None and len(path) > len(best):
                continue
            for nxt in range(d):
                if not crit[node, nxt]:
                    continue
                if nxt == s:
                    cand = path
                    if best is None or (len(cand), cand) < (len(best), best):
                        best = cand
                elif nxt > s and nxt not in path:
                    stack.append((nxt, path + (nxt,)))
    assert best is not None
    return best


def max_cycle_mean(k: TwoCylinderPotential) -> CycleMeanResult:
    """Maximal cycle mean of ``k`` with a shortest, lexicographically first witness."""
    kv = _weights(k)
    value = karp(kv)
    witness = _shortest_critical_cycle(critical_edges(k))
    return CycleMeanResult(value, witness, len(witness))


def c_bounds(k: TwoCylinderPotential) -> tuple[float, float]:
    """Range ``(c_minus, c_plus) = (-m(-K), m(K))`` of ``t -> dP(tK + A)/dt``."""
    kv = _weights(k)
    c_plus = karp(kv)
    c_minus = -karp(-kv)
    if c_plus - c_minus <= 1e-14 * max(1.0, abs(c_plus)):
        raise DegenerateHypotheses("the potential is cohomologous to a constant: identical hypotheses")
    return c_minus, c_plus


def calibration_residual(k: TwoCylinderPotential, u: np.ndarray, m: float) -> float:
    kv = _weights(k)
    lhs = np.max(kv + np.asarray(u)[:, None], axis=0)
    return float(np.max(np.abs(lhs - (m + np.asarray(u)))))


def calibrated_subaction(k: TwoCylinderPotential) -> Subaction:
    """Max-plus eigenvector of ``K - m(K)``, normalised by ``u[0] = 0``.

    Taken as the row of the Kleene closure at a critical node, which is an
    eigenvector for the eigenvalue 0 of the centred weights.
    """
    kv = _weights(k)
    m = karp(kv)
    closure = kleene_plus(kv - m)
    c = int(np.argmax(np.diag(closure)))
    u = closure[c] - closure[c, 0]
    u.setflags(write=False)
    return Subaction(u, m, calibration_residual(kv, u, m))
