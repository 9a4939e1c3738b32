"""Markov measures on the one-sided shift over ``{1, ..., d}``.

Conventions used throughout the package:

* Transition matrices are column-stochastic: ``trans[i, j]`` is the
  probability that the next symbol is ``i`` given the current symbol ``j``.
  Row-stochastic input is accepted through ``orientation="row"``.
* A two-cylinder potential ``g`` is a ``d x d`` array with ``g[a, b]`` the
  value on the cylinder whose first symbol is ``a`` and second is ``b``.
* The Jacobian of a Markov measure is
  ``J[a, b] = stationary[a] * trans[b, a] / stationary[b]``, the probability
  of the preceding symbol ``a`` given the present one ``b``.  Every column of
  ``J`` sums to one.

Symbols are 0-based in code and 1-based only in user-facing text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InputError, NotStochastic, ReducibleChain, WordTooShort

IDENTITY_TOL = 1e-12
INPUT_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TwoCylinderPotential:
    """A real function of two consecutive symbols."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise DimensionMismatch(f"potential must be a square matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("potential entries must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @classmethod
    def constant(cls, d: int, c: float = 0.0) -> "TwoCylinderPotential":
        return cls(np.full((d, d), float(c)))

    def _check(self, other: "TwoCylinderPotential"):
        if other.d != self.d:
            raise DimensionMismatch(f"alphabet sizes differ: {self.d} vs {other.d}")

    def __add__(self, other):
        if isinstance(other, TwoCylinderPotential):
            self._check(other)
            return TwoCylinderPotential(self.values + other.values)
        return TwoCylinderPotential(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TwoCylinderPotential):
            self._check(other)
            return TwoCylinderPotential(self.values - other.values)
        return TwoCylinderPotential(self.values - float(other))

    def __mul__(self, c):
        return TwoCylinderPotential(float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return TwoCylinderPotential(-self.values)

    def __call__(self, a: int, b: int) -> float:
        return float(self.values[a, b])

    def allclose(self, other: "TwoCylinderPotential", atol: float = IDENTITY_TOL) -> bool:
        return other.d == self.d and bool(np.allclose(self.values, other.values, rtol=0, atol=atol))

    def __repr__(self):
        return f"TwoCylinderPotential({self.values.tolist()!r})"


def _check_column_stochastic(trans: np.ndarray, tol: float = INPUT_TOL) -> np.ndarray:
    t = np.asarray(trans, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
        raise DimensionMismatch(f"transition matrix must be square, got shape {t.shape}")
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1 + tol):
        raise NotStochastic("transition entries must lie in [0, 1]")
    sums = t.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        j = int(bad[0])
        raise NotStochastic(f"column {j + 1} sums to {sums[j]!r}, expected 1")
    return t


def is_irreducible(mask: np.ndarray) -> bool:
    """Strong connectivity of the directed graph with adjacency ``mask``."""
    m = np.asarray(mask, dtype=bool)
    d = m.shape[0]
    for adj in (m, m.T):
        seen = np.zeros(d, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(int(j))
        if not seen.all():
            return False
    return True


def stationary_distribution(trans) -> np.ndarray:
    """Unique ``pi`` with ``trans @ pi = pi``, ``pi > 0`` and ``sum(pi) = 1``.

    Raises
    ------
    NotStochastic
        If a column sum deviates from 1 by more than ``1e-9``.
    ReducibleChain
        If the transition graph is not strongly connected.
    """
    t = _check_column_stochastic(trans)
    d = t.shape[0]
    if not is_irreducible(t > 0):
        raise ReducibleChain("transition graph is not strongly connected")
    if d == 1:
        return np.ones(1)
    a = np.vstack([np.eye(d) - t, np.ones((1, d))])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    # one step of the chain removes most of the least-squares residual
    pi = t @ pi
    pi /= pi.sum()
    return pi


@dataclass(frozen=True, eq=False)
class MarkovSystem:
    """A stationary Markov measure together with its Jacobian."""

    d: int
    trans: np.ndarray
    stationary: np.ndarray
    jacobian: TwoCylinderPotential = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "trans", _frozen(self.trans))
        object.__setattr__(self, "stationary", _frozen(self.stationary))

    @property
    def pair_measure(self) -> np.ndarray:
        """``mu[a, b] = P(X0 = a, X1 = b)``."""
        return self.stationary[:, None] * self.trans.T

    def log_jacobian(self) -> TwoCylinderPotential:
        j = self.jacobian.values
        if np.any(j <= 0):
            raise InputError("log-Jacobian undefined: the chain has forbidden transitions")
        return TwoCylinderPotential(np.log(j))

    def same_as(self, other: "MarkovSystem", atol: float = IDENTITY_TOL) -> bool:
        return self.d == other.d and self.jacobian.allclose(other.jacobian, atol)

    def to_dict(self) -> dict:
        return {"d": self.d, "matrix": self.trans.tolist(), "orientation": "column"}


def markov_system(trans, orientation: str = "column") -> MarkovSystem:
    """Build a :class:`MarkovSystem` from a transition matrix.

    ``orientation="row"`` transposes a row-stochastic matrix first.  Columns
    are renormalised after validation so that internal identities hold to
    ``1e-12`` even for inputs rounded at ``1e-9``.
    """
    t = np.array(trans, dtype=float)
    if orientation == "row":
        t = t.T
    elif orientation != "column":
        raise InputError(f"orientation must be 'column' or 'row', got {orientation!r}")
    t = _check_column_stochastic(t)
    t = t / t.sum(axis=0)
    pi = stationary_distribution(t)
    jac = pi[:, None] * t.T / pi[None, :]
    jac = jac / jac.sum(axis=0)
    return MarkovSystem(t.shape[0], t, pi, TwoCylinderPotential(jac))


def markov_system_from_jacobian(jac) -> MarkovSystem:
    """The Markov measure whose Jacobian is ``jac`` (columns summing to 1).

    The one-symbol marginal ``nu`` is the stationary vector of ``jac`` seen
    as a column-stochastic matrix, and the forward kernel is
    ``trans[b, a] = jac[a, b] * nu[b] / nu[a]``.
    """
    j = np.asarray(jac.values if isinstance(jac, TwoCylinderPotential) else jac, dtype=float)
    j = _check_column_stochastic(j)
    j = j / j.sum(axis=0)
    nu = stationary_distribution(j)
    t = (j * nu[None, :] / nu[:, None]).T
    t = t / t.sum(axis=0)
    return MarkovSystem(j.shape[0], t, nu, TwoCylinderPotential(j))


def two_cylinder_measure(sys: MarkovSystem, a: int, b: int) -> float:
    """``P(X0 = a, X1 = b)`` for 0-based symbols."""
    if not (0 <= a < sys.d and 0 <= b < sys.d):
        raise IndexError(f"symbols must lie in 0..{sys.d - 1}")
    return float(sys.stationary[a] * sys.trans[b, a])


def integrate(g: TwoCylinderPotential, sys: MarkovSystem) -> float:
    if g.d != sys.d:
        raise DimensionMismatch(f"potential has d={g.d}, system has d={sys.d}")
    return float(np.sum(g.values * sys.pair_measure))


def entropy(sys: MarkovSystem) -> float:
    """Kolmogorov-Sinai entropy ``-sum mu(ab) log trans[b, a]`` (0 log 0 = 0)."""
    mu = sys.pair_measure
    t = sys.trans.T
    mask = mu > 0
    return float(max(-np.sum(mu[mask] * np.log(t[mask])), 0.0))


def log_likelihood_ratio(sys0: MarkovSystem, sys1: MarkovSystem) -> TwoCylinderPotential:
    """``K = log J0 - log J1``."""
    if sys0.d != sys1.d:
        raise DimensionMismatch(f"alphabet sizes differ: {sys0.d} vs {sys1.d}")
    return sys0.log_jacobian() - sys1.log_jacobian()


def s_n(word: Sequence[int], j0: TwoCylinderPotential, j1: TwoCylinderPotential) -> float:
    """Empirical log-likelihood ratio of a word of length ``n + 1``.

    ``j0`` and ``j1`` are the Jacobians themselves (not their logarithms);
    each of the ``n`` consecutive pairs contributes ``log(j0/j1)``.
    """
    w = np.asarray(word, dtype=np.intp)
    if w.ndim != 1 or w.size < 2:
        raise WordTooShort("a word needs at least two symbols")
    if j0.d != j1.d:
        raise DimensionMismatch(f"alphabet sizes differ: {j0.d} vs {j1.d}")
    k = np.log(j0.values) - np.log(j1.values)
    return float(statistic_sum(w, k) / (w.size - 1))


def statistic_sum(word: np.ndarray, values: np.ndarray) -> float:
    """Left-to-right sum of ``values[w_i, w_{i+1}]``.

    The order matches the simulation and enumeration kernels so that the
    same word produces the same float everywhere.
    """
    total = 0.0
    for i in range(len(word) - 1):
        total += values[word[i], word[i + 1]]
    return total


def _parse_entry(x) -> float:
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def system_from_dict(obj: dict, orientation: str | None = None) -> MarkovSystem:
    """Read the ``{"d", "matrix", "orientation"}`` system definition.

    ``orientation`` supplies a default when the document has none.  Matrix
    entries may be numbers or fraction strings such as ``"2/3"``.
    """
    if "matrix" not in obj:
        raise InputError("system definition lacks 'matrix'")
    try:
        rows = [[_parse_entry(x) for x in row] for row in obj["matrix"]]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"matrix: {exc}") from None
    mat = np.array(rows, dtype=float)
    if mat.ndim != 2:
        raise DimensionMismatch("matrix: rows have unequal lengths")
    d = obj.get("d", mat.shape[0])
    if d != mat.shape[0] or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"d: declared {d}, matrix has shape {mat.shape}")
    orient = obj.get("orientation", orientation or "column")
    return markov_system(mat, orientation=orient)


def load_system(path, orientation: str | None = None) -> MarkovSystem:
    with open(Path(path), encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from None
    return system_from_dict(obj, orientation)
