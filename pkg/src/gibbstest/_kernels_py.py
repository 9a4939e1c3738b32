"""Pure numpy implementations of the ``_kernels`` extension.

Operation order follows the Cython code so that enumeration and simulation
produce bit-identical output on either backend.
"""

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_G = np.uint64(GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
TWO_M53 = 1.0 / 9007199254740992.0


def mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _uniform(state: np.ndarray) -> np.ndarray:
    return (mix64(state) >> np.uint64(11)).astype(np.float64) * TWO_M53


def _pick(cdf_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    # number of cdf knots (excluding the last) at or below u == first k with u < cdf[k]
    return np.sum(cdf_rows[..., :-1] <= u[:, None], axis=-1)


def perron(m, tol, maxiter):
    m = np.asarray(m, dtype=float)
    d = m.shape[0]
    rows = m.sum(axis=1)
    c = 0.5 * (rows.min() + rows.max())
    if c <= 0.0:
        c = 1.0
    x = np.ones(d)
    used = -1
    for it in range(maxiter):
        y = c * x + m @ x
        y /= y.max()
        with np.errstate(divide="ignore", invalid="ignore"):
            diff = np.max(np.where(y > 0, np.abs(y - x) / y, np.abs(y - x)))
        x = y
        if diff <= tol:
            used = it + 1
            break
    return float(np.sum(m @ x) / np.sum(x)), x, used


def enumerate_words(pi0, t0, pi1, t1, v, n):
    d = len(pi0)
    sums = np.zeros(d)
    q0 = np.array(pi0, dtype=float)
    q1 = np.array(pi1, dtype=float)
    last = np.arange(d)
    for _ in range(n):
        sums = (sums[:, None] + v[last, :]).ravel()
        q0 = (q0[:, None] * t0[:, last].T).ravel()
        q1 = (q1[:, None] * t1[:, last].T).ravel()
        last = np.tile(np.arange(d), last.size)
    return sums, q0, q1


def _initial_states(base, start, count):
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return mix64(np.uint64(base) + idx * _G)


def simulate_sums(v, cdf0, cdft, checkpoints, base, start, out):
    reps = out.shape[0]
    state = _initial_states(base, start, reps) + _G
    cur = _pick(np.broadcast_to(cdf0, (reps, len(cdf0))), _uniform(state))
    total = np.zeros(reps)
    k = 0
    for step in range(1, int(checkpoints[-1]) + 1):
        state = state + _G
        nxt = _pick(cdft[cur], _uniform(state))
        total = total + v[cur, nxt]
        cur = nxt
        if step == checkpoints[k]:
            out[:, k] = total
            k += 1


def walk(cdf0, cdft, length, base, replica):
    state = _initial_states(base, replica, 1) + _G
    path = np.empty(length, dtype=np.int_)
    path[0] = _pick(cdf0[None, :], _uniform(state))[0]
    for i in range(1, length):
        state = state + _G
        path[i] = _pick(cdft[path[i - 1]][None, :], _uniform(state))[0]
    return path
