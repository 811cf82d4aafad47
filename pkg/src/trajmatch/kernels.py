"""Hot numeric kernels.

All functions here take plain float64 arrays and are compiled with numba
unless ``TRAJMATCH_NO_JIT`` is set (see :mod:`trajmatch._jit`). Demo sets are
passed as a padded ``(M, Lmax, 3)`` array plus a ``lengths`` vector.
"""

import math

import numpy as np

from ._jit import njit, prange

INF = np.inf
# smallest positive double; keeps 1 - tanh(c) strictly positive for huge c
_TINY = 5e-324


@njit
def point_dist(a, i, b, j):
    dx = a[i, 0] - b[j, 0]
    dy = a[i, 1] - b[j, 1]
    dz = a[i, 2] - b[j, 2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


@njit
def squash(cost):
    """``1 - tanh(cost)`` for ``cost >= 0``, written to avoid cancellation."""
    e = math.exp(-2.0 * cost)
    r = 2.0 * e / (1.0 + e)
    if r < _TINY:
        return _TINY
    return r


@njit
def closest_index(points, n, q, start):
    best = start
    dx = points[start, 0] - q[0]
    dy = points[start, 1] - q[1]
    dz = points[start, 2] - q[2]
    best_d = dx * dx + dy * dy + dz * dz
    for i in range(start + 1, n):
        dx = points[i, 0] - q[0]
        dy = points[i, 1] - q[1]
        dz = points[i, 2] - q[2]
        d = dx * dx + dy * dy + dz * dz
        if d < best_d:
            best_d = d
            best = i
    return best


# --------------------------------------------------------------------------
# dynamic time warping


@njit
def dtw_rolling(a, na, b, nb):
    """DTW cost of ``a[:na]`` vs ``b[:nb]`` using two rows of length ``nb + 1``."""
    prev = np.empty(nb + 1)
    cur = np.empty(nb + 1)
    prev[0] = 0.0
    for j in range(1, nb + 1):
        prev[j] = INF
    for i in range(1, na + 1):
        cur[0] = INF
        for j in range(1, nb + 1):
            m = prev[j]
            if cur[j - 1] < m:
                m = cur[j - 1]
            if prev[j - 1] < m:
                m = prev[j - 1]
            cur[j] = point_dist(a, i - 1, b, j - 1) + m
        tmp = prev
        prev = cur
        cur = tmp
    return prev[nb]


@njit
def dtw_table(a, b):
    """Full ``(P+1, Q+1)`` accumulated-cost table."""
    P = a.shape[0]
    Q = b.shape[0]
    M = np.full((P + 1, Q + 1), INF)
    M[0, 0] = 0.0
    for i in range(1, P + 1):
        for j in range(1, Q + 1):
            m = M[i - 1, j]
            if M[i, j - 1] < m:
                m = M[i, j - 1]
            if M[i - 1, j - 1] < m:
                m = M[i - 1, j - 1]
            M[i, j] = point_dist(a, i - 1, b, j - 1) + m
    return M


@njit
def band_limits(i, P, Q, band):
    center = i * Q / P
    lo = int(math.ceil(center - band))
    hi = int(math.floor(center + band))
    if lo < 1:
        lo = 1
    if hi > Q:
        hi = Q
    return lo, hi


@njit
def dtw_banded_rolling(a, b, band):
    P = a.shape[0]
    Q = b.shape[0]
    prev = np.full(Q + 1, INF)
    cur = np.full(Q + 1, INF)
    prev[0] = 0.0
    for i in range(1, P + 1):
        for j in range(Q + 1):
            cur[j] = INF
        lo, hi = band_limits(i, P, Q, band)
        for j in range(lo, hi + 1):
            m = prev[j]
            if cur[j - 1] < m:
                m = cur[j - 1]
            if prev[j - 1] < m:
                m = prev[j - 1]
            cur[j] = point_dist(a, i - 1, b, j - 1) + m
        tmp = prev
        prev = cur
        cur = tmp
    return prev[Q]


@njit
def dtw_banded_table(a, b, band):
    P = a.shape[0]
    Q = b.shape[0]
    M = np.full((P + 1, Q + 1), INF)
    M[0, 0] = 0.0
    for i in range(1, P + 1):
        lo, hi = band_limits(i, P, Q, band)
        for j in range(lo, hi + 1):
            m = M[i - 1, j]
            if M[i, j - 1] < m:
                m = M[i, j - 1]
            if M[i - 1, j - 1] < m:
                m = M[i - 1, j - 1]
            M[i, j] = point_dist(a, i - 1, b, j - 1) + m
    return M


@njit
def softmin3(x, y, z, gamma):
    m = x
    if y < m:
        m = y
    if z < m:
        m = z
    if m == INF:
        return INF
    s = math.exp(-(x - m) / gamma) + math.exp(-(y - m) / gamma) + math.exp(-(z - m) / gamma)
    return m - gamma * math.log(s)


@njit
def soft_dtw_rolling(a, b, gamma):
    P = a.shape[0]
    Q = b.shape[0]
    prev = np.full(Q + 1, INF)
    cur = np.empty(Q + 1)
    prev[0] = 0.0
    for i in range(1, P + 1):
        cur[0] = INF
        for j in range(1, Q + 1):
            cur[j] = point_dist(a, i - 1, b, j - 1) + softmin3(prev[j], cur[j - 1], prev[j - 1], gamma)
        tmp = prev
        prev = cur
        cur = tmp
    return prev[Q]


@njit
def dtw_reward_one(win, nw, demo, nd):
    """Imitation reward of a window against one demo, plus the matched segment bounds."""
    i0 = closest_index(demo, nd, win[0], 0)
    i1 = closest_index(demo, nd, win[nw - 1], i0)
    if i1 < i0:
        i1 = i0
    seg = demo[i0: i1 + 1]
    cost = dtw_rolling(win, nw, seg, i1 - i0 + 1)
    return squash(cost)


@njit
def dtw_rewards_seq(win, demos, lengths, out):
    for m in range(demos.shape[0]):
        out[m] = dtw_reward_one(win, win.shape[0], demos[m], lengths[m])


@njit(parallel=True)
def dtw_rewards_par(win, demos, lengths, out):
    for m in prange(demos.shape[0]):
        out[m] = dtw_reward_one(win, win.shape[0], demos[m], lengths[m])


@njit
def argmax_first(values):
    best = 0
    for i in range(1, values.shape[0]):
        if values[i] > values[best]:
            best = i
    return best


# --------------------------------------------------------------------------
# signatures


@njit
def sig_size(level):
    return (3 ** (level + 1) - 1) // 2


@njit
def sig_offset(m):
    # start of the level-m block in the flattened signature
    return (3 ** m - 1) // 2


@njit
def sig_step(sig, level, start, prev_pt, new_pt):
    """Advance a running signature by one step ``prev_pt -> new_pt`` in place."""
    d0 = new_pt[0] - prev_pt[0]
    d1 = new_pt[1] - prev_pt[1]
    d2 = new_pt[2] - prev_pt[2]
    sig[1] = new_pt[0] - start[0]
    sig[2] = new_pt[1] - start[1]
    sig[3] = new_pt[2] - start[2]
    for m in range(2, level + 1):
        lo_prev = sig_offset(m - 1)
        lo = sig_offset(m)
        for k in range(3 ** (m - 1)):
            v = sig[lo_prev + k]
            base = lo + 3 * k
            sig[base] += v * d0
            sig[base + 1] += v * d1
            sig[base + 2] += v * d2


@njit
def signature_of(points, n, level):
    sig = np.zeros(sig_size(level))
    sig[0] = 1.0
    for k in range(n - 1):
        sig_step(sig, level, points[0], points[k], points[k + 1])
    return sig


@njit
def signature_prefixes(points, n, level):
    """Row ``k`` holds the signature of ``points[0..k]``."""
    D = sig_size(level)
    table = np.zeros((n, D))
    sig = np.zeros(D)
    sig[0] = 1.0
    table[0] = sig
    for k in range(n - 1):
        sig_step(sig, level, points[0], points[k], points[k + 1])
        table[k + 1] = sig
    return table


@njit
def sig_dist(x, y):
    s = 0.0
    for k in range(x.shape[0]):
        d = x[k] - y[k]
        s += d * d
    return math.sqrt(s)


@njit
def signature_reward_one(sig, q, demo, nd, table):
    k = closest_index(demo, nd, q, 0)
    return squash(sig_dist(sig, table[k]))


@njit
def signature_rewards_seq(sig, q, demos, lengths, tables, out):
    for m in range(demos.shape[0]):
        out[m] = signature_reward_one(sig, q, demos[m], lengths[m], tables[m])


@njit(parallel=True)
def signature_rewards_par(sig, q, demos, lengths, tables, out):
    for m in prange(demos.shape[0]):
        out[m] = signature_reward_one(sig, q, demos[m], lengths[m], tables[m])


# --------------------------------------------------------------------------
# state-based matching


@njit
def nearest_demo_distance(q, demos, lengths):
    best = INF
    for m in range(demos.shape[0]):
        for i in range(lengths[m]):
            dx = demos[m, i, 0] - q[0]
            dy = demos[m, i, 1] - q[1]
            dz = demos[m, i, 2] - q[2]
            d = dx * dx + dy * dy + dz * dz
            if d < best:
                best = d
    return math.sqrt(best)


# --------------------------------------------------------------------------
# candidate scoring for the greedy controller: one imitation reward per
# hypothetical next position, maximised over demos


@njit
def candidate_dtw_rewards(history, candidates, demos, lengths, out):
    nh = history.shape[0]
    nw = nh + 1
    win = np.empty((nw, 3))
    for k in range(nh):
        win[k] = history[k]
    M = demos.shape[0]
    first = np.empty(M, dtype=np.int64)
    for m in range(M):
        first[m] = closest_index(demos[m], lengths[m], win[0], 0)
    for c in range(candidates.shape[0]):
        win[nw - 1] = candidates[c]
        best = 0.0
        for m in range(M):
            i0 = first[m]
            i1 = closest_index(demos[m], lengths[m], win[nw - 1], i0)
            cost = dtw_rolling(win, nw, demos[m, i0: i1 + 1], i1 - i0 + 1)
            r = squash(cost)
            if r > best:
                best = r
        out[c] = best


@njit
def candidate_signature_rewards(sig, level, start, last, candidates, demos, lengths, tables, out):
    trial = np.empty(sig.shape[0])
    for c in range(candidates.shape[0]):
        for k in range(sig.shape[0]):
            trial[k] = sig[k]
        sig_step(trial, level, start, last, candidates[c])
        best = 0.0
        for m in range(demos.shape[0]):
            r = signature_reward_one(trial, candidates[c], demos[m], lengths[m], tables[m])
            if r > best:
                best = r
        out[c] = best


@njit
def candidate_state_rewards(candidates, demos, lengths, out):
    for c in range(candidates.shape[0]):
        out[c] = squash(nearest_demo_distance(candidates[c], demos, lengths))
