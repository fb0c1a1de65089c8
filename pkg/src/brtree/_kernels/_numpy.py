"""Pure-numpy kernels.  Vectorised across samples; outputs match :mod:`._numba` exactly.

Tree utilities that are inherently sequential (stack scans) run as plain Python loops
here; they are correct but slow, which is fine for a fallback.
"""

import numpy as np

from .. import rng
from ._common import (STAT_AT_LEAST, STAT_BRANCHES, STAT_DEPTH, STAT_EXACTLY,
                      STAT_POSITION, ERR_BRANCHES, ERR_DEGREE, ERR_DEPTH,
                      ERR_INCREASING, ERR_STATISTIC)

NAME = "numpy"

_LOW = np.uint64(0xFFFFFFFF)
# cells per vectorised block
_BLOCK_CELLS = 1 << 22


def _digit_dtype(thr):
    return np.int8 if thr.shape[0] < 127 else np.int32


def sample_digits(key, start, count, m, thr):
    w = (m + 1) // 2
    j = np.arange(start, start + count, dtype=np.uint64)[:, None]
    counters = j * np.uint64(w) + np.arange(w, dtype=np.uint64)[None, :]
    words = rng.stream_words(key, counters)
    halves = np.stack([words & _LOW, words >> np.uint64(32)], axis=2).reshape(count, 2 * w)[:, :m]
    return np.searchsorted(thr, halves, side="right").astype(_digit_dtype(thr))


def sample_keys(key, start, count, m):
    j = np.arange(start, start + count, dtype=np.uint64)[:, None]
    counters = j * np.uint64(m) + np.arange(m, dtype=np.uint64)[None, :]
    return rng.stream_words(key, counters)


# ---- statistics over a (rows, m) key matrix -------------------------------------

def _window_min(b, k):
    """out[:, i] = min(b[:, i:i+k]) for every full window."""
    out = b
    span = 1
    while span * 2 <= k:
        out = np.minimum(out[:, :-span], out[:, span:])
        span *= 2
    if span < k:
        out = np.minimum(out[:, : out.shape[1] - (k - span)], out[:, k - span:])
    return out


def _at_least(b, k):
    rows, m = b.shape
    if k == 0:
        return np.full(rows, m + 1, np.int64)
    if k > m:
        return np.zeros(rows, np.int64)
    last = m - k
    if last == 0:
        return np.ones(rows, np.int64)
    wm = _window_min(b[:, 1:], k)[:, :last]
    return 1 + np.count_nonzero(b[:, :last] <= wm, axis=1)


def _branches(b):
    rows, m = b.shape
    if m == 0:
        return np.zeros(rows, np.int64)
    run = np.minimum.accumulate(b, axis=1)
    return 1 + np.count_nonzero(b[:, 1:] < run[:, :-1], axis=1)


def _last_argmax(b):
    m = b.shape[1]
    return m - 1 - np.argmax(b[:, ::-1], axis=1)


def _depth(b):
    rows, m = b.shape
    if m == 0:
        return np.zeros(rows, np.int64)
    pos = _last_argmax(b)
    idx = np.arange(m)[None, :]
    big = np.iinfo(b.dtype).max
    masked = np.where(idx >= pos[:, None], big, b)
    # suffix minimum over strictly later cards
    suf = np.minimum.accumulate(masked[:, ::-1], axis=1)[:, ::-1]
    after = np.concatenate([suf[:, 1:], np.full((rows, 1), big, b.dtype)], axis=1)
    hit = (masked <= after) & (idx < pos[:, None])
    return 1 + np.count_nonzero(hit, axis=1)


def _statistic_matrix(b, stat, k):
    if stat == STAT_BRANCHES:
        return _branches(b)
    if stat == STAT_AT_LEAST:
        return _at_least(b, k)
    if stat == STAT_EXACTLY:
        return _at_least(b, k) - _at_least(b, k + 1)
    if stat == STAT_DEPTH:
        return _depth(b)
    if stat == STAT_POSITION:
        return _last_argmax(b) + 2
    raise ValueError(f"unknown statistic code {stat}")


def statistic_of_row(row, stat, k):
    return int(_statistic_matrix(np.asarray(row)[None, :], stat, k)[0])


# ---- tree utilities -----------------------------------------------------------

def gamma_from_keys(buf):
    order = np.argsort(buf, kind="stable")
    g = np.empty(buf.shape[0], np.int64)
    g[order] = np.arange(2, buf.shape[0] + 2)
    return g


def parents_from_sequence(values):
    values = np.asarray(values, dtype=np.int64)
    m = values.shape[0]
    parent = np.zeros(m + 2, np.int64)
    stack = [1]
    for v in values.tolist():
        while stack[-1] > v:
            stack.pop()
        parent[v] = stack[-1]
        stack.append(v)
    return parent


def descendants_from_parents(parent):
    par = np.asarray(parent, dtype=np.int64).tolist()
    n = len(par) - 1
    desc = [0] * (n + 1)
    for v in range(n, 1, -1):
        desc[par[v]] += desc[v] + 1
    return np.array(desc, dtype=np.int64)


def depths_from_parents(parent):
    par = np.asarray(parent, dtype=np.int64).tolist()
    n = len(par) - 1
    depth = [0] * (n + 1)
    for v in range(2, n + 1):
        depth[v] = depth[par[v]] + 1
    return np.array(depth, dtype=np.int64)


def sequence_from_parents(parent):
    par = np.asarray(parent, dtype=np.int64).tolist()
    n = len(par) - 1
    nxt = [0] * (n + 1)
    for v in range(2, n + 1):
        p = par[v]
        nxt[v] = nxt[p]
        nxt[p] = v
    out = []
    cur = nxt[1]
    for _ in range(n - 1):
        out.append(cur)
        cur = nxt[cur]
    return np.array(out, dtype=np.int64)


def _spot_check(row, a, urt, stat, k, value):
    m = row.shape[0]
    n = m + 1
    g = gamma_from_keys(row)
    parent = parents_from_sequence(g)
    labels = np.arange(2, n + 1)
    if np.any(parent[2:] >= labels) or np.any(parent[2:] < 1):
        return ERR_INCREASING
    deg = np.bincount(parent[2:], minlength=n + 1)
    if not urt:
        if deg[1] > a:
            return ERR_BRANCHES
        if deg.max(initial=0) > a:
            return ERR_DEGREE
    depth = int(depths_from_parents(parent)[n])
    if depth != statistic_of_row(row, STAT_DEPTH, 0):
        return ERR_DEPTH
    if stat == STAT_BRANCHES:
        ref = int(deg[1])
    elif stat == STAT_DEPTH:
        ref = depth
    elif stat == STAT_POSITION:
        ref = int(np.flatnonzero(g == n)[0]) + 2
    else:
        desc = descendants_from_parents(parent)[1:]
        ref = int(np.count_nonzero(desc >= k if stat == STAT_AT_LEAST else desc == k))
    return 0 if ref == value else ERR_STATISTIC


def sample_statistic(key, count, m, thr, stat, k, check_every, a, urt):
    out = np.empty(count, np.int64)
    err = 0
    rows = max(1, _BLOCK_CELLS // max(m, 1))
    for lo in range(0, count, rows):
        hi = min(count, lo + rows)
        if urt:
            b = sample_keys(key, lo, hi - lo, m)
        else:
            b = sample_digits(key, lo, hi - lo, m, thr)
        vals = _statistic_matrix(b, stat, k)
        out[lo:hi] = vals
        if check_every > 0:
            first = -(-lo // check_every) * check_every
            for j in range(first, hi, check_every):
                if err == 0:
                    err = _spot_check(b[j - lo], a, urt, stat, k, int(vals[j - lo]))
    return out, err
