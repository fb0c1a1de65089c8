"""Compiled kernels.  Same signatures and outputs as :mod:`._numpy`.

Sample buffers hold one key per card 2..n (0-based index ``i`` is card ``i + 2``).
Keys are digits in p-biased mode and raw 64-bit words in the uniform-tree mode; every
statistic below only compares keys, with ties broken towards the lower card, so the
same code serves both.
"""

import numpy as np
from numba import njit

from ._common import (STAT_AT_LEAST, STAT_BRANCHES, STAT_DEPTH, STAT_EXACTLY,
                      STAT_POSITION, ERR_BRANCHES, ERR_DEGREE, ERR_DEPTH,
                      ERR_INCREASING, ERR_STATISTIC)

NAME = "numba"

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LOW = np.uint64(0xFFFFFFFF)
_ONE = np.uint64(1)


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _digit(u, thr):
    na = thr.shape[0]
    if na <= 16:
        d = 0
        for t in range(na):
            d += u >= thr[t]
        return d
    lo, hi = 0, na
    while lo < hi:
        mid = (lo + hi) >> 1
        if thr[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(nogil=True, cache=True)
def _fill_digits(key, j, m, thr, buf):
    half = m // 2
    base = key + (np.uint64(j) * np.uint64((m + 1) // 2) + _ONE) * _G
    for w in range(half):
        u = _mix(base + np.uint64(w) * _G)
        buf[2 * w] = _digit(u & _LOW, thr)
        buf[2 * w + 1] = _digit(u >> np.uint64(32), thr)
    if m % 2 == 1:
        u = _mix(base + np.uint64(half) * _G)
        buf[m - 1] = _digit(u & _LOW, thr)


@njit(nogil=True, cache=True)
def _fill_keys(key, j, m, buf):
    base = key + (np.uint64(j) * np.uint64(m) + _ONE) * _G
    for i in range(m):
        buf[i] = _mix(base + np.uint64(i) * _G)


@njit(nogil=True, cache=True)
def digits_block(key, start, count, m, thr, dtype_probe):
    out = np.empty((count, m), dtype_probe.dtype)
    buf = np.empty(m, dtype_probe.dtype)
    for r in range(count):
        _fill_digits(key, start + r, m, thr, buf)
        out[r, :] = buf
    return out


@njit(nogil=True, cache=True)
def keys_block(key, start, count, m):
    out = np.empty((count, m), np.uint64)
    buf = np.empty(m, np.uint64)
    for r in range(count):
        _fill_keys(key, start + r, m, buf)
        out[r, :] = buf
    return out


# ---- per-sample statistics on a key buffer --------------------------------------

@njit(inline="always")
def _count_branches(buf, m):
    if m == 0:
        return 0
    c = 1
    low = buf[0]
    for i in range(1, m):
        if buf[i] < low:
            c += 1
            low = buf[i]
    return c


@njit(nogil=True, cache=True)
def _count_at_least(buf, m, k):
    # root plus cards i with key_i <= every key in the next k cards
    if k == 0:
        return m + 1
    if k > m:
        return 0
    last = m - k
    c = 1
    if k == 1:
        for i in range(last):
            c += buf[i] <= buf[i + 1]
    elif k <= 4:
        for i in range(last):
            low = buf[i + 1]
            for t in range(2, k + 1):
                low = min(low, buf[i + t])
            c += buf[i] <= low
    else:
        # distance to the next strictly smaller key, via a monotone stack
        stack = np.empty(m, np.int64)
        top = 0
        nxt = np.full(m, m + k + 1, np.int64)
        for i in range(m):
            while top > 0 and buf[stack[top - 1]] > buf[i]:
                top -= 1
                nxt[stack[top]] = i
            stack[top] = i
            top += 1
        for i in range(last):
            c += nxt[i] - i > k
    return c


@njit(inline="always")
def _argmax_last(buf, m):
    pos = 0
    for i in range(1, m):
        if buf[i] >= buf[pos]:
            pos = i
    return pos


@njit(inline="always")
def _depth_of_last(buf, m):
    if m == 0:
        return 0
    pos = _argmax_last(buf, m)
    d = 1
    if pos == 0:
        return d
    low = buf[pos - 1]
    d += 1
    for t in range(pos - 2, -1, -1):
        if buf[t] <= low:
            d += 1
            low = buf[t]
    return d


@njit(nogil=True, cache=True)
def _statistic(buf, m, stat, k):
    if stat == STAT_BRANCHES:
        return _count_branches(buf, m)
    if stat == STAT_AT_LEAST:
        return _count_at_least(buf, m, k)
    if stat == STAT_EXACTLY:
        return _count_at_least(buf, m, k) - _count_at_least(buf, m, k + 1)
    if stat == STAT_DEPTH:
        return _depth_of_last(buf, m)
    if stat == STAT_POSITION:
        return _argmax_last(buf, m) + 2
    return -1


# ---- tree utilities -----------------------------------------------------------

@njit(nogil=True, cache=True)
def gamma_from_keys(buf):
    """Rank of each card after a stable sort by key, as labels 2..n."""
    m = buf.shape[0]
    order = np.argsort(buf, kind="mergesort")
    g = np.empty(m, np.int64)
    for r in range(m):
        g[order[r]] = r + 2
    return g


@njit(nogil=True, cache=True)
def parents_from_sequence(values):
    """Parent of each label in ``values`` (labels 2..n, sentinel 1 implied on the left).

    Returns an array indexed by label (entries 0 and 1 unused, set to 0).
    """
    m = values.shape[0]
    parent = np.zeros(m + 2, np.int64)
    stack = np.empty(m + 1, np.int64)
    stack[0] = 1
    top = 1
    for s in range(m):
        v = values[s]
        while stack[top - 1] > v:
            top -= 1
        parent[v] = stack[top - 1]
        stack[top] = v
        top += 1
    return parent


@njit(nogil=True, cache=True)
def descendants_from_parents(parent):
    """Descendant count per node, indexed by label (entry 0 unused)."""
    n = parent.shape[0] - 1
    desc = np.zeros(n + 1, np.int64)
    for v in range(n, 1, -1):
        desc[parent[v]] += desc[v] + 1
    return desc


@njit(nogil=True, cache=True)
def depths_from_parents(parent):
    n = parent.shape[0] - 1
    depth = np.zeros(n + 1, np.int64)
    for v in range(2, n + 1):
        depth[v] = depth[parent[v]] + 1
    return depth


@njit(nogil=True, cache=True)
def sequence_from_parents(parent):
    """Insert 2..n one by one right after their parent; return the final sequence."""
    n = parent.shape[0] - 1
    nxt = np.zeros(n + 1, np.int64)
    for v in range(2, n + 1):
        p = parent[v]
        nxt[v] = nxt[p]
        nxt[p] = v
    out = np.empty(n - 1, np.int64)
    cur = nxt[1]
    for s in range(n - 1):
        out[s] = cur
        cur = nxt[cur]
    return out


@njit(nogil=True, cache=True)
def _spot_check(buf, m, a, urt, stat, k, value):
    n = m + 1
    g = gamma_from_keys(buf[:m])
    parent = parents_from_sequence(g)
    deg = np.zeros(n + 1, np.int64)
    for v in range(2, n + 1):
        if parent[v] >= v or parent[v] < 1:
            return ERR_INCREASING
        deg[parent[v]] += 1
    if not urt:
        if deg[1] > a:
            return ERR_BRANCHES
        for v in range(1, n + 1):
            if deg[v] > a:
                return ERR_DEGREE
    d = 0
    v = n
    while v != 1:
        v = parent[v]
        d += 1
    if d != _depth_of_last(buf, m):
        return ERR_DEPTH
    if stat == STAT_BRANCHES:
        ref = deg[1]
    elif stat == STAT_DEPTH:
        ref = d
    elif stat == STAT_POSITION:
        ref = 0
        for s in range(m):
            if g[s] == n:
                ref = s + 2
    else:
        desc = descendants_from_parents(parent)
        ref = 0
        for v in range(1, n + 1):
            if stat == STAT_AT_LEAST:
                ref += desc[v] >= k
            else:
                ref += desc[v] == k
    if ref != value:
        return ERR_STATISTIC
    return 0


@njit(nogil=True, cache=True)
def _run(key, count, m, thr, stat, k, check_every, a, urt, buf, out):
    err = 0
    for j in range(count):
        if urt:
            _fill_keys(key, j, m, buf)
        else:
            _fill_digits(key, j, m, thr, buf)
        val = _statistic(buf, m, stat, k)
        out[j] = val
        if check_every > 0 and j % check_every == 0 and err == 0:
            err = _spot_check(buf, m, a, urt, stat, k, val)
    return err


def sample_statistic(key, count, m, thr, stat, k, check_every, a, urt):
    """Statistic of samples 0..count-1 of stream ``key``; returns (values, error code)."""
    out = np.empty(count, np.int64)
    if urt:
        buf = np.empty(m, np.uint64)
    elif a <= 127:
        buf = np.empty(m, np.int8)
    else:
        buf = np.empty(m, np.int32)
    err = _run(np.uint64(key), count, m, thr, stat, k, check_every, a, urt, buf, out)
    return out, int(err)


def sample_digits(key, start, count, m, thr):
    probe = np.empty(0, np.int8 if thr.shape[0] < 127 else np.int32)
    return digits_block(np.uint64(key), start, count, m, thr, probe)


def sample_keys(key, start, count, m):
    return keys_block(np.uint64(key), start, count, m)


def statistic_of_row(row, stat, k):
    return int(_statistic(row, row.shape[0], stat, k))
