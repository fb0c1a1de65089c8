"""Closed-form moments, limits and bounds for biased recursive trees.

Every evaluator takes the tree order ``n`` and either a probability vector ``p``
(anything :func:`brtree.shuffle.coerce_p` accepts) or a pile count ``a`` for the
uniform case.  Notation in comments: ``L_s = p_1 + ... + p_s``,
``U_s = p_s + ... + p_a`` and ``T_s = U_{s+1}``.

Numerics: sums of many terms go through :func:`math.fsum`; quantities of the form
``1 - q**m`` and ``(x**m - y**m) / (x - y)`` are evaluated with ``expm1``/``log1p`` from
exactly known complements, never by subtracting two numbers close to one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import config
from .errors import DomainError
from .shuffle import ProbabilityVector, coerce_p


# ---- small numeric helpers ------------------------------------------------------

def _fsum(values) -> float:
    if isinstance(values, np.ndarray):
        values = values.ravel().tolist()
    return math.fsum(values)


def _one_minus_pow(comp, m):
    """``1 - (1 - comp)**m`` for ``0 <= comp <= 1`` (scalar or array)."""
    comp = np.asarray(comp, dtype=np.float64)
    if m == 0:
        return np.zeros_like(comp)
    with np.errstate(divide="ignore"):
        return -np.expm1(m * np.log1p(-comp))


def _pow(base, m):
    base = np.asarray(base, dtype=np.float64)
    if m == 0:
        return np.ones_like(base)
    return np.power(base, m)


@dataclass
class _Sums:
    w: np.ndarray   # p_1..p_a
    L: np.ndarray   # L[s], s = 0..a
    U: np.ndarray   # U[s], s = 1..a+1 (index 0 holds 1)

    @property
    def a(self):
        return self.w.size


def _compensated_cumsum(x: np.ndarray) -> np.ndarray:
    out = np.empty(x.size)
    s = c = 0.0
    for i, v in enumerate(x.tolist()):
        t = s + v
        c += (s - t) + v if abs(s) >= abs(v) else (v - t) + s
        s = t
        out[i] = s + c
    return out


def _sums(p) -> _Sums:
    w = coerce_p(p).weights
    L = np.concatenate([[0.0], _compensated_cumsum(w)])
    U = np.concatenate([[1.0], _compensated_cumsum(w[::-1])[::-1], [0.0]])
    return _Sums(w, L, U)


def _check_n(n, least, what):
    if int(n) != n or n < least:
        raise DomainError(f"{what} needs n >= {least}, got n={n}")


def _check_k(n, k):
    if int(k) != k or not 0 <= k <= n - 1:
        raise DomainError(f"k must lie in [0, n-1] = [0, {n - 1}], got k={k}")


def _check_a(a, least=1):
    if int(a) != a or a < least:
        raise DomainError(f"pile count must be an integer >= {least}, got a={a}")


# ---- harmonic numbers -------------------------------------------------------------

def harmonic(n: int) -> float:
    """H_n = 1 + 1/2 + ... + 1/n, H_0 = 0."""
    if n < 0:
        raise DomainError(f"harmonic number of negative order {n}")
    if n == 0:
        return 0.0
    return _fsum(1.0 / np.arange(n, 0, -1, dtype=np.float64))


def harmonic2(n: int) -> float:
    """Second-order harmonic number, sum of 1/i**2."""
    if n < 0:
        raise DomainError(f"harmonic number of negative order {n}")
    if n == 0:
        return 0.0
    i = np.arange(n, 0, -1, dtype=np.float64)
    return _fsum(1.0 / (i * i))


# ---- number of branches (root degree) ---------------------------------------------

def expected_branches(n: int, p) -> float:
    _check_n(n, 2, "the branch mean")
    S = _sums(p)
    a = S.a
    s = np.arange(1, a)
    terms = S.w[:-1] / S.L[s] * _one_minus_pow(S.L[s], n - 1)
    return _fsum(np.append(terms, S.w[-1]))


def expected_branches_uniform(n: int, a: int) -> float:
    _check_n(n, 2, "the branch mean")
    _check_a(a)
    s = np.arange(1, a, dtype=np.float64)
    terms = _one_minus_pow(s / a, n - 1) / s
    return _fsum(np.append(terms, 1.0 / a))


def expected_branches_limit(p) -> float:
    """n -> infinity: sum of p_s / L_s."""
    S = _sums(p)
    return _fsum(S.w / S.L[1:])


def expected_branches_uniform_limit(a: int) -> float:
    """n -> infinity with a uniform piles: H_a."""
    _check_a(a)
    return harmonic(a)


def expected_branches_urt(n: int) -> float:
    """a -> infinity (uniform recursive tree): H_{n-1}."""
    _check_n(n, 2, "the branch mean")
    return harmonic(n - 1)


def _blocked_sum(nrows: int, ncols: int, block) -> float:
    """Sum of the (nrows, ncols) array whose rows ``sl`` are ``block(sl)``.

    Small arrays are built whole and summed exactly; large ones a band of rows at a
    time (numpy's pairwise sum per band, compensated across bands) so memory stays
    bounded.  Every caller sums terms of one sign, so per-band rounding stays relative.
    """
    if nrows * ncols <= 1 << 22:
        return _fsum(block(slice(0, nrows)))
    step = max(1, (1 << 21) // max(ncols, 1))
    return _fsum([float(np.sum(block(slice(lo, min(nrows, lo + step)))))
                  for lo in range(0, nrows, step)])


def _power_gap(lg_rows, lg_cols, gap, rel, m):
    """``(T_r**m - T_s**m) / gap[s, r]`` where ``gap > 0``, else 0.

    ``lg_rows = log T_s``, ``lg_cols = log T_r`` and ``rel[s, r] = T_r / T_s - 1`` (known
    accurately).  Close powers use expm1 to avoid cancellation; far apart ones are
    subtracted directly.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        x = m * np.log1p(rel)
        near = np.exp(m * lg_rows)[:, None] * np.expm1(np.minimum(x, 1.0))
        far = np.exp(m * lg_cols)[None, :] - np.exp(m * lg_rows)[:, None]
        return np.where(gap > 0, np.where(x <= 1.0, near, far) / gap, 0.0)


def variance_branches(n: int, p) -> float:
    _check_n(n, 3, "the branch variance")
    S = _sums(p)
    a = S.a
    if a == 1:
        return 0.0
    k = a - 1
    idx = np.arange(1, a)           # s = 1..a-1
    P = S.w[:-1]
    Ls = S.L[idx]
    T = S.U[idx + 1]
    lg = np.log(T)
    pl = P / Ls
    om1 = _one_minus_pow(Ls, n - 1)
    om3 = _one_minus_pow(Ls, n - 3)
    PT = P * T
    before = np.concatenate([[0.0], np.cumsum(pl)[:-1]])   # sum_{r<s} p_r / L_r

    def geo(m, sl):
        """sum_{j<m} (T_s T_r)^j for s in rows sl and every r."""
        if m == 0:
            return np.zeros((len(range(k)[sl]), k))
        comp = Ls[sl, None] + Ls[None, :] * T[sl, None]   # 1 - T_s T_r
        return -np.expm1(m * (lg[sl, None] + lg[None, :])) / comp

    m = n - 3

    def diff_term(sl):
        # (T_r^m - T_s^m) / (T_r - T_s) for r < s, with T_r - T_s = L_s - L_r
        if m == 0:
            return np.zeros((len(range(k)[sl]), k))
        gap = Ls[sl, None] - Ls[None, :]
        dd = _power_gap(lg[sl], lg, gap, gap / T[sl, None], m)
        lower = np.arange(k)[None, :] < np.arange(k)[sl, None]
        return PT[sl, None] * (PT / Ls)[None, :] * dd * lower

    terms = [
        _fsum(pl * om1),
        -_fsum(P),
        -_blocked_sum(k, k, lambda sl: np.outer(PT[sl], PT) * geo(n - 2, sl)),
        2 * _fsum(PT / Ls * before * om3),
        -2 * _blocked_sum(k, k, diff_term),
        -2 * _blocked_sum(k, k, lambda sl: PT[sl, None] * (pl * T * T)[None, :] * geo(n - 3, sl)),
        2 * _fsum(pl * T * om3) * _fsum(pl * np.exp((n - 1) * lg)),
    ]
    return _fsum(terms)


def variance_branches_uniform(n: int, a: int) -> float:
    """Same quantity specialised to p_s = 1/a; O(a^2) work, memory bounded."""
    _check_n(n, 3, "the branch variance")
    _check_a(a)
    if a == 1:
        return 0.0
    k = a - 1
    s = np.arange(1, a, dtype=np.float64)
    f = (a - s) / a
    lg = np.log(f)
    om1 = _one_minus_pow(s / a, n - 1)
    om3 = _one_minus_pow(s / a, n - 3)

    def geo(m, sl):
        if m == 0:
            return np.zeros((len(range(k)[sl]), k))
        # 1 - f_s f_r = (a^2 - (a-s)(a-r)) / a^2, exact in integers
        comp = (a * a - np.outer(a - s[sl], a - s)) / (a * a)
        return -np.expm1(m * (lg[sl, None] + lg[None, :])) / comp

    inv = 1.0 / s
    before = np.concatenate([[0.0], np.cumsum(inv)[:-1]])   # H_{s-1}
    m = n - 3

    def diff_term(sl):
        if m == 0:
            return np.zeros((len(range(k)[sl]), k))
        gap = s[sl, None] - s[None, :]                        # s - r
        dd = _power_gap(lg[sl], lg, gap, gap / (a - s[sl])[:, None], m)
        return ((a - s[sl]) / a**2)[:, None] * ((a - s) / s)[None, :] * dd

    terms = [
        _fsum(inv * om1),
        -(a - 1) / a,
        -_blocked_sum(k, k, lambda sl: np.outer(f[sl], f) * geo(n - 2, sl)) / a**2,
        2 * _fsum((a - s) / (a * s) * before * om3),
        -2 * _blocked_sum(k, k, diff_term),
        -2 * _blocked_sum(k, k, lambda sl: ((a - s[sl]) / a**2)[:, None] * (inv * f * f)[None, :]
                          * geo(n - 3, sl)),
        2 * _fsum((a - s) / (s * a) * om3) * _fsum(inv * np.exp((n - 1) * lg)),
    ]
    return _fsum(terms)


def variance_branches_limit(p) -> float:
    """n -> infinity limit of the branch variance."""
    S = _sums(p)
    a = S.a
    if a == 1:
        return 0.0
    k = a - 1
    idx = np.arange(1, a)
    P = S.w[:-1]
    Ls = S.L[idx]
    T = S.U[idx + 1]
    pl = P / Ls
    PT = P * T
    before = np.concatenate([[0.0], np.cumsum(pl)[:-1]])

    def comp(sl):
        return Ls[sl, None] + Ls[None, :] * T[sl, None]

    terms = [
        _fsum(pl),
        -_fsum(P),
        -_blocked_sum(k, k, lambda sl: np.outer(PT[sl], PT) / comp(sl)),
        2 * _fsum(PT / Ls * before),
        -2 * _blocked_sum(k, k, lambda sl: PT[sl, None] * (pl * T * T)[None, :] / comp(sl)),
    ]
    return _fsum(terms)


def variance_branches_uniform_limit(a: int) -> float:
    _check_a(a)
    return variance_branches_limit(ProbabilityVector.uniform(a))


def variance_branches_urt(n: int) -> float:
    """a -> infinity: H_{n-1} - H^(2)_{n-1}."""
    _check_n(n, 2, "the branch variance")
    return harmonic(n - 1) - harmonic2(n - 1)


# ---- nodes with at least k descendants ----------------------------------------------

def indicator_mean(k: int, p) -> float:
    """P(a card's digit is <= the next k digits) = sum_s p_s U_s^k."""
    S = _sums(p)
    return _fsum(S.w * _pow(S.U[1:-1], k))


def _uniform_power_mean(k: int, a: int) -> float:
    """(1/a) sum_{s<=a} (s/a)^k."""
    return _fsum(_pow(np.arange(1, a + 1) / a, k)) / a


def expected_at_least_k(n: int, k: int, p) -> float:
    _check_n(n, 2, "the at-least-k mean")
    _check_k(n, k)
    return (n - k - 1) * indicator_mean(k, p) + 1.0


def expected_at_least_k_uniform(n: int, k: int, a: int) -> float:
    _check_n(n, 2, "the at-least-k mean")
    _check_k(n, k)
    _check_a(a)
    return (n - k - 1) * _uniform_power_mean(k, a) + 1.0


def expected_at_least_k_urt(n: int, k: int) -> float:
    _check_n(n, 2, "the at-least-k mean")
    _check_k(n, k)
    return n / (k + 1)


def expected_at_least_k_slope(k: int, p) -> float:
    """lim E/n."""
    return indicator_mean(k, p)


def variance_at_least_k(n: int, k: int, p) -> float:
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    _check_n(n, 2 * k + 2, f"the at-least-k variance with k={k}")
    S = _sums(p)
    ck = S.w * _pow(S.U[1:-1], k)
    c = _fsum(ck)
    inner = np.cumsum(ck[::-1])[::-1]            # sum_{r>=s} p_r U_r^k
    terms = [c * (n - k - 1), c * S.w[0] * (2 * n * k - 3 * k * (k + 1)),
             -c * c * (n * (2 * k + 1) - (3 * k + 1) * (k + 1))]
    if S.a > 1:
        comp = S.L[1:-1]                         # 1 - U_s = L_{s-1}, s = 2..a
        om = _one_minus_pow(comp, k)             # 1 - U_s^k
        geo = om / comp                          # sum_{j<k} U_s^j
        bracket = (n - 2 * k - 1) * om + k - geo
        terms.append(2 * _fsum(S.w[1:] / comp * inner[1:] * bracket))
    return _fsum(terms)


def variance_at_least_k_uniform(n: int, k: int, a: int) -> float:
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    _check_n(n, 2 * k + 2, f"the at-least-k variance with k={k}")
    _check_a(a)
    c = _uniform_power_mean(k, a)
    terms = [c * ((n - k - 1) + (2 * n * k - 3 * k * (k + 1)) / a),
             -c * c * (n * (2 * k + 1) - (3 * k + 1) * (k + 1))]
    if a > 1:
        s = np.arange(2, a + 1, dtype=np.float64)
        psum = np.cumsum(_pow(np.arange(1, a + 1) / a, k))   # psum[j-1] = sum_{r<=j} (r/a)^k
        top = psum[(a - s + 1).astype(np.int64) - 1]
        om = _one_minus_pow((s - 1) / a, k)
        geo = om * a / (s - 1)
        bracket = (n - 2 * k - 1) * om + k - geo
        terms.append(_fsum(2.0 / (a * (s - 1)) * top * bracket))
    return _fsum(terms)


def variance_at_least_k_slope(k: int, p) -> float:
    """lim Var/n for fixed p."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    S = _sums(p)
    ck = S.w * _pow(S.U[1:-1], k)
    c = _fsum(ck)
    inner = np.cumsum(ck[::-1])[::-1]
    terms = [c * (2 * k * S.w[0] + 1 - (2 * k + 1) * c)]
    if S.a > 1:
        comp = S.L[1:-1]
        terms.append(2 * _fsum(S.w[1:] / comp * inner[1:] * _one_minus_pow(comp, k)))
    return _fsum(terms)


def variance_at_least_k_uniform_slope(k: int, a: int) -> float:
    """lim Var/n with a uniform piles."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    _check_a(a)
    c = _uniform_power_mean(k, a)
    terms = [c * (1 + 2 * k / a - (2 * k + 1) * c)]
    if a > 1:
        s = np.arange(1, a, dtype=np.float64)
        psum = np.cumsum(_pow(np.arange(1, a + 1) / a, k))
        top = psum[(a - s).astype(np.int64) - 1]             # sum_{j<=a-s} (j/a)^k
        terms.append(2.0 / a * _fsum(top / s * _one_minus_pow(s / a, k)))
    return _fsum(terms)


def variance_at_least_k_urt_slope(k: int) -> float:
    """lim Var/n of the uniform recursive tree."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    return (1 + 2 * harmonic(2 * k + 1) - 2 * harmonic(k + 1)) / (k + 1) - (2 * k + 1) / (k + 1) ** 2


def variance_at_least_k_urt(n: int, k: int) -> float:
    """Exact variance for the uniform recursive tree (a -> infinity at fixed n)."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    _check_n(n, 2 * k + 2, f"the at-least-k variance with k={k}")
    terms = [(n - k - 1) / (k + 1),
             -2 * (n - k - 1) / (k + 1) * harmonic(k + 1),
             2 * (n - 2 * k - 1) / (k + 1) * harmonic(2 * k + 1),
             2 / (k + 1) * _fsum([harmonic(k + j + 1) for j in range(k)]),
             -(n * (2 * k + 1) - (3 * k + 1) * (k + 1)) / (k + 1) ** 2]
    return _fsum(terms)


# ---- nodes with exactly k descendants -------------------------------------------------

def expected_exactly_k(n: int, k: int, p) -> float:
    _check_n(n, 2, "the exactly-k mean")
    _check_k(n, k)
    if k == n - 1:
        return 1.0   # only the root
    c0, c1 = indicator_mean(k, p), indicator_mean(k + 1, p)
    return (n - k - 1) * (c0 - c1) + c1


def expected_exactly_k_uniform(n: int, k: int, a: int) -> float:
    _check_n(n, 2, "the exactly-k mean")
    _check_k(n, k)
    _check_a(a)
    if k == n - 1:
        return 1.0
    c0, c1 = _uniform_power_mean(k, a), _uniform_power_mean(k + 1, a)
    return (n - k - 1) * (c0 - c1) + c1


def expected_exactly_k_urt(n: int, k: int) -> float:
    _check_n(n, 2, "the exactly-k mean")
    _check_k(n, k)
    return 1.0 if k == n - 1 else n / ((k + 1) * (k + 2))


def exactly_k_limit(k: int, p) -> float:
    """Almost-sure limit of (count with exactly k descendants) / n."""
    return indicator_mean(k, p) - indicator_mean(k + 1, p)


def exactly_k_limit_uniform(k: int, a: int) -> float:
    _check_a(a)
    return _uniform_power_mean(k, a) - _uniform_power_mean(k + 1, a)


def pair_moment(i: int, j: int, k: int, p) -> float:
    """E[C_i C_j] for the window indicators C_i = [X_i <= min(X_{i+1}, ..., X_{i+k})], i < j.

    Windows that do not overlap (j > i + k) are independent.
    """
    if not i < j:
        raise DomainError(f"need i < j, got i={i}, j={j}")
    if j > i + k:
        return indicator_mean(k, p) ** 2
    return _pair(k, k, j - i, _sums(p))


def _pair(m1: int, m2: int, d: int, S: _Sums) -> float:
    """E[C_i^{m1} C_{i+d}^{m2}] for 1 <= d <= m1 <= d + m2."""
    U = S.U[1:-1]
    inner = np.cumsum((S.w * _pow(U, m2))[::-1])[::-1]
    return _fsum(S.w * _pow(U, d - 1) * inner)


def _window_sum_variance(N: int, m: int, S: _Sums) -> float:
    """Var of sum_{i in I} C_i^m over a run I of N consecutive positions."""
    if N <= 0:
        return 0.0
    c = _fsum(S.w * _pow(S.U[1:-1], m))
    terms = [N * (c - c * c)]
    for d in range(1, m + 1):
        if N - d > 0:
            terms.append(2 * (N - d) * (_pair(m, m, d, S) - c * c))
    return _fsum(terms)


def variance_exactly_k_indicators(n: int, k: int, p) -> float:
    """Exact variance of the exactly-k count from the window-indicator covariances.

    The count is ``sum_{i=2}^{n-k} C_i^k - sum_{i=2}^{n-k-1} C_i^{k+1}`` (root terms
    cancel); only pairs of indicators less than k + 2 cards apart are correlated.
    """
    _check_n(n, 2, "the exactly-k variance")
    _check_k(n, k)
    S = _sums(p)
    n1, n2 = n - k - 1, n - k - 2
    ck = _fsum(S.w * _pow(S.U[1:-1], k))
    ck1 = _fsum(S.w * _pow(S.U[1:-1], k + 1))
    cov = []
    if n2 > 0:
        cov.append(n2 * (ck1 - ck * ck1))
    for d in range(1, k + 1):          # C^k at i, C^{k+1} at i + d
        cnt = n2 - d
        if cnt > 0:
            cov.append(cnt * (_pair(k, k + 1, d, S) - ck * ck1))
    for d in range(1, k + 2):          # C^{k+1} at i, C^k at i + d
        cnt = min(n2, n1 - d)
        if cnt > 0:
            cov.append(cnt * (_pair(k + 1, k, d, S) - ck * ck1))
    return _fsum([_window_sum_variance(n1, k, S), _window_sum_variance(n2, k + 1, S),
                  -2 * _fsum(cov)])


def variance_exactly_k_uniform(n: int, k: int, a: int) -> float:
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    _check_n(n, 2 * k + 4, f"the exactly-k variance with k={k}")
    _check_a(a)
    return variance_exactly_k_indicators(n, k, ProbabilityVector.uniform(a))


# ---- normal approximation ---------------------------------------------------------

def wasserstein_clt_bound(k: int, sigma: float) -> float:
    """Wasserstein distance bound between the standardised at-least-k count and N(0,1)."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    m = 2 * k + 1
    return m / sigma * (m + math.sqrt(28.0) * math.sqrt(m) / math.sqrt(math.pi))


# ---- position and depth of node n ------------------------------------------------------

def position_pmf(n: int, k: int, p) -> float:
    """P(n sits at position k), positions counted with the sentinel 1 at position 1."""
    _check_n(n, 2, "the position law")
    if int(k) != k or not 2 <= k <= n:
        raise DomainError(f"position must lie in [2, n] = [2, {n}], got {k}")
    S = _sums(p)
    if k == n:
        return _fsum(S.w * _pow(S.L[1:], n - 2))
    return _fsum(S.w[1:] * _pow(S.L[2:], k - 2) * _pow(S.L[1:-1], n - k))


def position_distribution(n: int, p) -> np.ndarray:
    """pmf over positions 2..n."""
    return np.array([position_pmf(n, k, p) for k in range(2, n + 1)])


def _depth_core(n: int, w: np.ndarray, z: np.ndarray, y: np.ndarray, moment) -> float:
    """sum_s w_s [h_{n-2}(z_s, y_s) + sum_{m=0}^{n-3} h_m(z_s, y_s) M_{n-3-m}(s)].

    h_m is the complete homogeneous polynomial of degree m in two variables, computed by
    h_m = y h_{m-1} + z^m; ``moment(e)`` returns the vector M_e.  Every term is >= 0.
    """
    N = n - 3
    h = np.ones_like(y)
    zpow = np.ones_like(z)
    acc = []
    for mdeg in range(0, N + 1):
        if mdeg > 0:
            zpow = zpow * z
            h = y * h + zpow
        acc.append(w * h * moment(N - mdeg))
    zpow = zpow * z
    h = y * h + zpow                       # degree n - 2
    acc.append(w * h)
    return _fsum(np.concatenate(acc))


def expected_depth(n: int, p) -> float:
    """E[depth of node n].

    Given n sits at position j with digit s (it is the last card carrying the top digit),
    each earlier position is an ancestor iff its digit is <= all digits between it and n;
    summing these probabilities gives the polynomial form evaluated here.
    """
    _check_n(n, 3, "the depth mean")
    S = _sums(p)
    a = S.a
    z = S.L[:-1]          # L_{s-1}
    y = S.L[1:]           # L_s
    N = n - 3
    # M[e, s] = sum_{r <= s} p_r (p_r + ... + p_s)^e, built a block of rows at a time
    # so memory stays O(a) per row; the work is O(a^2 n)
    M = np.empty((N + 1, a))
    step = max(1, (1 << 22) // a)
    cols = np.arange(a)
    for lo in range(0, a, step):
        hi = min(a, lo + step)
        mask = cols[None, :] <= np.arange(lo, hi)[:, None]
        x = np.where(mask, y[lo:hi, None] - z[None, :], 0.0)
        wr = np.where(mask, S.w[None, :], 0.0)
        term = wr.copy()
        for e in range(N + 1):
            M[e, lo:hi] = term.sum(axis=1)
            term *= x

    return _depth_core(n, S.w, z, y, lambda e: M[e])


def expected_depth_uniform(n: int, a: int) -> float:
    """Uniform piles, O(n a) work; a = 1 is the path tree."""
    _check_n(n, 3, "the depth mean")
    _check_a(a)
    if a == 1:
        return float(n - 1)
    s = np.arange(1, a + 1, dtype=np.float64)
    w = np.full(a, 1.0 / a)
    frac = s / a

    def moment(e):
        # (1/a) sum_{j<=s} (j/a)^e
        return np.cumsum(_pow(frac, e)) / a

    return _depth_core(n, w, (s - 1) / a, frac, moment)


def expected_depth_slope(p) -> float:
    """lim E[depth]/n = p_1."""
    return float(coerce_p(p).weights[0])


def expected_depth_uniform_slope(a: int) -> float:
    _check_a(a)
    return 1.0 / a


def expected_depth_urt(n: int) -> float:
    """a -> infinity: H_{n-1}."""
    _check_n(n, 2, "the depth mean")
    return harmonic(n - 1)


# ---- total variation bounds -----------------------------------------------------------

def tv_bound_general(n: int, p) -> float:
    """C(n-1, 2) sum p_s^2 (may exceed 1; callers clamp)."""
    _check_n(n, 3, "the TV bound")
    w = coerce_p(p).weights
    return math.comb(n - 1, 2) * _fsum(w * w)


def tv_bound_uniform(n: int, a: int) -> float:
    """1 - a!/((a-n)! a^n), the chance that n uniform digits are not all distinct."""
    _check_n(n, 3, "the TV bound")
    _check_a(a)
    if a < n:
        raise DomainError(f"the uniform TV bound needs a >= n, got a={a} < n={n}")
    j = np.arange(1, n, dtype=np.float64)
    return float(-np.expm1(_fsum(np.log1p(-j / a))))


# ---- reports -------------------------------------------------------------------

MODELS = ("general-p", "uniform-a", "urt-limit")


@dataclass
class MomentReport:
    statistic: str
    n: int
    model: str
    params: dict
    mean: float | None = None
    variance: float | None = None
    k: int | None = None
    provenance: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _clamp(report: MomentReport):
    v = report.variance
    if v is None or v >= 0:
        return
    if v >= config.VARIANCE_FLOOR:
        report.flags.append(f"variance {v:.3e} clamped to 0")
        report.variance = 0.0
    else:
        report.flags.append(f"variance {v:.3e} below floor {config.VARIANCE_FLOOR}")
        warnings.warn(f"{report.statistic} variance {v!r} is below {config.VARIANCE_FLOOR}: "
                      "numerical cancellation", RuntimeWarning, stacklevel=3)


def moment_report(statistic, n: int, *, p=None, a: int | None = None, urt: bool = False,
                  k: int | None = None) -> MomentReport:
    """Closed-form mean and (when known) variance of a statistic under one model."""
    from .statistics import Statistic
    st = statistic if isinstance(statistic, Statistic) else Statistic.parse(str(statistic), k)
    if sum(x is not None and x is not False for x in (p, a, urt or None)) != 1:
        raise DomainError("give exactly one of p, a or urt")
    if urt:
        model, params = "urt-limit", {}
    elif a is not None:
        model, params = "uniform-a", {"a": int(a)}
    else:
        pv = coerce_p(p)
        model, params = "general-p", {"p": pv.tolist()}
    rep = MomentReport(st.label, int(n), model, params,
                       k=st.k if st.kind in ("atleast", "exactly") else None)
    kk = st.k
    tag = {"general-p": "", "uniform-a": "-uniform", "urt-limit": "-urt"}[model]

    def var_or_none(fn, *args):
        try:
            return fn(*args)
        except DomainError as exc:
            rep.flags.append(f"variance unavailable: {exc}")
            return None

    if st.kind == "branches":
        if model == "general-p":
            rep.mean = expected_branches(n, pv)
            rep.variance = var_or_none(variance_branches, n, pv)
        elif model == "uniform-a":
            rep.mean = expected_branches_uniform(n, a)
            rep.variance = var_or_none(variance_branches_uniform, n, a)
        else:
            rep.mean = expected_branches_urt(n)
            rep.variance = variance_branches_urt(n)
        rep.provenance = [f"branches-mean{tag}", f"branches-variance{tag}"]
    elif st.kind == "atleast":
        if model == "general-p":
            rep.mean = expected_at_least_k(n, kk, pv)
            rep.variance = var_or_none(variance_at_least_k, n, kk, pv)
        elif model == "uniform-a":
            rep.mean = expected_at_least_k_uniform(n, kk, a)
            rep.variance = var_or_none(variance_at_least_k_uniform, n, kk, a)
        else:
            rep.mean = expected_at_least_k_urt(n, kk)
            rep.variance = var_or_none(variance_at_least_k_urt, n, kk)
        rep.provenance = [f"atleast-mean{tag}", f"atleast-variance{tag}"]
    elif st.kind == "exactly":
        if model == "general-p":
            rep.mean = expected_exactly_k(n, kk, pv)
            rep.variance = var_or_none(variance_exactly_k_indicators, n, kk, pv)
        elif model == "uniform-a":
            rep.mean = expected_exactly_k_uniform(n, kk, a)
            rep.variance = var_or_none(variance_exactly_k_uniform, n, kk, a)
        else:
            rep.mean = expected_exactly_k_urt(n, kk)
            rep.flags.append("no closed-form variance in the URT limit")
        if rep.variance is not None:
            rep.provenance.append("exactly-variance-indicators" if model == "general-p"
                                  else "exactly-variance-uniform")
        rep.provenance.insert(0, f"exactly-mean{tag}")
    elif st.kind == "depth":
        if model == "general-p":
            rep.mean = expected_depth(n, pv)
        elif model == "uniform-a":
            rep.mean = expected_depth_uniform(n, a)
        else:
            rep.mean = expected_depth_urt(n)
        rep.provenance = [f"depth-mean{tag}"]
        rep.flags.append("no closed-form variance for the depth")
    else:  # position
        if model == "urt-limit":
            pmf = np.full(n - 1, 1.0 / (n - 1))
        else:
            pmf = position_distribution(n, pv if model == "general-p" else ProbabilityVector.uniform(a))
        ks = np.arange(2, n + 1)
        rep.mean = _fsum(pmf * ks)
        rep.variance = _fsum(pmf * (ks - rep.mean) ** 2)
        rep.provenance = [f"position-pmf{tag}"]
    _clamp(rep)
    return rep
