"""Exact laws of tree statistics by exhaustive enumeration.

The oracle deliberately takes the long way round: every digit word (or permutation)
is turned into an actual tree (stable sort, nearest-smaller-left parents, descendant
pass) and the statistic is read off that tree.  The fast samplers use digit-window
shortcuts instead, so agreement between the two is a real check.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import UsageError, ValidationError
from .formulas import pair_moment
from .shuffle import check_cap, coerce_p, enumerate_digit_blocks
from .statistics import Statistic


@dataclass
class DistributionTable:
    """Exact law of an integer statistic."""

    model: str                  # "brt" or "urt"
    n: int
    params: dict
    statistic: str
    support: list
    prob: list

    def __post_init__(self):
        if len(self.support) != len(self.prob):
            raise ValidationError("support and probabilities differ in length")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValidationError("support must be strictly increasing")
        if any(x < 0 for x in self.prob):
            raise ValidationError("negative probability in table")
        total = math.fsum(self.prob)
        if abs(total - 1.0) > config.WEIGHT_TOL:
            raise ValidationError(f"probabilities sum to {total!r}")

    def pmf(self) -> dict:
        return dict(zip(self.support, self.prob))

    def mean(self) -> float:
        return math.fsum(x * q for x, q in zip(self.support, self.prob))

    def variance(self) -> float:
        mu = self.mean()
        return math.fsum((x - mu) ** 2 * q for x, q in zip(self.support, self.prob))

    def to_dict(self) -> dict:
        return {"model": self.model, "n": self.n, "params": self.params,
                "statistic": self.statistic, "support": list(self.support),
                "prob": list(self.prob)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DistributionTable":
        d = json.loads(text)
        return cls(d["model"], d["n"], d["params"], d["statistic"], d["support"], d["prob"])


# ---- batch tree construction ---------------------------------------------------------

def ranks_from_digits(digits: np.ndarray) -> np.ndarray:
    """Row-wise stable ranks: the permutation values g(2..n) for every word."""
    order = np.argsort(digits, axis=1, kind="stable")
    g = np.empty_like(order)
    rows = np.arange(digits.shape[0])[:, None]
    g[rows, order] = np.arange(2, digits.shape[1] + 2)[None, :]
    return g


def parents_from_permutations(g: np.ndarray) -> np.ndarray:
    """Parent array (rows, n+1), indexed by label, for every permutation row.

    Each entry attaches to the nearest smaller entry on its left, 1 if there is none.
    """
    rows, m = g.shape
    n = m + 1
    par = np.zeros((rows, n + 1), dtype=np.int64)
    r = np.arange(rows)
    for s in range(m):
        found = np.ones(rows, dtype=np.int64)
        open_ = np.ones(rows, dtype=bool)
        for t in range(s - 1, -1, -1):
            hit = open_ & (g[:, t] < g[:, s])
            found[hit] = g[hit, t]
            open_ &= ~hit
        par[r, g[:, s]] = found
    return par


def _descendants(par: np.ndarray) -> np.ndarray:
    rows, n1 = par.shape
    n = n1 - 1
    desc = np.zeros((rows, n + 1), dtype=np.int64)
    r = np.arange(rows)
    for v in range(n, 1, -1):
        desc[r, par[:, v]] += desc[:, v] + 1
    return desc


def _depth_of_n(par: np.ndarray) -> np.ndarray:
    rows, n1 = par.shape
    n = n1 - 1
    r = np.arange(rows)
    cur = np.full(rows, n)
    d = np.zeros(rows, dtype=np.int64)
    for _ in range(n - 1):
        live = cur != 1
        d += live
        cur = np.where(live, par[r, cur], 1)
    return d


def statistic_of_trees(stat: Statistic, g: np.ndarray, par: np.ndarray) -> np.ndarray:
    n = g.shape[1] + 1
    if stat.kind == "branches":
        return np.count_nonzero(par[:, 2:] == 1, axis=1)
    if stat.kind == "depth":
        return _depth_of_n(par)
    if stat.kind == "position":
        return np.argmax(g == n, axis=1) + 2
    desc = _descendants(par)[:, 1:]
    if stat.kind == "atleast":
        return np.count_nonzero(desc >= stat.k, axis=1)
    return np.count_nonzero(desc == stat.k, axis=1)


def _accumulate(acc: dict, values: np.ndarray, weights: np.ndarray):
    for v in np.unique(values).tolist():
        acc.setdefault(v, []).append(math.fsum(weights[values == v].tolist()))


def _table(model, n, params, stat, acc) -> DistributionTable:
    support = sorted(acc)
    return DistributionTable(model, n, params, stat.label, support,
                             [math.fsum(acc[v]) for v in support])


def _as_stat(statistic, k=None) -> Statistic:
    return statistic if isinstance(statistic, Statistic) else Statistic.parse(str(statistic), k)


# ---- public operations ----------------------------------------------------------------

def exact_brt_distributions(n: int, p, statistics, cap: int | None = None) -> list:
    """Laws of several statistics of the p-biased tree from one pass over all a^(n-1)
    digit words."""
    pv = coerce_p(p)
    stats = [_as_stat(s) for s in statistics]
    accs: list = [{} for _ in stats]
    for digits, weights in enumerate_digit_blocks(n, pv, cap):
        g = ranks_from_digits(digits)
        par = parents_from_permutations(g)
        for stat, acc in zip(stats, accs):
            _accumulate(acc, statistic_of_trees(stat, g, par), weights)
    return [_table("brt", n, {"p": pv.tolist()}, s, acc) for s, acc in zip(stats, accs)]


def exact_brt_distribution(n: int, p, statistic, k: int | None = None,
                           cap: int | None = None) -> DistributionTable:
    """Law of a statistic of the p-biased tree, summed over all a^(n-1) digit words."""
    return exact_brt_distributions(n, p, [_as_stat(statistic, k)], cap)[0]


def _all_permutation_rows(n: int, cap: int | None) -> np.ndarray:
    check_cap(f"enumerating {n - 1}! permutations", math.factorial(n - 1),
              config.urt_cap() if cap is None else cap)
    return np.array(list(itertools.permutations(range(2, n + 1))), dtype=np.int64).reshape(-1, n - 1)


def exact_urt_distributions(n: int, statistics, cap: int | None = None) -> list:
    g = _all_permutation_rows(n, cap)
    par = parents_from_permutations(g)
    out = []
    for stat in map(_as_stat, statistics):
        vals = statistic_of_trees(stat, g, par)
        acc: dict = {}
        _accumulate(acc, vals, np.full(vals.size, 1.0 / vals.size))
        out.append(_table("urt", n, {}, stat, acc))
    return out


def exact_urt_distribution(n: int, statistic, k: int | None = None,
                           cap: int | None = None) -> DistributionTable:
    """Law of a statistic of the uniform recursive tree (all (n-1)! permutations)."""
    return exact_urt_distributions(n, [_as_stat(statistic, k)], cap)[0]


def exact_tree_distribution(n: int, p, cap: int | None = None) -> dict:
    """Law of the whole tree: ``{parents (p(2), ..., p(n)): probability}``."""
    pv = coerce_p(p)
    keys, wts = [], []
    for digits, weights in enumerate_digit_blocks(n, pv, cap):
        par = parents_from_permutations(ranks_from_digits(digits))[:, 2:]
        # parents are < n, so base-n digits give a collision-free key
        keys.append(par @ (n ** np.arange(n - 1, dtype=np.int64)))
        wts.append(weights)
    key = np.concatenate(keys)
    w = np.concatenate(wts)
    order = np.argsort(key, kind="stable")
    key, w = key[order], w[order]
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    out = {}
    for lo, hi in zip(starts, np.r_[starts[1:], key.size]):
        code = int(key[lo])
        parents = tuple((code // n ** i) % n for i in range(n - 1))
        out[parents] = math.fsum(w[lo:hi].tolist())
    return dict(sorted(out.items()))


def exact_tv_distance(d1: DistributionTable, d2: DistributionTable) -> float:
    """Half the L1 distance between two tables of the same statistic and order."""
    if d1.statistic != d2.statistic or d1.n != d2.n:
        raise UsageError(f"cannot compare {d1.statistic} at n={d1.n} with {d2.statistic} at n={d2.n}")
    p1, p2 = d1.pmf(), d2.pmf()
    return 0.5 * math.fsum(abs(p1.get(x, 0.0) - p2.get(x, 0.0)) for x in set(p1) | set(p2))


@dataclass
class CovarianceReport:
    n: int
    k: int
    params: dict
    pairs: list = field(default_factory=list)

    @property
    def max_abs_deviation(self) -> float:
        return max((row["abs_dev"] for row in self.pairs), default=0.0)

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_abs_deviation <= tol

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "params": self.params, "pairs": self.pairs,
                "max_abs_deviation": self.max_abs_deviation}


def oracle_covariance_check(n: int, k: int, p, cap: int | None = None,
                            include_independent: bool = False) -> CovarianceReport:
    """Compare the closed-form E[C_i C_j] with enumeration for every dependent pair.

    ``C_i`` is read off the tree: the node at position i has at least k descendants.
    Dependent pairs are 2 <= i < j <= i + k <= n - k; with ``include_independent`` the
    pairs with j > i + k (still j <= n - k) are reported as well.
    """
    pv = coerce_p(p)
    report = CovarianceReport(n, k, {"p": pv.tolist()})
    pairs = [(i, j) for i in range(2, n - k + 1) for j in range(i + 1, n - k + 1)
             if include_independent or j <= i + k]
    if not pairs:
        return report
    sums = {pair: [] for pair in pairs}
    for digits, weights in enumerate_digit_blocks(n, pv, cap):
        g = ranks_from_digits(digits)
        desc = _descendants(parents_from_permutations(g))
        rows = np.arange(g.shape[0])
        # C[:, i - 2] is the indicator for position i
        C = np.stack([desc[rows, g[:, i - 2]] >= k for i in range(2, n - k + 1)], axis=1)
        for (i, j) in pairs:
            both = C[:, i - 2] & C[:, j - 2]
            sums[(i, j)].append(math.fsum(weights[both].tolist()))
    for (i, j) in pairs:
        exact = math.fsum(sums[(i, j)])
        closed = pair_moment(i, j, k, pv)
        report.pairs.append({"i": i, "j": j, "closed_form": closed, "enumerated": exact,
                             "abs_dev": abs(closed - exact), "dependent": j <= i + k})
    return report
