"""Closed form against exhaustive enumeration, cell by cell.

Used by ``brtree verify`` and by the acceptance tests.  A cell passes when the relative
error is within ``REL_TOL``, or the absolute error within ``ABS_TOL`` for exact values
below ``SMALL_VALUE``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

from . import config, formulas
from .errors import ResourceLimitError
from .oracle import (exact_brt_distributions, exact_tree_distribution, exact_tv_distance,
                     exact_urt_distributions, oracle_covariance_check)
from .shuffle import ProbabilityVector, coerce_p

log = logging.getLogger(__name__)


@dataclass
class Cell:
    check: str          # e.g. "branches-variance-uniform"
    n: int
    k: int | None
    model: str
    closed_form: float | None
    exact: float | None
    error: float | None
    passed: bool
    skipped: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def close_enough(closed: float, exact: float) -> tuple:
    """(error, passed) under the grid tolerance rule."""
    if abs(exact) < config.SMALL_VALUE:
        err = abs(closed - exact)
        return err, err <= config.ABS_TOL
    err = abs(closed - exact) / abs(exact)
    return err, err <= config.REL_TOL


def _model_name(pv: ProbabilityVector) -> str:
    if pv.is_uniform:
        return f"uniform-a={pv.a}"
    return "p=(" + ",".join(f"{w:g}" for w in pv.tolist()) + ")"


def _cell(cells, check, n, k, model, closed, exact):
    err, ok = close_enough(closed, exact)
    cells.append(Cell(check, n, k, model, closed, exact, err, ok))


def verify_model(pv: ProbabilityVector, n_values, k_max: int, cap: int | None = None) -> list:
    """Every closed form that applies to this model, for every n and k <= k_max."""
    pv = coerce_p(pv)
    model = _model_name(pv)
    uni = pv.is_uniform
    a = pv.a
    cells: list = []
    for n in n_values:
        try:
            kk = range(0, min(k_max, n - 1) + 1)
            wanted = (["branches", "position", "depth"] + [f"atleast:{k}" for k in kk]
                      + [f"exactly:{k}" for k in kk])
            tables = exact_brt_distributions(n, pv, wanted, cap=cap)
            br, pos_t, dep = tables[:3]
            pos = pos_t.pmf()
            ys = dict(zip(kk, tables[3:3 + len(kk)]))
            xs = dict(zip(kk, tables[3 + len(kk):]))
        except ResourceLimitError as exc:
            log.warning("skipping %s n=%d: %s", model, n, exc)
            cells.append(Cell("all", n, None, model, None, None, None, True, skipped=str(exc)))
            continue

        _cell(cells, "branches-mean", n, None, model, formulas.expected_branches(n, pv), br.mean())
        if uni:
            _cell(cells, "branches-mean-uniform", n, None, model,
                  formulas.expected_branches_uniform(n, a), br.mean())
        if n >= 3:
            _cell(cells, "branches-variance", n, None, model,
                  formulas.variance_branches(n, pv), br.variance())
            if uni:
                _cell(cells, "branches-variance-uniform", n, None, model,
                      formulas.variance_branches_uniform(n, a), br.variance())
            _cell(cells, "depth-mean", n, None, model, formulas.expected_depth(n, pv), dep.mean())
            if uni:
                _cell(cells, "depth-mean-uniform", n, None, model,
                      formulas.expected_depth_uniform(n, a), dep.mean())
        for j in range(2, n + 1):
            _cell(cells, f"position-pmf@{j}", n, None, model,
                  formulas.position_pmf(n, j, pv), pos.get(j, 0.0))
        for k, y in ys.items():
            _cell(cells, "atleast-mean", n, k, model, formulas.expected_at_least_k(n, k, pv), y.mean())
            if uni:
                _cell(cells, "atleast-mean-uniform", n, k, model,
                      formulas.expected_at_least_k_uniform(n, k, a), y.mean())
            if n >= 2 * k + 2:
                _cell(cells, "atleast-variance", n, k, model,
                      formulas.variance_at_least_k(n, k, pv), y.variance())
                if uni:
                    _cell(cells, "atleast-variance-uniform", n, k, model,
                          formulas.variance_at_least_k_uniform(n, k, a), y.variance())
        for k, x in xs.items():
            _cell(cells, "exactly-mean", n, k, model, formulas.expected_exactly_k(n, k, pv), x.mean())
            _cell(cells, "exactly-variance", n, k, model,
                  formulas.variance_exactly_k_indicators(n, k, pv), x.variance())
            if uni:
                _cell(cells, "exactly-mean-uniform", n, k, model,
                      formulas.expected_exactly_k_uniform(n, k, a), x.mean())
                if n >= 2 * k + 4:
                    _cell(cells, "exactly-variance-uniform", n, k, model,
                          formulas.variance_exactly_k_uniform(n, k, a), x.variance())
    return cells


def default_models() -> list:
    return ([ProbabilityVector.uniform(a) for a in config.VERIFY_UNIFORM_A]
            + [ProbabilityVector(p) for p in config.VERIFY_EXTRA_P])


def verify_grid(n_max: int = config.VERIFY_NMAX, k_max: int = config.VERIFY_KMAX,
                models=None, cap: int | None = None) -> list:
    """The full small grid: n = 2..n_max, k <= k_max, for each model."""
    cells = []
    for pv in models if models is not None else default_models():
        cells.extend(verify_model(pv, range(2, n_max + 1), k_max, cap))
    return cells


def verify_urt(n_max: int = 8, k_max: int = config.VERIFY_KMAX, cap: int | None = None) -> list:
    """Uniform-recursive-tree limits against enumeration of all permutations."""
    cells = []
    for n in range(2, n_max + 1):
        kk = range(0, min(k_max, n - 1) + 1)
        tables = exact_urt_distributions(
            n, ["branches", "depth"] + [f"atleast:{k}" for k in kk] + [f"exactly:{k}" for k in kk],
            cap=cap)
        br, dep = tables[:2]
        _cell(cells, "urt-branches-mean", n, None, "urt", formulas.expected_branches_urt(n), br.mean())
        _cell(cells, "urt-branches-variance", n, None, "urt", formulas.variance_branches_urt(n),
              br.variance())
        if n >= 3:
            _cell(cells, "urt-depth-mean", n, None, "urt", formulas.expected_depth_urt(n), dep.mean())
        for k, y, x in zip(kk, tables[2:2 + len(kk)], tables[2 + len(kk):]):
            _cell(cells, "urt-atleast-mean", n, k, "urt", formulas.expected_at_least_k_urt(n, k), y.mean())
            if n >= 2 * k + 2:
                _cell(cells, "urt-atleast-variance", n, k, "urt",
                      formulas.variance_at_least_k_urt(n, k), y.variance())
            _cell(cells, "urt-exactly-mean", n, k, "urt", formulas.expected_exactly_k_urt(n, k), x.mean())
    return cells


@dataclass
class TVCheck:
    n: int
    model: str
    statistic: str
    tv: float
    bound: float
    bound_kind: str
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def verify_tv(n: int, p, cap: int | None = None, stats=None, include_tree: bool = True) -> list:
    """Exact TV between uniform-recursive-tree and p-biased laws against the bound.

    Uses the uniform bound when p is uniform with a >= n, else the general one (clamped
    at 1).  Checked for every at-least-k count and for the law of the whole tree.
    """
    pv = coerce_p(p)
    if pv.is_uniform and pv.a >= n:
        bound, kind = formulas.tv_bound_uniform(n, pv.a), "uniform"
    else:
        bound, kind = min(1.0, formulas.tv_bound_general(n, pv)), "general"
    model = _model_name(pv)
    ks = list(range(0, n) if stats is None else stats)
    names = [f"atleast:{k}" for k in ks]
    out = []
    for name, u, b in zip(names, exact_urt_distributions(n, names, cap=cap),
                          exact_brt_distributions(n, pv, names, cap=cap)):
        tv = exact_tv_distance(u, b)
        out.append(TVCheck(n, model, name, tv, bound, kind, tv <= bound + 1e-15))
    if not include_tree:
        return out
    brt_trees = exact_tree_distribution(n, pv, cap=cap)
    urt_mass = 1.0 / math.factorial(n - 1)
    # every increasing tree has probability 1/(n-1)! under the uniform model
    tv = 0.5 * math.fsum([abs(q - urt_mass) for q in brt_trees.values()]
                         + [urt_mass] * (math.factorial(n - 1) - len(brt_trees)))
    out.append(TVCheck(n, model, "tree", tv, bound, kind, tv <= bound + 1e-15))
    return out


def verify_covariance(n: int, k: int, p, cap: int | None = None, tol: float = 1e-12):
    rep = oracle_covariance_check(n, k, p, cap=cap)
    return rep, rep.passed(tol)
