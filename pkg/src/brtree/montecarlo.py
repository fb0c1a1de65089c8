"""Sampling experiments at large n.

Samples are produced in fixed chunks of ``config.CHUNK_SIZE``; chunk ``c`` draws from
the stream keyed by ``derive_key(seed, c)``.  Chunk summaries are merged in chunk order,
so a report depends on the seed only, never on how many worker threads ran.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from . import config, formulas
from ._kernels import ERROR_MESSAGES, get_backend
from .errors import DomainError, InvariantViolation, ValidationError
from .rng import derive_key, digit_thresholds
from .shuffle import ProbabilityVector, coerce_p
from .statistics import Statistic


# ---- streaming moments -------------------------------------------------------------

@dataclass
class Moments:
    """Count, mean and central sums M2..M4; merged with the pairwise update formulas."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        x = np.asarray(values, dtype=np.float64)
        if x.size == 0:
            return cls()
        mu = float(x.mean())
        d = x - mu
        d2 = d * d
        return cls(int(x.size), mu, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        d_n = delta / n
        mean = self.mean + nb * d_n
        m2 = self.m2 + other.m2 + delta * d_n * na * nb
        m3 = (self.m3 + other.m3 + delta * d_n * d_n * na * nb * (na - nb)
              + 3 * d_n * (na * other.m2 - nb * self.m2))
        m4 = (self.m4 + other.m4
              + delta * d_n ** 3 * na * nb * (na * na - na * nb + nb * nb)
              + 6 * d_n * d_n * (na * na * other.m2 + nb * nb * self.m2)
              + 4 * d_n * (na * other.m3 - nb * self.m3))
        return Moments(n, mean, m2, m3, m4)

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def mean_se(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 0 else float("nan")

    @property
    def variance_se(self) -> float:
        """Large-sample standard error of the sample variance."""
        n = self.count
        if n < 4:
            return float("nan")
        mu4 = self.m4 / n
        s2 = self.m2 / n
        return math.sqrt(max(mu4 - s2 * s2 * (n - 3) / (n - 1), 0.0) / n)


@dataclass
class Estimate:
    value: float
    std_error: float
    half_width: float = field(init=False)

    def __post_init__(self):
        self.half_width = config.Z99 * self.std_error


@dataclass
class EstimateReport:
    statistic: str
    model: dict
    n: int
    samples: int
    seed: int
    workers: int
    mean: Estimate
    variance: Estimate
    wall_time: float
    backend: str
    closed_form: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def estimate(self) -> float:
        return self.mean.value

    @property
    def std_error(self) -> float:
        return self.mean.std_error

    @property
    def half_width(self) -> float:
        return self.mean.half_width

    def mean_z(self) -> float | None:
        """(estimate - closed form) in standard errors, when a closed form is known."""
        cf = self.closed_form.get("mean")
        if cf is None:
            return None
        if self.mean.std_error == 0:
            return 0.0 if self.mean.value == cf else math.inf
        return (self.mean.value - cf) / self.mean.std_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean_z"] = self.mean_z()
        return d


# ---- sampling engine --------------------------------------------------------------

def _model(p, urt: bool):
    if urt:
        if p is not None:
            raise ValidationError("give either p or urt=True, not both")
        return None, {"model": "urt"}
    pv = coerce_p(p)
    return pv, {"model": "brt", "p": pv.tolist()}


def _chunk_bounds(samples: int):
    size = config.CHUNK_SIZE
    return [(c, min(size, samples - c * size)) for c in range(-(-samples // size))]


def sample_values(n: int, p, statistic: Statistic, samples: int, seed: int, *,
                  urt: bool = False, workers: int | None = None, backend=None,
                  reducer=None):
    """Run every chunk through the kernel; ``reducer(values)`` is applied per chunk
    (default: keep the raw values).  Returns the per-chunk results in chunk order."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    pv, _ = _model(p, urt)
    kern = get_backend(backend)
    m = n - 1
    thr = digit_thresholds(pv.weights) if pv is not None else np.zeros(0, np.uint64)
    a = pv.a if pv is not None else 0
    every = config.SPOT_CHECK_EVERY

    def run(chunk):
        c, count = chunk
        vals, err = kern.sample_statistic(derive_key(seed, c), count, m, thr, statistic.code,
                                          statistic.k, every, a, urt)
        if err:
            raise InvariantViolation(f"chunk {c}: {ERROR_MESSAGES.get(err, err)}")
        return reducer(vals) if reducer else vals

    workers = config.default_workers() if workers is None else max(1, int(workers))
    chunks = _chunk_bounds(samples)
    if workers == 1:
        return [run(ch) for ch in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, chunks))


def closed_form_for(statistic: Statistic, n: int, pv: ProbabilityVector | None) -> dict:
    """Closed-form mean/variance for comparison, where one exists."""
    try:
        if pv is None:
            rep = formulas.moment_report(statistic, n, urt=True)
        elif pv.is_uniform:
            rep = formulas.moment_report(statistic, n, a=pv.a)
        else:
            rep = formulas.moment_report(statistic, n, p=pv)
    except DomainError:
        return {}
    out = {"mean": rep.mean, "variance": rep.variance, "provenance": rep.provenance}
    if statistic.kind == "atleast" and statistic.k <= n - 1:
        out["variance_slope"] = (formulas.variance_at_least_k_urt_slope(statistic.k) if pv is None
                                 else formulas.variance_at_least_k_slope(statistic.k, pv))
    return out


def estimate_moments(n: int, p, statistic, samples: int, seed: int = 0, workers: int | None = None,
                     *, urt: bool = False, k: int | None = None, backend=None) -> EstimateReport:
    """Mean and variance of a statistic with standard errors and 99% half-widths."""
    stat = statistic if isinstance(statistic, Statistic) else Statistic.parse(str(statistic), k)
    pv, model = _model(p, urt)
    workers = config.default_workers() if workers is None else max(1, int(workers))
    t0 = time.perf_counter()
    parts = sample_values(n, pv, stat, samples, seed, urt=urt, workers=workers,
                          backend=backend, reducer=Moments.of)
    mom = Moments()
    for part in parts:
        mom = mom.merge(part)
    wall = time.perf_counter() - t0
    return EstimateReport(
        statistic=stat.label, model=model, n=n, samples=samples, seed=seed, workers=workers,
        mean=Estimate(mom.mean, mom.mean_se), variance=Estimate(mom.variance, mom.variance_se),
        wall_time=wall, backend=get_backend(backend).NAME,
        closed_form=closed_form_for(stat, n, pv))


# ---- normality ------------------------------------------------------------------

@dataclass
class CLTReport:
    n: int
    k: int
    model: dict
    samples: int
    seed: int
    mean: float
    sigma: float
    ks_statistic: float
    ks_pvalue: float
    threshold: float
    passed: bool | None
    standardized_mean: float
    standardized_sd: float
    wasserstein_bound: float
    wasserstein_bound_4n: float
    bound_ratio: float
    wall_time: float
    kept: int

    def to_dict(self) -> dict:
        return asdict(self)


def _sigma(n: int, k: int, pv):
    if pv is None:
        return formulas.expected_at_least_k_urt(n, k), formulas.variance_at_least_k_urt(n, k)
    if pv.is_uniform:
        return (formulas.expected_at_least_k_uniform(n, k, pv.a),
                formulas.variance_at_least_k_uniform(n, k, pv.a))
    return formulas.expected_at_least_k(n, k, pv), formulas.variance_at_least_k(n, k, pv)


def clt_check(n: int, p, k: int, samples: int, seed: int = 0, *, urt: bool = False,
              workers: int | None = None, threshold: float = config.KS_THRESHOLD,
              diagnostic: bool = False, backend=None) -> CLTReport:
    """KS distance between the standardised at-least-k count and N(0, 1).

    Standardisation uses the exact mean and variance, not the sample ones.  In
    diagnostic mode the statistic is reported without a pass/fail verdict.
    """
    pv, model = _model(p, urt)
    mu, var = _sigma(n, k, pv)
    if not var > 0:
        raise DomainError(f"variance {var!r} is not positive at n={n}, k={k}")
    _, var4 = _sigma(4 * n, k, pv)
    sigma = math.sqrt(var)
    t0 = time.perf_counter()
    cap = config.KS_MAX_SAMPLES
    parts = sample_values(n, pv, Statistic("atleast", k), samples, seed, urt=urt,
                          workers=workers, backend=backend)
    z = np.concatenate(parts)[:cap].astype(np.float64)
    z = (z - mu) / sigma
    ks = sps.kstest(z, "norm")
    b1 = formulas.wasserstein_clt_bound(k, sigma)
    b4 = formulas.wasserstein_clt_bound(k, math.sqrt(var4))
    return CLTReport(
        n=n, k=k, model=model, samples=samples, seed=seed, mean=mu, sigma=sigma,
        ks_statistic=float(ks.statistic), ks_pvalue=float(ks.pvalue), threshold=threshold,
        passed=None if diagnostic else bool(ks.statistic < threshold),
        standardized_mean=float(z.mean()), standardized_sd=float(z.std()),
        wasserstein_bound=b1, wasserstein_bound_4n=b4, bound_ratio=b1 / b4,
        wall_time=time.perf_counter() - t0, kept=int(z.size))


# ---- strong law ------------------------------------------------------------------

@dataclass
class TrajectoryReport:
    k: int
    model: dict
    seed: int
    grid: list
    values: list
    limit: float
    final_gap: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _window_indicator(x: np.ndarray, k: int) -> np.ndarray:
    """ind[i] = x[i] <= min(x[i+1], ..., x[i+k]) for every i with a full window."""
    if k == 0:
        return np.ones(x.size, dtype=bool)
    if x.size <= k:
        return np.zeros(0, dtype=bool)
    win = np.lib.stride_tricks.sliding_window_view(x[1:], k).min(axis=1)
    return x[: win.size] <= win


def _at_least_along(counts: np.ndarray, ns: np.ndarray, k: int) -> np.ndarray:
    """Y_{>=k}(n) for every n in ns, from the prefix counts of the window indicator."""
    out = np.zeros(ns.size, dtype=np.int64)
    ok = k <= ns - 1
    last = ns - k - 1            # number of indicator positions 0..n-k-2
    out[ok] = 1 + np.where(last[ok] > 0, counts[np.maximum(last[ok], 1) - 1], 0)
    return out


def strong_law_trajectory(k: int, p, n_grid, seed: int = 0, tolerance: float = 0.005,
                          backend=None) -> TrajectoryReport:
    """(nodes with exactly k descendants) / n along one growing sample path.

    All orders share one digit stream: the tree of order n uses its first n - 1 digits.
    """
    pv = coerce_p(p)
    grid = np.asarray(sorted(set(int(g) for g in n_grid)), dtype=np.int64)
    if grid.size == 0 or grid[0] < 2:
        raise ValidationError("n-grid must be non-empty with every n >= 2")
    m = int(grid[-1]) - 1
    kern = get_backend(backend)
    digits = kern.sample_digits(derive_key(seed, 0), 0, 1, m, digit_thresholds(pv.weights))[0]
    c_k = np.cumsum(_window_indicator(digits, k))
    c_k1 = np.cumsum(_window_indicator(digits, k + 1))
    exact = _at_least_along(c_k, grid, k) - _at_least_along(c_k1, grid, k + 1)
    values = (exact / grid).tolist()
    limit = formulas.exactly_k_limit(k, pv)
    gap = abs(values[-1] - limit)
    return TrajectoryReport(k=k, model={"model": "brt", "p": pv.tolist()}, seed=seed,
                            grid=grid.tolist(), values=values, limit=limit, final_gap=gap,
                            tolerance=tolerance, passed=bool(gap <= tolerance))


# ---- closed-form limit sweeps -------------------------------------------------------

SWEEPS = {
    "branches-vs-n": "mean branch count against n, uniform a piles; limit H_a",
    "branches-vs-a": "mean branch count against a at fixed n; limit H_(n-1)",
    "branch-variance-vs-a": ("branch variance against a at fixed n; limit H_(n-1) - H2_(n-1)."
                             " Pass --grid with a = 2n to follow a and n together"),
    "depth-slope": "mean depth of n divided by n, against n; limit p_1",
    "depth-vs-a": "mean depth of n against a at fixed n; limit H_(n-1)",
    "atleast-variance-slope": "at-least-k variance divided by n, against n; limit the slope",
    "tv-uniform": "uniform TV bound against a at fixed n; limit 0",
}


@dataclass
class SweepReport:
    quantity: str
    fixed: dict
    rows: list

    def to_dict(self) -> dict:
        return asdict(self)

    def gaps(self) -> list:
        return [r["gap"] for r in self.rows]


def convergence_sweep(quantity: str, grid, *, n: int | None = None, a: int | None = None,
                      p=None, k: int = 1) -> SweepReport:
    """(parameter, closed-form value, limit, gap) rows showing a limit being approached."""
    if quantity not in SWEEPS:
        raise ValidationError(f"unknown sweep {quantity!r}; choose from {', '.join(SWEEPS)}")
    grid = [int(g) for g in grid]
    rows = []
    fixed: dict = {}

    def need(name, val):
        if val is None:
            raise ValidationError(f"sweep {quantity} needs {name}")
        return val

    if quantity == "branches-vs-n":
        a = need("a", a)
        fixed = {"a": a}
        limit = formulas.expected_branches_uniform_limit(a)
        for x in grid:
            rows.append((x, formulas.expected_branches_uniform(x, a), limit))
    elif quantity == "branches-vs-a":
        n = need("n", n)
        fixed = {"n": n}
        limit = formulas.expected_branches_urt(n)
        for x in grid:
            rows.append((x, formulas.expected_branches_uniform(n, x), limit))
    elif quantity == "branch-variance-vs-a":
        n = need("n", n)
        fixed = {"n": n}
        limit = formulas.variance_branches_urt(n)
        for x in grid:
            rows.append((x, formulas.variance_branches_uniform(n, x), limit))
    elif quantity == "depth-slope":
        pv = coerce_p(p if p is not None else need("p or a", a))
        fixed = {"p": pv.tolist()}
        limit = formulas.expected_depth_slope(pv)
        for x in grid:
            val = (formulas.expected_depth_uniform(x, pv.a) if pv.is_uniform
                   else formulas.expected_depth(x, pv))
            rows.append((x, val / x, limit))
    elif quantity == "depth-vs-a":
        n = need("n", n)
        fixed = {"n": n}
        limit = formulas.expected_depth_urt(n)
        for x in grid:
            rows.append((x, formulas.expected_depth_uniform(n, x), limit))
    elif quantity == "atleast-variance-slope":
        pv = coerce_p(p if p is not None else need("p or a", a))
        fixed = {"p": pv.tolist(), "k": k}
        limit = formulas.variance_at_least_k_slope(k, pv)
        for x in grid:
            rows.append((x, formulas.variance_at_least_k(x, k, pv) / x, limit))
    else:
        n = need("n", n)
        fixed = {"n": n}
        for x in grid:
            rows.append((x, formulas.tv_bound_uniform(n, x), 0.0))
    return SweepReport(quantity, fixed,
                       [{"param": x, "value": v, "limit": lim, "gap": abs(v - lim)}
                        for x, v, lim in rows])
