"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` (the summary lines appear at
the end of the pytest report) or as a script, ``python3 tests/test_acceptance.py``.
The Monte Carlo criteria take a few minutes.
"""
import itertools
import math
import sys
import time

import pytest

from brtree import formulas as F
from brtree import verification as V
from brtree.montecarlo import clt_check, estimate_moments, strong_law_trajectory
from brtree.oracle import exact_brt_distribution, exact_tree_distribution, exact_urt_distribution
from brtree.shuffle import (DigitWord, ProbabilityVector, ShufflePermutation,
                            forward_shuffle_distribution, inverse_shuffle_distribution,
                            permutation_from_digits, sorted_cards)
from brtree.statistics import count_anti_records, count_branches, depth_of_node_n
from brtree.tree import permutation_from_tree, tree_from_permutation

SEED = 42
RESULTS = []


def report(number, ok, detail):
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# 1 ----------------------------------------------------------------------------------

def test_criterion_1_formula_grid():
    t0 = time.perf_counter()
    cells = V.verify_grid(n_max=9, k_max=3)
    wall = time.perf_counter() - t0
    bad = [c for c in cells if not c.passed]
    skipped = [c for c in cells if c.skipped]
    worst = max(c.error for c in cells if c.error is not None)
    ok = not bad and not skipped and wall < 120
    report(1, ok, f"{len(cells)} cells, {len(bad)} failed, {len(skipped)} skipped, "
                  f"worst error {worst:.2e}, {wall:.1f}s")
    assert ok, bad[:5]


# 2 ----------------------------------------------------------------------------------

def test_criterion_2_two_pile_tree_law():
    law = exact_tree_distribution(4, 2)
    path = (1, 2, 3)
    atoms_ok = (len(law) == 5 and abs(law[path] - 0.5) <= 1e-12
                and all(abs(q - 0.125) <= 1e-12 for t, q in law.items() if t != path))
    mean = math.fsum(q * sum(1 for x in t if x == 1) for t, q in law.items())
    var = math.fsum(q * (sum(1 for x in t if x == 1) - mean) ** 2 for t, q in law.items())
    ok = atoms_ok and abs(mean - 11 / 8) <= 1e-12 and abs(var - 15 / 64) <= 1e-12
    report(2, ok, f"path {law.get(path)}, others {sorted(set(q for t, q in law.items() if t != path))}, "
                  f"mean {mean}, variance {var}")
    assert ok


# 3 ----------------------------------------------------------------------------------

def test_criterion_3_worked_examples():
    word = DigitWord([1, 2, 3, 1, 3, 1, 1])
    inv = "".join(map(str, sorted_cards(word)))
    gamma = permutation_from_digits(word)
    t4 = tree_from_permutation(gamma)
    t1 = tree_from_permutation(ShufflePermutation.parse("16387254"))
    depth = depth_of_node_n(tree_from_permutation(ShufflePermutation.parse("12574863")))
    checks = {
        "inverse": inv == "2578346",
        "gamma": gamma.format() == "2673845",
        "shuffle tree": t4.edges() == {(1, 2), (2, 3), (2, 6), (3, 4), (3, 8), (4, 5), (6, 7)},
        "step-by-step tree": t1.edges() == {(1, 2), (1, 3), (2, 4), (2, 5), (1, 6), (3, 7), (3, 8)},
        "depth of 8": depth == 3,
    }
    ok = all(checks.values())
    report(3, ok, ", ".join(f"{k} {'ok' if v else 'WRONG'}" for k, v in checks.items()))
    assert ok


# 4 ----------------------------------------------------------------------------------

def test_criterion_4_bijection_and_equivalence():
    trees = round_trips = records = 0
    for n in range(2, 9):
        for values in itertools.permutations(range(2, n + 1)):
            perm = ShufflePermutation(values)
            tree = tree_from_permutation(perm)
            trees += 1
            round_trips += permutation_from_tree(tree) == perm
            records += count_branches(tree) == count_anti_records(perm)
    worst = 0.0
    for n in range(2, 7):
        for a in (1, 2, 3):
            inv, fwd = inverse_shuffle_distribution(n, a), forward_shuffle_distribution(n, a)
            if set(inv) != set(fwd):
                worst = math.inf
                continue
            worst = max([worst] + [abs(q - fwd[k]) for k, q in inv.items()])
    ok = round_trips == trees and records == trees and worst <= 1e-12
    report(4, ok, f"{round_trips}/{trees} round trips, {records}/{trees} branch = anti-record, "
                  f"forward vs inverse max atom gap {worst:.1e}")
    assert ok


# 5 ----------------------------------------------------------------------------------

def test_criterion_5_limits():
    h9 = F.harmonic(9)
    grid = [10**3, 10**4, 10**5, 10**6]
    b_gaps = [abs(F.expected_branches_uniform(10, a) - h9) for a in grid]
    d_gaps = [abs(F.expected_depth_uniform(10, a) - h9) for a in grid]
    means_ok = all(g <= 10 / a for g, a in zip(b_gaps, grid)) and all(
        g <= 10 / a for g, a in zip(d_gaps, grid))
    # the variance evaluator is quadratic in a, so the trend is followed up to a = 10^4:
    # the gap must shrink at every step, at the 1/a rate
    target = F.variance_branches_urt(1000)
    v_grid = [10, 100, 1000, 10**4]
    v_gaps = [abs(F.variance_branches_uniform(1000, a) - target) for a in v_grid]
    scaled = [g * a for g, a in zip(v_gaps, v_grid)]
    trend_ok = (all(y < x for x, y in zip(v_gaps, v_gaps[1:]))
                and 0.5 <= scaled[-1] / scaled[-2] <= 2.0)
    urt_err = max(abs(exact_urt_distribution(n, "branches").variance()
                      - (F.harmonic(n - 1) - F.harmonic2(n - 1))) for n in range(2, 9))
    ok = means_ok and trend_ok and urt_err <= 1e-9
    report(5, ok, f"branch gaps x a {[round(g * a, 3) for g, a in zip(b_gaps, grid)]}, "
                  f"depth gaps x a {[round(g * a, 3) for g, a in zip(d_gaps, grid)]}, "
                  f"variance gap x a at n=1000 {[round(x, 1) for x in scaled]}, "
                  f"URT oracle variance error {urt_err:.1e}")
    assert ok


# 6 ----------------------------------------------------------------------------------

TV_P = [(0.5, 0.3, 0.2), (0.1, 0.2, 0.3, 0.4), (0.15, 0.15, 0.15, 0.15, 0.2, 0.2)]


def test_criterion_6_tv_bounds():
    checked = failed = 0
    tightest = 0.0
    for n in range(3, 8):
        for a in range(n, 13):
            for c in V.verify_tv(n, a, include_tree=False):
                checked += 1
                failed += not c.passed
                tightest = max(tightest, c.tv / c.bound)
    for p in TV_P:
        for n in range(3, 8):
            for c in V.verify_tv(n, p, include_tree=False):
                checked += 1
                failed += not c.passed
    ok = failed == 0
    report(6, ok, f"{checked} distances checked, {failed} above the bound, "
                  f"largest uniform TV/bound ratio {tightest:.3f}")
    assert ok


# 7 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_7_monte_carlo():
    t0 = time.perf_counter()
    p = ProbabilityVector([0.5, 0.3, 0.2])
    runs = {
        "branches": estimate_moments(1000, 3, "branches", 10**6, seed=SEED, workers=4),
        "atleast:2": estimate_moments(10**4, p, "atleast:2", 10**6, seed=SEED, workers=4),
        "depth": estimate_moments(1000, 2, "depth", 10**6, seed=SEED, workers=4),
    }
    wall = time.perf_counter() - t0
    zs = {k: r.mean_z() for k, r in runs.items()}
    y = runs["atleast:2"]
    slope = F.variance_at_least_k_slope(2, p)
    slope_rel = abs(y.variance.value / y.n - slope) / slope
    ok = all(abs(z) <= 4 for z in zs.values()) and slope_rel <= 0.05 and wall < 300
    report(7, ok, "z-scores " + ", ".join(f"{k} {z:+.2f}" for k, z in zs.items())
           + f", variance/n vs slope {slope_rel:.2%}, {wall:.0f}s")
    assert ok


# 8 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_clt():
    rep = clt_check(10**5, 3, 1, 10**6, seed=SEED, workers=4)
    ratio_ok = abs(rep.bound_ratio - 2.0) <= 0.1
    ok = bool(rep.passed) and ratio_ok
    report(8, ok, f"KS {rep.ks_statistic:.5f} (threshold {rep.threshold}), "
                  f"Wasserstein bound ratio n to 4n {rep.bound_ratio:.4f}, {rep.wall_time:.0f}s")
    assert ok


# 9 ----------------------------------------------------------------------------------

GRID_9 = [10**j for j in range(1, 7)]


def _trajectories():
    leaves = strong_law_trajectory(0, 2, GRID_9, seed=SEED)
    ones = strong_law_trajectory(1, 3, GRID_9, seed=SEED)
    return leaves, ones


def test_criterion_9_strong_law():
    """Targets 1/8 and 4/81 as stated for acceptance.

    These are not the limits of the two ratios: the limit expression gives 1/4 and 4/27
    (see the companion test below and the decisions ledger).  This test is expected to
    fail and is kept as a faithful record of the criterion.
    """
    leaves, ones = _trajectories()
    g1 = abs(leaves.values[-1] - 1 / 8)
    g2 = abs(ones.values[-1] - 4 / 81)
    ok = g1 <= 0.005 and g2 <= 0.005
    report(9, ok, f"leaves/n at 10^6 = {leaves.values[-1]:.6f} vs 1/8 (gap {g1:.4f}); "
                  f"one-descendant/n = {ones.values[-1]:.6f} vs 4/81 (gap {g2:.4f}); "
                  f"limit expression gives {leaves.limit:.6f} and {ones.limit:.6f}")
    assert ok


def test_criterion_9_strong_law_against_limit_expression():
    leaves, ones = _trajectories()
    exact = (abs(leaves.limit - 1 / 4) < 1e-15 and abs(ones.limit - 4 / 27) < 1e-15)
    ok = exact and leaves.passed and ones.passed
    report("9b", ok, f"leaves/n {leaves.values[-1]:.6f} vs 1/4 (gap {leaves.final_gap:.4f}); "
                     f"one-descendant/n {ones.values[-1]:.6f} vs 4/27 (gap {ones.final_gap:.4f})")
    assert ok


# 10 ---------------------------------------------------------------------------------

def test_criterion_10_pair_moments():
    pairs = 0
    worst = 0.0
    for k in (0, 1, 2):
        for a in (1, 2):
            rep, _ = V.verify_covariance(8, k, a)
            pairs += len(rep.pairs)
            worst = max(worst, rep.max_abs_deviation)
    ok = pairs > 0 and worst <= 1e-12
    report(10, ok, f"{pairs} dependent pairs (none exist for k=0), max deviation {worst:.1e}")
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in list(globals().items()) if k.startswith("test_")]
    failures = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
