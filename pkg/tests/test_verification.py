import pytest

from brtree import verification as V
from brtree.shuffle import ProbabilityVector


def test_close_enough_rule():
    assert V.close_enough(1.0 + 5e-10, 1.0)[1]
    assert not V.close_enough(1.0 + 5e-9, 1.0)[1]
    assert V.close_enough(1e-4 + 5e-13, 1e-4)[1]
    assert not V.close_enough(1e-4 + 5e-12, 1e-4)[1]


def test_small_grid_passes():
    cells = V.verify_grid(n_max=6, k_max=2)
    assert cells and all(c.passed for c in cells)
    checks = {c.check for c in cells}
    assert {"branches-variance-uniform", "atleast-variance", "exactly-variance-uniform",
            "depth-mean", "position-pmf@4"} <= checks


def test_skipped_cells_are_reported_not_failed():
    cells = V.verify_grid(n_max=9, k_max=1, models=[ProbabilityVector.uniform(3)], cap=500)
    skipped = [c for c in cells if c.skipped]
    assert [c.n for c in skipped] == [7, 8, 9]
    assert all(c.passed for c in cells)


def test_urt_cells():
    cells = V.verify_urt(n_max=7)
    assert all(c.passed for c in cells)


@pytest.mark.parametrize("n,p", [(5, 6), (4, (0.5, 0.3, 0.2)), (5, 3)])
def test_tv_checks(n, p):
    out = V.verify_tv(n, p)
    assert all(c.passed for c in out)
    assert out[-1].statistic == "tree"
    # the whole-tree distance dominates every statistic's distance
    assert all(c.tv <= out[-1].tv + 1e-15 for c in out)


def test_covariance():
    rep, ok = V.verify_covariance(8, 2, 2)
    assert ok and len(rep.pairs) == 7
