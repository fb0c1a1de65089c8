import math
from fractions import Fraction

import pytest

from brtree.errors import ResourceLimitError, UsageError, ValidationError
from brtree.oracle import (DistributionTable, exact_brt_distribution, exact_brt_distributions,
                           exact_tree_distribution, exact_tv_distance, exact_urt_distribution,
                           oracle_covariance_check)

import brute

P = (0.5, 0.3, 0.2)
P_EXACT = [Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)]


def test_two_pile_tree_law_at_four_nodes():
    law = exact_tree_distribution(4, 2)
    assert len(law) == 5
    assert abs(law[(1, 2, 3)] - 0.5) <= 1e-12        # the path
    for parents, q in law.items():
        if parents != (1, 2, 3):
            assert abs(q - 0.125) <= 1e-12
    br = exact_brt_distribution(4, 2, "branches")
    assert abs(br.mean() - 11 / 8) <= 1e-12 and abs(br.variance() - 15 / 64) <= 1e-12


@pytest.mark.parametrize("stat,k", [("branches", 0), ("atleast", 1), ("atleast", 2),
                                    ("exactly", 0), ("exactly", 1), ("depth", 0),
                                    ("position", 0)])
@pytest.mark.parametrize("n,w", [(5, P_EXACT), (6, [Fraction(1, 3)] * 3), (6, [Fraction(1, 2)] * 2)])
def test_oracle_matches_fraction_brute_force(stat, k, n, w):
    table = exact_brt_distribution(n, [float(x) for x in w], stat, k=k)
    ref = brute.brt_law(n, w, stat, k)
    assert set(table.support) == set(ref)
    for x, q in table.pmf().items():
        assert abs(q - float(ref[x])) <= 1e-14


@pytest.mark.parametrize("stat,k", [("branches", 0), ("atleast", 2), ("exactly", 1), ("depth", 0)])
def test_urt_oracle_matches_brute_force(stat, k):
    table = exact_urt_distribution(6, stat, k=k)
    ref = brute.urt_law(6, stat, k)
    for x, q in table.pmf().items():
        assert abs(q - float(ref[x])) <= 1e-15


def test_single_pass_matches_separate_calls():
    many = exact_brt_distributions(6, P, ["branches", "atleast:1", "depth"])
    assert many[1].pmf() == exact_brt_distribution(6, P, "atleast", k=1).pmf()
    assert [t.statistic for t in many] == ["branches", "atleast:1", "depth"]


def test_table_validation_and_json():
    t = exact_brt_distribution(5, P, "position")
    again = DistributionTable.from_json(t.to_json())
    assert again == t
    with pytest.raises(ValidationError):
        DistributionTable("brt", 3, {}, "branches", [1, 2], [0.5, 0.4])
    with pytest.raises(ValidationError):
        DistributionTable("brt", 3, {}, "branches", [2, 1], [0.5, 0.5])


def test_caps():
    with pytest.raises(ResourceLimitError):
        exact_brt_distribution(10, 3, "branches", cap=1000)
    with pytest.raises(ResourceLimitError):
        exact_urt_distribution(10, "branches")


def test_tv_distance():
    u = exact_urt_distribution(5, "branches")
    assert exact_tv_distance(u, u) == 0
    b = exact_brt_distribution(5, 1, "branches")
    assert math.isclose(exact_tv_distance(u, b), 1 - u.pmf()[1])
    with pytest.raises(UsageError):
        exact_tv_distance(u, exact_urt_distribution(5, "depth"))


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("p", [1, 2, P])
def test_pair_moments(k, p):
    rep = oracle_covariance_check(8, k, p, include_independent=True)
    assert rep.pairs and rep.passed(1e-12)
    assert any(not row["dependent"] for row in rep.pairs)


def test_no_pairs_gives_empty_report():
    rep = oracle_covariance_check(3, 2, 2)
    assert rep.pairs == [] and rep.passed()
