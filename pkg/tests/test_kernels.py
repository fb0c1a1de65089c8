import numpy as np
import pytest
from hypothesis import given, strategies as st

from brtree import config
from brtree._kernels import (STAT_AT_LEAST, STAT_BRANCHES, STAT_DEPTH, STAT_EXACTLY,
                             STAT_POSITION, get_backend)
from brtree.rng import GOLDEN, derive_key, digit_thresholds, splitmix64, stream_words
from brtree.shuffle import ProbabilityVector

STATS = [(STAT_BRANCHES, 0), (STAT_AT_LEAST, 1), (STAT_AT_LEAST, 3), (STAT_AT_LEAST, 9),
         (STAT_EXACTLY, 0), (STAT_EXACTLY, 2), (STAT_DEPTH, 0), (STAT_POSITION, 0)]


def test_splitmix_reference_value():
    # first output of the reference generator seeded with 0
    assert splitmix64(GOLDEN) == 0xE220A8397B1DCDAF
    assert int(stream_words(0, np.array([0]))[0]) == 0xE220A8397B1DCDAF


def test_keys_differ_by_path():
    assert derive_key(1, 0) != derive_key(1, 1) != derive_key(2, 0)
    assert derive_key(7, 3) == derive_key(7, 3)


def test_thresholds():
    thr = digit_thresholds([0.5, 0.25, 0.25])
    assert thr.tolist() == [2**31, 3 * 2**30]
    assert digit_thresholds([1.0]).size == 0


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("BRTREE_NO_NUMBA", "1")
    assert config.numba_disabled()
    assert get_backend().NAME == "numpy"
    monkeypatch.delenv("BRTREE_NO_NUMBA")
    assert get_backend().NAME == "numba"
    with pytest.raises(ValueError):
        get_backend("fortran")


@pytest.mark.parametrize("m", [1, 2, 3, 8, 33])
@pytest.mark.parametrize("a", [1, 2, 3, 7, 40])
def test_backends_sample_identically(m, a):
    thr = digit_thresholds(ProbabilityVector.uniform(a).weights)
    key = derive_key(11, m, a)
    fast, slow = get_backend("numba"), get_backend("numpy")
    assert np.array_equal(fast.sample_digits(key, 5, 40, m, thr), slow.sample_digits(key, 5, 40, m, thr))
    for code, k in STATS:
        v1, e1 = fast.sample_statistic(key, 300, m, thr, code, k, 1, a, False)
        v2, e2 = slow.sample_statistic(key, 300, m, thr, code, k, 1, a, False)
        assert e1 == e2 == 0
        assert np.array_equal(v1, v2)


@pytest.mark.parametrize("m", [1, 4, 25])
def test_backends_agree_on_continuous_keys(m):
    key = derive_key(5, m)
    fast, slow = get_backend("numba"), get_backend("numpy")
    assert np.array_equal(fast.sample_keys(key, 0, 20, m), slow.sample_keys(key, 0, 20, m))
    for code, k in STATS:
        v1, e1 = fast.sample_statistic(key, 200, m, np.zeros(0, np.uint64), code, k, 1, 0, True)
        v2, e2 = slow.sample_statistic(key, 200, m, np.zeros(0, np.uint64), code, k, 1, 0, True)
        assert e1 == e2 == 0 and np.array_equal(v1, v2)


def test_block_offsets_are_consistent():
    thr = digit_thresholds([0.2, 0.3, 0.5])
    kern = get_backend("numba")
    whole = kern.sample_digits(99, 0, 10, 17, thr)
    assert np.array_equal(whole[4:7], kern.sample_digits(99, 4, 3, 17, thr))


def test_digit_frequencies():
    thr = digit_thresholds([0.5, 0.3, 0.2])
    d = get_backend().sample_digits(derive_key(0), 0, 2000, 101, thr).ravel()
    freq = np.bincount(d, minlength=3) / d.size
    assert np.allclose(freq, [0.5, 0.3, 0.2], atol=0.005)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=50))
def test_tree_utilities_agree(digits):
    fast, slow = get_backend("numba"), get_backend("numpy")
    keys = np.asarray(digits, dtype=np.uint64) * np.uint64(1 << 40) + np.arange(len(digits), dtype=np.uint64)
    g1, g2 = fast.gamma_from_keys(keys), slow.gamma_from_keys(keys)
    assert np.array_equal(g1, g2)
    par = fast.parents_from_sequence(g1)
    assert np.array_equal(par, slow.parents_from_sequence(g1))
    assert np.array_equal(fast.descendants_from_parents(par), slow.descendants_from_parents(par))
    assert np.array_equal(fast.depths_from_parents(par), slow.depths_from_parents(par))
    assert np.array_equal(fast.sequence_from_parents(par), slow.sequence_from_parents(par))
    assert np.array_equal(fast.sequence_from_parents(par), g1)
