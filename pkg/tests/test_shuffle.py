import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from brtree.errors import ResourceLimitError, ValidationError
from brtree.shuffle import (DigitWord, ProbabilityVector, ShufflePermutation, coerce_p,
                            enumerate_digit_words, forward_shuffle_distribution,
                            inverse_shuffle_distribution, normalize_weights,
                            permutation_from_digits, sample_digit_word,
                            sample_forward_shuffle, sorted_cards)

import brute


def test_worked_example_digit_word():
    word = DigitWord([1, 2, 3, 1, 3, 1, 1])
    assert word.n == 8
    assert "".join(map(str, sorted_cards(word))) == "2578346"
    g = permutation_from_digits(word)
    assert g.format() == "2673845"
    assert g.inverse().format() == "2578346"


def test_probability_vector_validation():
    with pytest.raises(ValidationError):
        ProbabilityVector([0.5, 0.6])
    with pytest.raises(ValidationError):
        ProbabilityVector([1.0, 0.0])
    with pytest.raises(ValidationError):
        ProbabilityVector([])
    with pytest.raises(ValidationError):
        ProbabilityVector.uniform(0)
    with pytest.raises(ValidationError):
        ProbabilityVector.parse("0.5,abc")


def test_parse_and_normalize():
    pv = ProbabilityVector.parse("0.33333333,0.33333333,0.33333334")
    assert pv.a == 3 and not pv.is_uniform
    with pytest.raises(ValidationError):
        ProbabilityVector.parse("1,1")
    assert ProbabilityVector.parse("1,1", normalize=True) == ProbabilityVector.uniform(2)
    assert normalize_weights([2, 6, 2]).tolist() == [0.2, 0.6, 0.2]
    assert coerce_p(4) == ProbabilityVector.uniform(4)
    assert ProbabilityVector.uniform(3).is_uniform


def test_digit_word_rejects_out_of_range():
    with pytest.raises(ValidationError):
        DigitWord([1, 4], a=3)
    with pytest.raises(ValidationError):
        DigitWord([0, 1])


def test_permutation_parse_and_format():
    p = ShufflePermutation.parse("16387254")
    assert p.n == 8 and p(2) == 6
    assert p.format(with_sentinel=True) == "16387254"
    assert ShufflePermutation.parse("6 3 8 7 2 5 4") == p
    big = ShufflePermutation(list(range(2, 13)))
    assert ShufflePermutation.parse(big.format()) == big
    with pytest.raises(ValidationError):
        ShufflePermutation([2, 2, 3])


@given(st.lists(st.integers(1, 4), min_size=1, max_size=40))
def test_permutation_from_digits_is_a_stable_sort(digits):
    g = permutation_from_digits(DigitWord(digits))
    vals = g.values.tolist()
    assert sorted(vals) == list(range(2, len(digits) + 2))
    assert vals == brute.naive_gamma(digits)
    # equal digits keep their order, smaller digits come first
    for s in range(len(digits)):
        for t in range(s + 1, len(digits)):
            assert (vals[s] < vals[t]) == (digits[s] <= digits[t])


@given(st.lists(st.integers(2, 30), min_size=1, max_size=1).flatmap(
    lambda n: st.permutations(list(range(2, n[0] + 1)))))
def test_inverse_round_trip(values):
    if not values:
        return
    p = ShufflePermutation(values)
    assert p.inverse().inverse() == p
    assert [p.inverse()(p(i)) for i in range(2, p.n + 1)] == list(range(2, p.n + 1))


def test_samplers_are_seeded():
    a = sample_digit_word(30, [0.2, 0.3, 0.5], np.random.default_rng(5))
    b = sample_digit_word(30, [0.2, 0.3, 0.5], np.random.default_rng(5))
    assert a == b
    f1 = sample_forward_shuffle(30, 3, np.random.default_rng(1))
    f2 = sample_forward_shuffle(30, 3, np.random.default_rng(1))
    assert f1 == f2 and sorted(f1.values.tolist()) == list(range(2, 31))


def test_digit_sampler_frequencies():
    word = sample_digit_word(200_001, [0.5, 0.3, 0.2], np.random.default_rng(0))
    freq = np.bincount(word.digits, minlength=4)[1:] / 200_000
    assert np.allclose(freq, [0.5, 0.3, 0.2], atol=0.005)


def test_enumeration_weights_sum_to_one():
    words = list(enumerate_digit_words(5, [0.5, 0.3, 0.2]))
    assert len(words) == 3 ** 4
    assert math.isclose(math.fsum(w for _, w in words), 1.0, abs_tol=1e-14)


def test_enumeration_cap():
    with pytest.raises(ResourceLimitError):
        list(enumerate_digit_words(12, 3, cap=1000))


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("p", [1, 2, 3, (0.5, 0.3, 0.2), (0.1, 0.9)])
def test_forward_and_inverse_shuffle_laws_agree(n, p):
    inv = inverse_shuffle_distribution(n, p)
    fwd = forward_shuffle_distribution(n, p)
    assert set(inv) == set(fwd)
    for perm, q in inv.items():
        assert abs(q - fwd[perm]) <= 1e-12


def test_uniform_one_pile_is_identity():
    assert inverse_shuffle_distribution(5, 1) == {(2, 3, 4, 5): 1.0}
