"""Biased riffle shuffles of the cards 2..n, forward and inverse.

Conventions used everywhere in the package:

* ``n`` is the tree order; the shuffled cards are 2..n, so words and permutations
  have length ``n - 1``.  Position 1 always holds the sentinel label 1 and is never
  stored.
* Digits are 1-based (``1..a``) in the public types; kernels work with 0-based digits.
* A permutation is stored as the sequence ``(g(2), ..., g(n))``; the stable sort of the
  cards by digit is its inverse read as a sequence.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import config
from .errors import ResourceLimitError, ValidationError


def _frozen(arr, dtype=np.int64) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Pile weights ``p_1..p_a``: strictly positive, summing to one."""

    weights: np.ndarray

    def __init__(self, weights: Sequence[float]):
        w = np.array(weights, dtype=np.float64).ravel()
        if w.size < 1:
            raise ValidationError("a probability vector needs at least one pile")
        if not np.all(np.isfinite(w)):
            raise ValidationError(f"non-finite pile weight in {w.tolist()}")
        if np.any(w <= 0):
            bad = [i + 1 for i in np.flatnonzero(w <= 0)]
            raise ValidationError(f"pile weights must be > 0 (piles {bad} are not); "
                                  "use normalize_weights() to drop empty piles explicitly")
        total = math.fsum(w.tolist())
        if abs(total - 1.0) > config.SUM_TOL:
            raise ValidationError(f"pile weights sum to {total!r}, not 1 within {config.SUM_TOL}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, a: int) -> "ProbabilityVector":
        if int(a) < 1:
            raise ValidationError(f"pile count must be >= 1, got {a}")
        return cls(np.full(int(a), 1.0 / int(a)))

    @classmethod
    def parse(cls, text: str, normalize: bool = False) -> "ProbabilityVector":
        """Comma separated decimals, e.g. ``"0.5,0.3,0.2"``."""
        try:
            vals = [float(x) for x in text.replace(" ", "").split(",") if x]
        except ValueError as exc:
            raise ValidationError(f"cannot parse pile weights {text!r}") from exc
        return normalize_weights(vals) if normalize else cls(vals)

    @property
    def a(self) -> int:
        return int(self.weights.size)

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def prefix(self) -> np.ndarray:
        """``L[s] = p_1 + ... + p_s`` for s = 0..a (``L[0] = 0``)."""
        return np.concatenate([[0.0], np.cumsum(self.weights)])

    def suffix(self) -> np.ndarray:
        """``U[s] = p_s + ... + p_a`` for s = 1..a+1 (index 0 unused, ``U[a+1] = 0``)."""
        u = np.concatenate([np.cumsum(self.weights[::-1])[::-1], [0.0]])
        return np.concatenate([[1.0], u])

    def tolist(self) -> list:
        return self.weights.tolist()

    def __eq__(self, other):
        return isinstance(other, ProbabilityVector) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"ProbabilityVector({self.weights.tolist()})"


def normalize_weights(weights: Sequence[float]) -> ProbabilityVector:
    """Drop zero entries and rescale to sum 1.  Negative entries are still an error."""
    w = np.array(weights, dtype=np.float64).ravel()
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError(f"cannot normalize weights {w.tolist()}")
    w = w[w > 0]
    if w.size == 0:
        raise ValidationError("all weights are zero")
    w = w / math.fsum(w.tolist())
    # put the rounding residue on the largest entry so the sum check passes
    w[np.argmax(w)] += 1.0 - math.fsum(w.tolist())
    return ProbabilityVector(w)


def coerce_p(p) -> ProbabilityVector:
    """ProbabilityVector from a vector, a sequence, or an int meaning uniform over that many piles."""
    if isinstance(p, ProbabilityVector):
        return p
    if isinstance(p, (int, np.integer)):
        return ProbabilityVector.uniform(int(p))
    return ProbabilityVector(p)


@dataclass(frozen=True, eq=False)
class DigitWord:
    """Digits ``(d_2, ..., d_n)`` in ``1..a`` assigned to cards 2..n."""

    digits: np.ndarray
    a: int = field(default=0)

    def __init__(self, digits: Sequence[int], a: int | None = None):
        d = _frozen(digits)
        if d.ndim != 1 or d.size < 1:
            raise ValidationError("a digit word needs at least one digit (n >= 2)")
        top = int(d.max())
        a = top if a is None else int(a)
        if int(d.min()) < 1 or top > a:
            raise ValidationError(f"digits must lie in [1, {a}]")
        object.__setattr__(self, "digits", d)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return int(self.digits.size) + 1

    def __eq__(self, other):
        return isinstance(other, DigitWord) and np.array_equal(self.digits, other.digits)

    def __hash__(self):
        return hash(self.digits.tobytes())

    def __repr__(self):
        return f"DigitWord({self.digits.tolist()})"


@dataclass(frozen=True, eq=False)
class ShufflePermutation:
    """A permutation of 2..n stored as ``(g(2), ..., g(n))``; ``g(1) = 1`` is implicit."""

    values: np.ndarray

    def __init__(self, values: Sequence[int]):
        v = _frozen(values)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("a permutation of 2..n needs n >= 2")
        if not np.array_equal(np.sort(v), np.arange(2, v.size + 2)):
            raise ValidationError(f"{v.tolist()} is not a permutation of 2..{v.size + 1}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size) + 1

    def __call__(self, i: int) -> int:
        """Functional value g(i) for 1 <= i <= n."""
        return 1 if i == 1 else int(self.values[i - 2])

    def inverse(self) -> "ShufflePermutation":
        inv = np.empty_like(self.values)
        inv[self.values - 2] = np.arange(2, self.n + 1)
        return ShufflePermutation(inv)

    def sequence(self, with_sentinel: bool = False) -> list:
        vals = self.values.tolist()
        return [1] + vals if with_sentinel else vals

    @classmethod
    def identity(cls, n: int) -> "ShufflePermutation":
        return cls(np.arange(2, n + 1))

    @classmethod
    def parse(cls, text: str) -> "ShufflePermutation":
        """Read ``"2673845"``, ``"16387254"`` (leading sentinel dropped) or a spaced/comma list."""
        s = text.strip()
        if re.fullmatch(r"\d+", s):
            vals = [int(c) for c in s]
        else:
            vals = [int(x) for x in re.split(r"[\s,]+", s.strip("[]() ")) if x]
        if vals and vals[0] == 1:
            vals = vals[1:]
        return cls(vals)

    def format(self, with_sentinel: bool = False) -> str:
        """Compact digit string when every label is a single digit, else space separated."""
        seq = self.sequence(with_sentinel)
        if self.n <= 9:
            return "".join(map(str, seq))
        return " ".join(map(str, seq))

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"ShufflePermutation({self.format()!r})"

    def __eq__(self, other):
        return isinstance(other, ShufflePermutation) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


# ---- sampling -------------------------------------------------------------------

def sample_digit_word(n: int, p, rng=None) -> DigitWord:
    """I.i.d. digits with law p for the cards 2..n."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    pv = coerce_p(p)
    gen = as_generator(rng)
    cum = np.cumsum(pv.weights)
    u = gen.random(n - 1)
    d = np.minimum(np.searchsorted(cum, u, side="right"), pv.a - 1) + 1
    return DigitWord(d, a=pv.a)


def permutation_from_digits(word: DigitWord) -> ShufflePermutation:
    """Stable sort of the cards by digit gives the inverse; return the permutation itself."""
    order = np.argsort(word.digits, kind="stable")
    g = np.empty(order.size, dtype=np.int64)
    g[order] = np.arange(2, order.size + 2)
    return ShufflePermutation(g)


def sorted_cards(word: DigitWord) -> list:
    """Cards 2..n in stable digit order, i.e. the inverse permutation as a sequence."""
    return (np.argsort(word.digits, kind="stable") + 2).tolist()


def _deal(pattern: Sequence[int], sizes: Sequence[int]) -> list:
    """Cut 2..n into consecutive piles of the given sizes and deal them out following
    ``pattern`` (pattern[t] names the pile supplying the card at output position t)."""
    tops = [2 + sum(sizes[:s]) for s in range(len(sizes))]
    out = []
    for pile in pattern:
        out.append(tops[pile])
        tops[pile] += 1
    return out


def sample_forward_shuffle(n: int, p, rng=None) -> ShufflePermutation:
    """Cut into multinomial pile sizes, then pick one interleaving uniformly."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    pv = coerce_p(p)
    gen = as_generator(rng)
    sizes = gen.multinomial(n - 1, pv.weights)
    pattern = gen.permutation(np.repeat(np.arange(pv.a), sizes))
    return ShufflePermutation(_deal(pattern.tolist(), sizes.tolist()))


# ---- exhaustive enumeration -------------------------------------------------------

def check_cap(what: str, size: int, cap: int | None = None) -> int:
    cap = config.enum_cap() if cap is None else int(cap)
    if size > cap:
        raise ResourceLimitError(what, size, cap)
    return cap


def enumerate_digit_blocks(n: int, p, cap: int | None = None,
                           chunk: int = 1 << 16) -> Iterator[tuple]:
    """Every word of length n-1 in lexicographic order, in blocks.

    Yields ``(digits, weights)`` with ``digits`` a (rows, n-1) int array of 0-based digits
    and ``weights`` the product probabilities.
    """
    pv = coerce_p(p)
    a, m = pv.a, n - 1
    if m < 1:
        raise ValidationError(f"n must be >= 2, got {n}")
    total = a ** m
    check_cap(f"enumerating {a}^{m} digit words", total, cap)
    place = a ** np.arange(m - 1, -1, -1, dtype=np.int64)
    w = pv.weights
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % a
        yield digits, np.prod(w[digits], axis=1)


def enumerate_digit_words(n: int, p, cap: int | None = None) -> Iterator[tuple]:
    """Every digit word with its probability ``prod p_{d_i}``, lexicographically."""
    a = coerce_p(p).a
    for digits, weights in enumerate_digit_blocks(n, p, cap):
        for row, wt in zip(digits, weights.tolist()):
            yield DigitWord(row + 1, a=a), wt


def inverse_shuffle_distribution(n: int, p, cap: int | None = None) -> dict:
    """Exact law of the permutation built by sorting i.i.d. digits."""
    acc: dict = {}
    for word, wt in enumerate_digit_words(n, p, cap):
        key = tuple(permutation_from_digits(word).values.tolist())
        acc.setdefault(key, []).append(wt)
    return {k: math.fsum(v) for k, v in acc.items()}


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _interleavings(sizes: list):
    """All distinct arrangements of the multiset with ``sizes[s]`` copies of pile s."""
    if sum(sizes) == 0:
        yield ()
        return
    for s, c in enumerate(sizes):
        if c:
            sizes[s] -= 1
            for rest in _interleavings(sizes):
                yield (s,) + rest
            sizes[s] += 1


def forward_shuffle_distribution(n: int, p, cap: int | None = None) -> dict:
    """Exact law of the cut-and-interleave construction, built without digit sorting."""
    pv = coerce_p(p)
    m = n - 1
    check_cap(f"enumerating interleavings of {m} cards into {pv.a} piles", pv.a ** m, cap)
    acc: dict = {}
    for sizes in _compositions(m, pv.a):
        # P(cut sizes) = multinomial coefficient * prod p^b, shared evenly by the
        # coefficient-many interleavings
        each = math.prod(float(w) ** b for w, b in zip(pv.weights.tolist(), sizes))
        for pattern in _interleavings(list(sizes)):
            key = tuple(_deal(pattern, sizes))
            acc.setdefault(key, []).append(each)
    return {k: math.fsum(v) for k, v in acc.items()}


def all_permutations(n: int, cap: int | None = None) -> Iterator[ShufflePermutation]:
    """Every permutation of 2..n, lexicographically."""
    check_cap(f"enumerating {n - 1}! permutations", math.factorial(n - 1),
              config.urt_cap() if cap is None else cap)
    for perm in itertools.permutations(range(2, n + 1)):
        yield ShufflePermutation(perm)
