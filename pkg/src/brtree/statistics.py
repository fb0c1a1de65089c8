"""Per-tree and per-permutation statistics.

All passes are single sweeps over the parent array or the permutation, without
recursion, so they work at n = 10**7.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import (STAT_AT_LEAST, STAT_BRANCHES, STAT_DEPTH, STAT_EXACTLY,
                       STAT_POSITION, get_backend)
from .errors import ValidationError
from .shuffle import ShufflePermutation
from .tree import RecursiveTree


def count_branches(tree: RecursiveTree) -> int:
    """Degree of the root."""
    return int(np.count_nonzero(tree.parents == 1))


def count_anti_records(perm: ShufflePermutation) -> int:
    """Entries smaller than everything before them (the first entry always counts)."""
    v = perm.values
    prev_min = np.minimum.accumulate(v)
    return 1 + int(np.count_nonzero(v[1:] < prev_min[:-1]))


def descendant_counts(tree: RecursiveTree, backend=None) -> np.ndarray:
    """Descendants of every node; entry ``v - 1`` belongs to node ``v``."""
    return get_backend(backend).descendants_from_parents(tree.parent_array())[1:]


def count_at_least_k(tree: RecursiveTree, k: int) -> int:
    """Nodes (root included) with at least k descendants; 0 when k > n - 1."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    return int(np.count_nonzero(descendant_counts(tree) >= k))


def count_exactly_k(tree: RecursiveTree, k: int) -> int:
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    return int(np.count_nonzero(descendant_counts(tree) == k))


def depth_of_node_n(tree: RecursiveTree) -> int:
    """Edges on the path from n up to the root."""
    par = tree.parent_array()
    v, d = tree.n, 0
    while v != 1:
        v = int(par[v])
        d += 1
    return d


def position_of_n(perm: ShufflePermutation) -> int:
    """Position of the largest label, counting the sentinel 1 as position 1."""
    return int(np.flatnonzero(perm.values == perm.n)[0]) + 2


def depth_via_antirecords(perm: ShufflePermutation) -> int:
    """Running minima met when scanning left from n's position down to the sentinel."""
    seq = perm.sequence(with_sentinel=True)
    pos = position_of_n(perm) - 1
    low = seq[pos]
    d = 0
    for t in range(pos - 1, -1, -1):
        if seq[t] < low:
            d += 1
            low = seq[t]
    return d


@dataclass
class TreeStatistics:
    branches: int
    subtree_sizes: np.ndarray  # descendant counts, entry v-1 for node v
    depth_of_n: int
    position_of_n: int | None = None

    def at_least(self, k: int) -> int:
        return int(np.count_nonzero(self.subtree_sizes >= k))

    def exactly(self, k: int) -> int:
        return int(np.count_nonzero(self.subtree_sizes == k))


def tree_statistics(tree: RecursiveTree, perm: ShufflePermutation | None = None) -> TreeStatistics:
    """All statistics in one go; the position needs the permutation and is read off it
    (or recovered from the tree when omitted)."""
    if perm is None and tree.n >= 2:
        from .tree import permutation_from_tree
        perm = permutation_from_tree(tree)
    return TreeStatistics(
        branches=count_branches(tree),
        subtree_sizes=descendant_counts(tree),
        depth_of_n=depth_of_node_n(tree),
        position_of_n=position_of_n(perm) if perm is not None else None,
    )


# ---- statistic selectors shared by the oracle and the Monte Carlo engine -------------

KINDS = ("branches", "atleast", "exactly", "depth", "position")
_CODES = {"branches": STAT_BRANCHES, "atleast": STAT_AT_LEAST, "exactly": STAT_EXACTLY,
          "depth": STAT_DEPTH, "position": STAT_POSITION}
_ALIASES = {"branch": "branches", "at-least": "atleast", "at_least": "atleast",
            "exact": "exactly", "depth-of-n": "depth", "position-of-n": "position"}


@dataclass(frozen=True)
class Statistic:
    """One of the supported statistics; ``k`` only matters for atleast / exactly."""

    kind: str
    k: int = 0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValidationError(f"unknown statistic {self.kind!r}; choose from {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        if self.k < 0:
            raise ValidationError(f"k must be >= 0, got {self.k}")
        if kind not in ("atleast", "exactly"):
            object.__setattr__(self, "k", 0)

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> "Statistic":
        """``"branches"``, ``"atleast:2"``, ``"exactly"`` with ``k=1``..."""
        name, _, kk = text.partition(":")
        return cls(name, int(kk) if kk else (k or 0))

    @property
    def code(self) -> int:
        return _CODES[self.kind]

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.k}" if self.kind in ("atleast", "exactly") else self.kind

    def of_tree(self, tree: RecursiveTree, perm: ShufflePermutation | None = None) -> int:
        if self.kind == "branches":
            return count_branches(tree)
        if self.kind == "atleast":
            return count_at_least_k(tree, self.k)
        if self.kind == "exactly":
            return count_exactly_k(tree, self.k)
        if self.kind == "depth":
            return depth_of_node_n(tree)
        if perm is None:
            from .tree import permutation_from_tree
            perm = permutation_from_tree(tree)
        return position_of_n(perm)

    def __str__(self):
        return self.label
