"""Increasing trees on 1..n and the bijection with permutations of 2..n.

A permutation is turned into a tree by attaching each entry to the nearest smaller
entry on its left (the sentinel 1 sits at position 1).  The reverse map inserts
2, 3, ..., n one at a time directly to the right of its parent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._kernels import get_backend
from .errors import ValidationError
from .shuffle import ShufflePermutation


@dataclass(frozen=True, eq=False)
class RecursiveTree:
    """Rooted tree on 1..n given by parents ``(p(2), ..., p(n))`` with ``p(i) < i``."""

    parents: np.ndarray

    def __init__(self, parents):
        par = np.array(parents, dtype=np.int64).ravel()
        if par.size >= 1:
            labels = np.arange(2, par.size + 2)
            bad = np.flatnonzero((par < 1) | (par >= labels))
            if bad.size:
                i = int(bad[0]) + 2
                raise ValidationError(f"node {i} has parent {int(par[bad[0]])}; need 1 <= parent < {i}")
        par.setflags(write=False)
        object.__setattr__(self, "parents", par)

    @property
    def n(self) -> int:
        return int(self.parents.size) + 1

    def parent(self, v: int) -> int:
        if not 2 <= v <= self.n:
            raise ValidationError(f"node {v} has no parent in a tree on 1..{self.n}")
        return int(self.parents[v - 2])

    def parent_array(self) -> np.ndarray:
        """Parents indexed by label; entries 0 and 1 are 0."""
        return np.concatenate([[0, 0], self.parents]).astype(np.int64)

    def children(self, v: int) -> list:
        return (np.flatnonzero(self.parents == v) + 2).tolist()

    def child_counts(self) -> np.ndarray:
        """Number of children per label (index 0 unused)."""
        return np.bincount(self.parents, minlength=self.n + 1)

    def edges(self) -> set:
        """Edges as ``(parent, child)`` pairs."""
        return {(int(p), c) for c, p in enumerate(self.parents.tolist(), start=2)}

    @classmethod
    def path(cls, n: int) -> "RecursiveTree":
        return cls(np.arange(1, n))

    @classmethod
    def from_edges(cls, edges, n: int | None = None) -> "RecursiveTree":
        """Build from undirected pairs; the smaller label of each pair is the parent."""
        pairs = [(min(e), max(e)) for e in edges]
        n = max((c for _, c in pairs), default=1) if n is None else n
        par = np.zeros(max(n - 1, 0), dtype=np.int64)
        for p, c in pairs:
            if par[c - 2]:
                raise ValidationError(f"node {c} has two parents")
            par[c - 2] = p
        if np.any(par == 0):
            raise ValidationError("edge set does not cover every node 2..n")
        return cls(par)

    # serialisation
    def to_json(self) -> str:
        return json.dumps(self.parents.tolist(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RecursiveTree":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValidationError("expected a JSON array of parents")
        return cls(data)

    def to_edge_list(self) -> str:
        """One ``child parent`` line per node 2..n."""
        return "".join(f"{c} {p}\n" for c, p in enumerate(self.parents.tolist(), start=2))

    @classmethod
    def from_edge_list(cls, text: str) -> "RecursiveTree":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        try:
            pairs = [(int(p), int(c)) for c, p in rows]
        except ValueError as exc:
            raise ValidationError("edge list lines must be 'child parent'") from exc
        for p, c in pairs:
            if p >= c:
                raise ValidationError(f"line '{c} {p}': parent must be smaller than child")
        return cls.from_edges(pairs, n=max((c for _, c in pairs), default=1))

    def __eq__(self, other):
        return isinstance(other, RecursiveTree) and np.array_equal(self.parents, other.parents)

    def __hash__(self):
        return hash(self.parents.tobytes())

    def __repr__(self):
        return f"RecursiveTree(parents={self.parents.tolist()})"


def tree_from_permutation(perm: ShufflePermutation, backend=None) -> RecursiveTree:
    """Attach every entry to the nearest smaller entry to its left (monotone stack, O(n))."""
    kern = get_backend(backend)
    par = kern.parents_from_sequence(np.ascontiguousarray(perm.values, dtype=np.int64))
    return RecursiveTree(par[2:])


def permutation_from_tree(tree: RecursiveTree, backend=None) -> ShufflePermutation:
    """Insert 2..n in turn immediately right of their parent."""
    kern = get_backend(backend)
    return ShufflePermutation(kern.sequence_from_parents(tree.parent_array()))
