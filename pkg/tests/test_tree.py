import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from brtree.errors import ValidationError
from brtree.shuffle import ShufflePermutation
from brtree.tree import RecursiveTree, permutation_from_tree, tree_from_permutation

import brute

FIGURE_1 = {(1, 2), (1, 3), (2, 4), (2, 5), (1, 6), (3, 7), (3, 8)}
FIGURE_4 = {(1, 2), (2, 3), (2, 6), (3, 4), (3, 8), (4, 5), (6, 7)}

perms = st.integers(2, 60).flatmap(lambda n: st.permutations(list(range(2, n + 1))))


def test_step_by_step_example():
    tree = tree_from_permutation(ShufflePermutation.parse("16387254"))
    assert tree.edges() == FIGURE_1


def test_shuffle_example_tree():
    tree = tree_from_permutation(ShufflePermutation.parse("2673845"))
    assert tree.edges() == FIGURE_4
    assert permutation_from_tree(tree).format() == "2673845"


def test_path_and_star():
    assert tree_from_permutation(ShufflePermutation.identity(4)).parents.tolist() == [1, 2, 3]
    star = tree_from_permutation(ShufflePermutation([5, 4, 3, 2]))
    assert star.parents.tolist() == [1, 1, 1, 1]
    assert RecursiveTree.path(4) == RecursiveTree([1, 2, 3])


def test_validation():
    with pytest.raises(ValidationError):
        RecursiveTree([1, 3, 2])        # node 3 would hang below node 3
    with pytest.raises(ValidationError):
        RecursiveTree([0])
    with pytest.raises(ValidationError):
        RecursiveTree.from_edges({(1, 2), (1, 2), (2, 3)}, 4)


def test_serialisation_round_trips():
    tree = RecursiveTree([1, 2, 2, 3, 1, 6, 3])
    assert tree.to_json() == "[1,2,2,3,1,6,3]"
    assert RecursiveTree.from_json(tree.to_json()) == tree
    assert RecursiveTree.from_edge_list(tree.to_edge_list()) == tree
    assert tree.to_edge_list().splitlines()[0] == "2 1"
    assert RecursiveTree.from_edges(tree.edges()) == tree


def test_children_and_counts():
    tree = RecursiveTree.from_edges(FIGURE_4)
    assert tree.children(2) == [3, 6]
    assert tree.child_counts().tolist() == [0, 1, 2, 2, 1, 0, 1, 0, 0]
    assert tree.parent(8) == 3


@pytest.mark.parametrize("n", range(2, 9))
def test_bijection_over_all_permutations(n):
    seen = set()
    for values in itertools.permutations(range(2, n + 1)):
        perm = ShufflePermutation(values)
        tree = tree_from_permutation(perm)
        assert permutation_from_tree(tree) == perm
        seen.add(tree)
    assert len(seen) == len(list(itertools.permutations(range(2, n + 1))))


@given(perms)
def test_construction_matches_quadratic_scan(values):
    tree = tree_from_permutation(ShufflePermutation(values))
    naive = brute.naive_parents(values)
    assert tree.parents.tolist() == [naive[v] for v in range(2, len(values) + 2)]


@given(perms)
def test_backends_build_the_same_tree(values):
    perm = ShufflePermutation(values)
    a = tree_from_permutation(perm, backend="numba")
    b = tree_from_permutation(perm, backend="numpy")
    assert a == b
    assert permutation_from_tree(a, backend="numpy") == permutation_from_tree(a, backend="numba") == perm


@given(perms)
def test_increasing_labels_along_paths(values):
    tree = tree_from_permutation(ShufflePermutation(values))
    par = tree.parent_array()
    assert all(par[v] < v for v in range(2, tree.n + 1))


def test_large_tree_round_trip():
    rng = np.random.default_rng(3)
    perm = ShufflePermutation(rng.permutation(np.arange(2, 200_001)))
    assert permutation_from_tree(tree_from_permutation(perm)) == perm
