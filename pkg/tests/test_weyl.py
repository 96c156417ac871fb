from itertools import combinations

import numpy as np
import pytest

from momentgraph import _kernels
from momentgraph.errors import GroupTooLarge
from momentgraph.root_system import SimpleSubset, build_root_system, dominant_weight
from momentgraph.weyl import (
    WeylGroup,
    bruhat_leq,
    double_coset_reps,
    double_parabolic_decompose,
    enumerate_group,
    min_coset_reps,
    project_min,
    project_min_double,
    weyl_group,
)

from conftest import SMALL_TYPES


@pytest.mark.parametrize("kind,rank,order", [("A", 2, 6), ("B", 2, 8), ("A", 3, 24), ("C", 3, 48), ("D", 4, 192), ("G2", 2, 12)])
def test_group_orders(kind, rank, order):
    assert len(enumerate_group(build_root_system(kind, rank))) == order


def test_group_cap():
    with pytest.raises(GroupTooLarge):
        WeylGroup(build_root_system("B", 3), cap=10)


@pytest.mark.parametrize("kind,rank", SMALL_TYPES)
def test_length_counts_inversions(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    npos = group.rs.num_positive
    for w in range(group.size):
        assert group.length[w] == int(np.sum(group.perm[w, :npos] >= npos))
        assert group.length[w] == len(group.words[w])


def _subword_leq(group, u, v):
    """Bruhat order via the subword property of one reduced word of ``v``."""
    word = group.words[v]
    for k in range(len(word) + 1):
        for pos in combinations(range(len(word)), k):
            if group.from_word([word[i] for i in pos]).index == u:
                return True
    return False


@pytest.mark.parametrize("kind,rank", [("A", 2), ("B", 2), ("A", 3), ("G2", 2)])
def test_bruhat_matches_subword_oracle(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    for u in range(group.size):
        for v in range(group.size):
            assert group.leq(u, v) == _subword_leq(group, u, v)


def test_bruhat_examples(a2):
    group = weyl_group(a2)
    e = group.identity
    assert all(bruhat_leq(e, w) for w in group.elements)
    assert bruhat_leq(group.from_word([2, 1]), group.from_word([1, 2, 1]))
    assert not bruhat_leq(group.from_word([1]), group.from_word([2]))


def test_double_coset_examples(a2, b2):
    assert [str(x) for x in double_coset_reps(b2, [1], [2]).elements] == ["e", "s2s1"]
    assert [str(x) for x in double_coset_reps(a2, [1], [1]).elements] == ["e", "s2"]
    for theta in SimpleSubset.all_subsets(2):
        assert double_coset_reps(a2, "", theta).reps == min_coset_reps(a2, theta).reps


def test_decomposition_examples(a2, b2):
    gb = weyl_group(b2)
    w, u, v = double_parabolic_decompose(gb.from_word([1, 2, 1]), [1], [2])
    assert (str(w), str(u), str(v)) == ("s1", "s2s1", "e")
    ga = weyl_group(a2)
    w, u, v = double_parabolic_decompose(ga.from_word([1, 2]), [1], [1])
    assert (str(w), str(u), str(v)) == ("s1", "s2", "e")
    y = ga.from_word([1])
    assert [str(x) for x in double_parabolic_decompose(y, [2], [1])] == ["e", "e", "s1"]
    assert str(project_min(ga.from_word([1]), [1])) == "e"
    assert str(project_min(ga.from_word([2, 1, 2]), [1])) == "s1s2"
    assert str(project_min_double(gb.from_word([1, 2, 1]), [1], [2])) == "s2s1"


@pytest.mark.parametrize("kind,rank", SMALL_TYPES)
def test_decomposition_round_trip(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    subsets = SimpleSubset.all_subsets(rank)
    for q in subsets:
        for p in subsets:
            table = group.double_coset_table(q, p)
            wp = set(group.parabolic_elements(p))
            for y in group.elements:
                w, u, v = double_parabolic_decompose(y, q, p)
                assert w * u * v == y
                assert w.length + u.length + v.length == y.length
                assert u.index in table.reps and v.index in wp
                assert w.index in table.wq_reps[u.index]


@pytest.mark.parametrize("kind,rank", SMALL_TYPES + [("A", 4), ("B", 4)])
def test_minimal_representatives_unique(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    for p in SimpleSubset.all_subsets(rank):
        wp = group.parabolic_elements(p)
        table = group.coset_table(p)
        for w in range(group.size):
            coset = [group.mul(w, z) for z in wp]
            lengths = sorted(group.length[c] for c in coset)
            assert lengths[0] < lengths[1] if len(lengths) > 1 else True
            assert table.proj[w] == min(coset, key=lambda c: group.length[c])


@pytest.mark.parametrize("kind,rank", SMALL_TYPES + [("A", 4), ("B", 4)])
def test_three_double_coset_counts(kind, rank):
    rs = build_root_system(kind, rank)
    group = weyl_group(rs)
    for q in SimpleSubset.all_subsets(rank):
        q_roots = [rs.roots[r] for r in rs.positive_ids if all(c == 0 or k + 1 in q for k, c in enumerate(rs.simple_coords[r]))]
        for p in SimpleSubset.all_subsets(rank):
            table = group.double_coset_table(q, p)
            cosets = group.coset_table(p)
            orbits = {frozenset(int(cosets.proj[group.mul(w, v)]) for w in group.parabolic_elements(q)) for v in cosets.reps}
            theta = dominant_weight(rs, p)
            points = {group.act_vector(w, theta) for w in range(group.size)}
            chamber = [mu for mu in points if all(rs.inner(mu, a) >= 0 for a in q_roots)]
            assert len(table.reps) == len(orbits) == len(chamber)


@pytest.mark.parametrize("kind,rank", [("A", 3), ("B", 3), ("C", 3), ("G2", 2)])
def test_stabilizer_subgroup_equals_intersection(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    for q in SimpleSubset.all_subsets(rank):
        wq = set(group.parabolic_elements(q))
        for p in SimpleSubset.all_subsets(rank):
            wp = group.parabolic_elements(p)
            table = group.double_coset_table(q, p)
            for u in table.reps:
                conj = {group.mul(group.mul(u, z), int(group.inverse[u])) for z in wp}
                assert set(table.w_u[u]) == wq & conj


@pytest.mark.parametrize("kind,rank", [("A", 3), ("B", 3), ("D", 4)])
def test_kernels_agree_with_numpy(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    active = np.array([True] + [False] * (rank - 2) + [True])
    start = np.arange(group.size, dtype=np.int64)
    a = _kernels.reduce_descents_numpy(start, group.desc_right, group.right, active)
    b = _kernels.reduce_descents(start, group.desc_right, group.right, active)
    assert np.array_equal(a, b)
    succ = group.mult[group.reflection].T.copy()
    succ[group.length[succ] <= group.length[:, None]] = -1
    order = np.argsort(-group.length, kind="stable")
    assert np.array_equal(_kernels.bruhat_closure_numpy(order, succ), group.bruhat)
