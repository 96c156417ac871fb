import json
import random
from itertools import islice

import pytest

from momentgraph.errors import UnclassifiedType, WrongType
from momentgraph.moment_graph import (
    ALL_CANDIDATES,
    build_double_graph,
    build_parabolic_graph,
    check_mge,
    closedness_witness,
    description_difference,
    double_as_parabolic_subgraph,
    explicit_difference,
    invariant_description,
    is_closed_brute,
    is_closed_classified,
    is_closed_orbit,
    is_closed_via_closure,
    orbit_equal,
    orbit_equal_brute,
    transport_edge,
    wq_closure,
)
from momentgraph.root_system import SimpleSubset, build_root_system, dominant_weight
from momentgraph.weyl import weyl_group

from conftest import SMALL_TYPES


def _edges(graph):
    return [(graph.word(e.src), graph.word(e.dst), graph.rs.roots[e.label]) for e in graph.edges]


def _pairs(rank):
    subsets = SimpleSubset.all_subsets(rank)
    return [(q, p) for q in subsets for p in subsets]


def test_parabolic_graph_sl3(a2):
    g = build_parabolic_graph(a2, [1])
    assert [g.word(v) for v in g.vertices] == ["e", "s2", "s1s2"]
    a1, a2r, a12 = (1, -1, 0), (0, 1, -1), (1, 0, -1)
    assert sorted(_edges(g)) == sorted([("e", "s2", a2r), ("s2", "s1s2", a1), ("e", "s1s2", a12)])


def test_parabolic_graph_sizes(a2):
    assert len(build_parabolic_graph(a2, "").edges) == 9
    full = build_parabolic_graph(a2, "all")
    assert len(full.vertices) == 1 and not full.edges


def test_double_graph_sl3(a2):
    g = build_double_graph(a2, [1], [1], ALL_CANDIDATES)
    assert _edges(g) == [("e", "s2", (0, 1, -1))]
    assert [a2.roots[c] for c in g.edges[0].candidates] == [(0, 1, -1), (1, 0, -1)]
    g2 = build_double_graph(a2, [2], [1])
    assert _edges(g2) == [("e", "s1s2", (1, 0, -1))]


@pytest.mark.parametrize("kind,rank", SMALL_TYPES)
def test_double_graph_with_trivial_q_is_parabolic(kind, rank):
    rs = build_root_system(kind, rank)
    for p in SimpleSubset.all_subsets(rank):
        parabolic = build_parabolic_graph(rs, p)
        double = build_double_graph(rs, "", p)
        assert double.labelled_edges() == parabolic.labelled_edges()
        assert double.vertices == parabolic.vertices


@pytest.mark.parametrize("kind,rank", SMALL_TYPES)
def test_graph_axioms(kind, rank):
    rs = build_root_system(kind, rank)
    for q, p in _pairs(rank):
        g = build_double_graph(rs, q, p, ALL_CANDIDATES)
        g.check_axioms()
        for e in g.edges:
            assert e.label in e.candidates and e.label == min(e.candidates)


def test_json_and_dot_are_stable(a2):
    g = build_double_graph(a2, [1], [1])
    doc = json.loads(g.to_json())
    assert doc == {
        "vertices": [{"id": 0, "word": "e", "length": 0}, {"id": 1, "word": "s2", "length": 1}],
        "edges": [{"src": 0, "dst": 1, "label_root": [0, 1, -1], "candidates": [[0, 1, -1], [1, 0, -1]]}],
    }
    assert g.to_json() == build_double_graph(a2, [1], [1]).to_json()
    assert '"e" -> "s2" [label="(0,1,-1)"]' in g.to_dot()


def test_mge_examples(a2):
    g = build_parabolic_graph(a2, [1])
    assert check_mge(g, "all")
    assert check_mge(build_parabolic_graph(a2, "all"), [1])
    sub = double_as_parabolic_subgraph(build_double_graph(a2, [1], [1]))
    assert not check_mge(sub, [1])
    group = weyl_group(a2)
    proj = group.coset_table([1]).proj
    (edge,) = sub.labelled_edges()
    moved = transport_edge(group, proj, group.from_word([1]).index, edge)
    assert a2.roots[moved[2]] == (1, 0, -1)


@pytest.mark.parametrize("kind,rank", SMALL_TYPES)
def test_parabolic_graphs_are_w_closed(kind, rank):
    rs = build_root_system(kind, rank)
    for p in SimpleSubset.all_subsets(rank):
        assert check_mge(build_parabolic_graph(rs, p), "all")


def test_closure_examples(a2, b2):
    for p in SimpleSubset.all_subsets(2):
        assert wq_closure(a2, "", p).labelled_edges() == build_parabolic_graph(a2, p).labelled_edges()
    assert wq_closure(a2, [1], [1]).labelled_edges() == build_parabolic_graph(a2, [1]).labelled_edges()
    closure = wq_closure(b2, [1], [2])
    assert closure.labelled_edges() < build_parabolic_graph(b2, [2]).labelled_edges()


def test_closedness_examples():
    g2 = build_root_system("G", 2)
    assert not is_closed_brute(g2, [1], [2])
    d4 = build_root_system("D", 4)
    assert is_closed_brute(d4, [3, 4], [3, 4])
    assert is_closed_classified(d4, [2, 3, 4], [2, 3, 4])
    b3 = build_root_system("B", 3)
    assert is_closed_classified(b3, [2, 3], [3])
    b2 = build_root_system("B", 2)
    assert not is_closed_classified(b2, [1], [2])
    assert closedness_witness(b2, [1], [2]) is not None


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_type_a_always_closed(rank):
    rs = build_root_system("A", rank)
    assert all(is_closed_brute(rs, q, p) for q, p in _pairs(rank))


@pytest.mark.parametrize("kind,rank", SMALL_TYPES)
def test_closedness_routes_agree(kind, rank):
    rs = build_root_system(kind, rank)
    for q, p in _pairs(rank):
        brute = is_closed_brute(rs, q, p)
        assert is_closed_classified(rs, q, p) == brute
        assert is_closed_orbit(rs, q, p) == brute
        if rs.kind != "D":
            assert is_closed_via_closure(rs, q, p) == brute


def test_closure_route_d4_sample():
    rs = build_root_system("D", 4)
    rng = random.Random(0)
    pairs = rng.sample(_pairs(4), 24) + [(SimpleSubset.from_labels(4, [2, 3, 4]), SimpleSubset.from_labels(4, [1, 3, 4]))]
    for q, p in pairs:
        assert is_closed_via_closure(rs, q, p) == is_closed_brute(rs, q, p)


@pytest.mark.parametrize("kind,rank", [("B", 2), ("B", 3), ("C", 3), ("G2", 2)])
def test_closedness_is_label_independent(kind, rank):
    rs = build_root_system(kind, rank)
    for q, p in _pairs(rank):
        graph = build_double_graph(rs, q, p, ALL_CANDIDATES)
        verdicts = {is_closed_via_closure(rs, q, p, g) for g in islice(graph.label_selections(), 32)}
        assert verdicts == {is_closed_brute(rs, q, p)}


@pytest.mark.parametrize("kind,rank", [("A", 3), ("B", 3), ("C", 3), ("G2", 2)])
def test_every_parabolic_edge_is_intra_orbit_or_transported(kind, rank):
    rs = build_root_system(kind, rank)
    group = weyl_group(rs)
    for q, p in _pairs(rank):
        proj = group.coset_table(p).proj
        table = group.double_coset_table(q, p)
        wq = group.parabolic_elements(q)
        orbit = {int(proj[group.mul(w, v)]): int(table.proj[v]) for v in group.coset_table(p).reps for w in wq}
        transported = set()
        for u in table.reps:
            for a in rs.positive_ids:
                y = int(proj[group.reflection_left(a, u)])
                if y != u and group.length[y] > group.length[u]:
                    for w in wq:
                        transported.add(transport_edge(group, proj, w, (u, y, a)))
        for e in build_parabolic_graph(rs, p).edges:
            assert orbit[e.src] == orbit[e.dst] or (e.src, e.dst, e.label) in transported


def test_unclassified_type_is_reported():
    rs = build_root_system("A", 2)
    fake = type(rs)("E", rs.rank, rs.ambient_dim, rs.roots, rs.simple_coords, rs.simple_indices)
    with pytest.raises(UnclassifiedType):
        is_closed_classified(fake, "", "")


def test_invariant_description_examples(b2):
    assert invariant_description(b2, (1, 0), [1]).as_dict() == {(0, 1): 1, (0, 0): 1}
    assert invariant_description(b2, (-1, 0), [1]).as_dict() == invariant_description(b2, (0, -1), [1]).as_dict()
    assert invariant_description(b2, (1, -1), [2]).as_dict()[(1, 1)] == 1
    with pytest.raises(WrongType):
        invariant_description(build_root_system("A", 2), (1, 0, -1), [1])


def test_orbit_equal_examples(b2):
    group = weyl_group(b2)
    mu = (1, 0)
    s_e1 = group.reflection_element(b2.root_id((1, 0)))
    s_e12 = group.reflection_element(b2.root_id((1, 1)))
    assert orbit_equal(b2, mu, mu, [1])
    assert orbit_equal(b2, s_e1.act_vector(mu), s_e12.act_vector(mu), [1])
    assert not orbit_equal(b2, (1, 0), (-1, 0), [1])


@pytest.mark.parametrize("rank", [2, 3])
def test_orbit_description_matches_brute_force(rank):
    rs = build_root_system("B", rank)
    group = weyl_group(rs)
    for p in SimpleSubset.all_subsets(rank):
        theta = dominant_weight(rs, p)
        points = sorted({tuple(int(x) for x in group.act_vector(w, theta)) for w in range(group.size)})
        for q in SimpleSubset.all_subsets(rank):
            for mu in points:
                for nu in points:
                    assert orbit_equal(rs, mu, nu, q) == orbit_equal_brute(rs, mu, nu, q)


def test_explicit_case_table_random_b3():
    rs = build_root_system("B", 3)
    group = weyl_group(rs)
    rng = random.Random(7)
    checked = 0
    theta = (3, 2, 1)
    points = sorted({tuple(int(x) for x in group.act_vector(w, theta)) for w in range(group.size)})
    while checked < 200:
        q = rng.choice(SimpleSubset.all_subsets(3))
        mu = rng.choice(points)
        rid = rng.choice(list(rs.positive_ids))
        nu = tuple(int(x) for x in rs.reflect(rid, mu))
        if orbit_equal_brute(rs, mu, nu, q):
            with pytest.raises(ValueError):
                explicit_difference(rs, mu, rid, q)
            continue
        assert explicit_difference(rs, mu, rid, q)[1] == description_difference(rs, mu, rid, q)
        checked += 1
