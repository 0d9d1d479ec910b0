from __future__ import annotations

import itertools

import pytest

from curtainlab import corpus
from curtainlab.contact import build_contact_graph, detect_product, translate_node, wall_action
from curtainlab.errors import HorizonExceeded
from curtainlab.raag import build_window, free_group, tree_of_flats

from . import oracles


def contact_adjacency(cg):
    return oracles.adjacency(cg.n, cg.graph.edges())


def test_single_square():
    cg = build_contact_graph(corpus.cycle(4), E=1)
    assert cg.n == 2 and list(cg.graph.edges()) == [(0, 1)]


def test_path_contact_graph_is_a_path():
    cg = build_contact_graph(corpus.path(6), E=1)
    assert cg.n == 5 and cg.graph.edge_count == 4


def test_free_group_contact_graph_is_the_line_graph():
    """In a tree every wall is one edge, and two walls touch exactly when their edges share an end."""
    b = build_window(free_group(), 4)
    cg = build_contact_graph(b, E=1)
    edge_of = {i: set(cg.wall(i).edge_class[0]) for i in range(cg.n)}
    expected = {(i, j) for i, j in itertools.combinations(range(cg.n), 2) if edge_of[i] & edge_of[j]}
    assert set(cg.graph.edges()) == expected


def test_z2_interior_walls_within_distance_two(z2_ball6):
    cg = build_contact_graph(z2_ball6, E=1)
    adj = contact_adjacency(cg)
    inner = [i for i in range(cg.n) if cg.interior[i]]
    assert len(inner) > 4
    for i in inner:
        d = oracles.bfs(adj, i)
        assert max(d[j] for j in inner) <= 2


def test_free_group_window_has_long_geodesics(f2_ball6):
    cg = build_contact_graph(f2_ball6, E=1)
    adj = contact_adjacency(cg)
    inner = [i for i in range(cg.n) if cg.interior[i]]
    start = inner[0]
    d = oracles.bfs(adj, start)
    far = max(inner, key=lambda j: d[j])
    assert d[far] >= f2_ball6.guard
    path = cg.graph.shortest_path(start, far)
    assert len(path) - 1 == d[far]


def test_contact_distance_matches_oracle_on_samples(f2_ball6):
    cg = build_contact_graph(f2_ball6, E=1)
    adj = contact_adjacency(cg)
    for s in range(0, cg.n, max(1, cg.n // 7)):
        ref = oracles.bfs(adj, s)
        assert [cg.space.distance(s, t) for t in range(cg.n)] == ref


# the action on walls


def test_generator_shifts_wall_along_its_axis(f2_ball6):
    b = f2_ball6
    cg = build_contact_graph(b, E=1)
    a = b.presentation.element("a")
    node = cg.node_of_edge("e", "a")
    assert translate_node(b, a, node) == cg.node_of_edge("a", "a²")
    assert wall_action(b, a)(node) == cg.node_of_edge("a", "a²")


def test_tree_of_flats_wall_translate(tof6):
    b, system = tof6
    cg = system.contact
    z = b.presentation.element("z")
    assert translate_node(b, z, cg.node_of_edge("e", "x")) == cg.node_of_edge("z", "z x")


def test_wall_action_inverse_round_trip(f2_ball6):
    b = f2_ball6
    cg = build_contact_graph(b, E=1)
    act = wall_action(b, b.presentation.element("a b⁻¹"))
    inner = [i for i in range(cg.n) if cg.radius[i] <= 2]
    for node in inner:
        img = act(node)
        assert img is not None and act.inverse()(img) == node


def test_translate_beyond_guard(f2_ball6):
    b = f2_ball6
    cg = build_contact_graph(b, E=1)
    node = cg.node_of_edge("b", "b²")
    with pytest.raises(HorizonExceeded):
        translate_node(b, b.presentation.element("a^4"), node)


# product detection


def test_z2_splits_into_two_crossing_families(z2_ball6):
    w = detect_product(z2_ball6)
    assert w is not None
    gens = []
    for fam in (w.family_a, w.family_b):
        steps = set()
        for i in fam:
            u, v = z2_ball6.window.walls[i].edge_class[0]
            step = (z2_ball6.element_of(u).inverse() * z2_ball6.element_of(v)).normal_form
            steps.add(step[0][0])
        gens.append(steps)
    assert len(gens[0]) == len(gens[1]) == 1 and gens[0] != gens[1]


def test_free_group_has_no_product(f2_ball6):
    assert detect_product(f2_ball6) is None


def test_tree_of_flats_has_no_product():
    assert detect_product(build_window(tree_of_flats(), 4)) is None


def test_f2_times_z_separates_the_central_factor(f2xz_ball6):
    b = f2xz_ball6
    w = detect_product(b)
    assert w is not None
    t = b.presentation.generators.index("t")
    small, big = sorted((w.family_a, w.family_b), key=len)

    def gen(i):
        u, v = b.window.walls[i].edge_class[0]
        return (b.element_of(u).inverse() * b.element_of(v)).normal_form[0][0]

    assert {gen(i) for i in small} == {t}
    assert t not in {gen(i) for i in big}


def test_grid_product_is_exact():
    w = detect_product(corpus.grid(3, 4))
    assert w is not None and w.evidence == "exact"
    assert sorted((len(w.family_a), len(w.family_b))) == [2, 3]
