from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from curtainlab import corpus
from curtainlab.contact import build_contact_graph, wall_action
from curtainlab.errors import FlipPreconditionFailed, IntervalTooWide, NotGeodesic, TooClose
from curtainlab.hyperbolic import (Automorphism, HypGraph, certify_tau, curtain_report, flip_then_skewer,
                                   flips, greedy_chain, is_chain, make_curtain, path_graph,
                                   project_to_geodesic, skewers)
from curtainlab.raag import build_window, free_group

from . import oracles


def shift(n: int, s: int) -> Automorphism:
    """Translation of the path 0..n-1 by s, undefined where it runs off the end."""
    return Automorphism(lambda v: v + s if 0 <= v + s < n else None,
                        lambda v: v - s if 0 <= v - s < n else None, name=f"shift{s}")


def reflection(n: int, centre2: int) -> Automorphism:
    f = lambda v: centre2 - v if 0 <= centre2 - v < n else None
    return Automorphism(f, f, name=f"r{centre2}")


def oracle_curtain(g: HypGraph, alpha, offset):
    """Pole, plus and minus from nearest-point sets computed by plain BFS."""
    adj = oracles.adjacency(g.n, g.graph.edges())
    rows = [oracles.bfs(adj, a) for a in alpha]
    stop = offset + 6 * g.E
    pole, plus, minus = set(), set(), set()
    for v in range(g.n):
        d = [r[v] for r in rows]
        near = [i for i, x in enumerate(d) if x == min(d)]
        if any(offset <= i <= stop for i in near):
            pole.add(v)
        elif min(near) > stop:
            plus.add(v)
        elif max(near) < offset:
            minus.add(v)
        else:
            pole.add(v)
    return pole, plus, minus


@pytest.fixture(scope="module")
def f2_contact():
    b = build_window(free_group(), 8)
    return b, build_contact_graph(b, E=1)


def a_axis(b, cg, k=5):
    v = lambda j: b.vertex_of(f"a^{j}")
    ends = (cg.node_of_edge(v(-k), v(-k + 1)), cg.node_of_edge(v(k - 1), v(k)))
    return cg.space.graph.shortest_path(*ends)


# projection


def test_projection_of_axis_point():
    g = path_graph(10)
    assert project_to_geodesic(g, list(range(10)), 4) == {4}


def test_tree_projection_is_a_point():
    t = corpus.random_tree(60, 3)
    g = HypGraph(t.graph, 1)
    alpha = g.graph.shortest_path(0, 59)
    for x in range(g.n):
        assert len(project_to_geodesic(g, alpha, x)) == 1


def test_contact_projection_matches_bfs_scan(f2_contact):
    b, cg = f2_contact
    g = cg.space
    alpha = a_axis(b, cg)
    adj = oracles.adjacency(g.n, g.graph.edges())
    for x in range(0, g.n, 997):
        d = oracles.bfs(adj, x)
        best = min(d[a] for a in alpha)
        assert project_to_geodesic(g, alpha, x) == {a for a in alpha if d[a] == best}


# curtains


def test_path_curtain():
    g = path_graph(20)
    c = make_curtain(g, list(range(20)), 5)
    assert c.pole == set(range(5, 12))
    assert c.plus == set(range(12, 20)) and c.minus == set(range(5))


def test_tree_curtain_matches_oracle_and_shifts():
    b = build_window(free_group(), 5)
    g = HypGraph(b.window.graph, 1, list(b.window.labels))
    alpha = g.graph.shortest_path(b.vertex_of("a^-5"), b.vertex_of("a^5"))
    c1 = make_curtain(g, alpha, 2)
    assert (c1.pole, c1.plus, c1.minus) == tuple(map(frozenset, oracle_curtain(g, alpha, 2)))
    assert b.vertex_of("a^5") in c1.plus and b.vertex_of("a^-5") in c1.minus
    c2 = make_curtain(g, alpha, 3)
    assert (c2.pole, c2.plus, c2.minus) == tuple(map(frozenset, oracle_curtain(g, alpha, 3)))
    assert c2.plus < c1.plus and c1.minus < c2.minus


def test_curtain_errors():
    g = path_graph(10)
    with pytest.raises(IntervalTooWide):
        make_curtain(g, list(range(10)), 3)
    with pytest.raises(IntervalTooWide):
        make_curtain(path_graph(7), list(range(7)), 1)
    with pytest.raises(NotGeodesic):
        make_curtain(path_graph(12), [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 10], 1)


def test_chain_examples():
    g = path_graph(40)
    alpha = list(range(40))
    a, c, overlap = make_curtain(g, alpha, 2), make_curtain(g, alpha, 20), make_curtain(g, alpha, 5)
    assert is_chain(g, [a])
    assert is_chain(g, [a, c])
    assert not is_chain(g, [a, overlap])


def test_greedy_chain_on_path():
    g = path_graph(40)
    assert len(greedy_chain(g, 0, 39)) >= 4
    assert len(greedy_chain(g, 0, 10)) == 1
    with pytest.raises(TooClose):
        greedy_chain(g, 0, 9)


def test_greedy_chain_on_contact_graph(f2_contact):
    b, cg = f2_contact
    g = cg.space
    alpha = a_axis(b, cg, 8)
    d = len(alpha) - 1
    chain = greedy_chain(g, alpha[0], alpha[-1])
    assert is_chain(g, chain)
    assert d >= g.E * len(chain) and len(chain) >= (d - 2 * g.E) // (8 * g.E)


# flipping and skewering


def test_identity_neither_flips_nor_skewers():
    g = path_graph(30)
    c = make_curtain(g, list(range(30)), 10)
    ident = Automorphism.identity()
    assert not flips(g, ident, c)
    assert skewers(g, ident, c, 20) is None


def test_symmetric_reflection_swaps_sides_without_proper_containment():
    """A reflection of a finite path through the curtain's centre maps h⁺ onto h⁻ exactly."""
    n = 31
    g = path_graph(n)
    c = make_curtain(g, list(range(n)), 12)
    r = reflection(n, n - 1)
    assert {r(v) for v in c.plus} == c.minus
    assert not flips(g, r, c)


def test_off_centre_reflection_flips():
    n = 60
    g = path_graph(n)
    c = make_curtain(g, list(range(n)), 20)
    assert flips(g, reflection(n, 32), c, partial="skip")
    assert flips(g, reflection(n, 60), c.flipped(), partial="skip")


def test_path_shift_skewers_within_nine():
    n = 80
    g = path_graph(n)
    c = make_curtain(g, list(range(n)), 30)
    m = skewers(g, shift(n, 1), c, 20, partial="skip")
    assert m is not None and m <= 9


def test_free_group_generator_skewers(f2_contact):
    b, cg = f2_contact
    alpha = a_axis(b, cg)
    c = make_curtain(cg.space, alpha, 1)
    m = skewers(cg.space, wall_action(b, b.presentation.element("a")), c, 16, partial="skip")
    assert m is not None and m <= 16


def test_flip_then_skewer_reflection_pair():
    n = 60
    g = path_graph(n)
    c = make_curtain(g, list(range(n)), 20)
    g1, g2 = reflection(n, 32), reflection(n, 60)
    cert = flip_then_skewer(g, g1, g2, c, 3, partial="skip")
    composite = g2.compose(g1)
    assert all(composite(v) == v + 28 for v in range(0, 20))
    assert cert.chain_verified
    assert all(d >= i + 1 for i, d in enumerate(cert.displacements, start=1))


def test_flip_then_skewer_needs_two_flips():
    n = 60
    g = path_graph(n)
    c = make_curtain(g, list(range(n)), 20)
    r = reflection(n, 32)
    with pytest.raises(FlipPreconditionFailed):
        flip_then_skewer(g, r, r.inverse(), c, partial="skip")


def test_certify_tau_on_shift():
    n = 120
    g = path_graph(n)
    c = make_curtain(g, list(range(n)), 40)
    cert = certify_tau(g, shift(n, 8), c, 3, partial="skip")
    assert cert.chain_verified and cert.tau_lower >= 1
    assert cert.displacements == [8, 16, 24]
    one = certify_tau(g, shift(n, 8), c, 1, partial="skip")
    assert one.tau_lower == g.E


# properties


@settings(max_examples=40, deadline=None)
@given(st.integers(20, 150), st.integers(0, 10_000), st.data())
def test_curtain_axioms_on_random_trees(n, seed, data):
    t = corpus.random_tree(n, seed)
    g = HypGraph(t.graph, 1)
    x, y = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    if g.distance(x, y) < 8:
        return
    alpha = g.graph.shortest_path(x, y)
    offset = data.draw(st.integers(1, len(alpha) - 8))
    rep = curtain_report(g, make_curtain(g, alpha, offset))
    assert rep["partition"] and rep["disjoint_halves"] and rep["path_crossing"] and rep["separated"]


@settings(max_examples=40, deadline=None)
@given(st.integers(10, 200), st.integers(1, 3))
def test_greedy_chain_bounds_on_paths(n, E):
    g = path_graph(n, E)
    d = n - 1
    if d < 8 * E + 2:
        return
    chain = greedy_chain(g, 0, n - 1)
    assert d >= E * len(chain)
    assert len(chain) >= (d - 2 * E) // (8 * E)
    assert is_chain(g, chain)
