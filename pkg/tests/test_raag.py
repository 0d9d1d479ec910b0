from __future__ import annotations

import functools
import random

import pytest
from hypothesis import given, settings, strategies as st

from curtainlab.errors import BudgetExceeded, HorizonExceeded, ParseError, UnknownGenerator
from curtainlab.median import distance
from curtainlab.raag import (RaagPresentation, act_vertex, build_window, enumerate_elements, f2_times_z,
                             free_abelian, free_group, normal_form, tree_of_flats)

from . import oracles

PRESENTATIONS = {
    "F2": free_group(),
    "Z2": free_abelian(),
    "tof": tree_of_flats(),
    "F2xZ": f2_times_z(),
    "path4": RaagPresentation.make("abcd", [("a", "b"), ("b", "c"), ("c", "d")]),
}


def words(p, max_len=7):
    letters = p.letters()
    return st.lists(st.sampled_from(letters), max_size=max_len).map(tuple)


# normal forms


def test_commuting_conjugation():
    p = RaagPresentation.make("xyz", [("x", "y")])
    assert p.element("x y x⁻¹").render() == "y"


def test_free_cancellation():
    e = free_group().element("a a⁻¹")
    assert e.is_identity() and e.length == 0


def test_tree_of_flats_example():
    g = tree_of_flats().element("z x z⁻¹ z x")
    assert g.render() == "z x²" and g.length == 3


@pytest.mark.parametrize("name", sorted(PRESENTATIONS))
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_normal_form_matches_exhaustive_rewriting(name, data):
    p = PRESENTATIONS[name]
    w = data.draw(words(p))
    expected = oracles.brute_normal_form(w, p.commute)
    assert normal_form(p, w).normal_form == expected


@pytest.mark.parametrize("name", sorted(PRESENTATIONS))
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_normal_form_is_confluent_under_random_schedules(name, data):
    """Apply random shuffles, cancellations and insertions of x x⁻¹; the normal form never changes."""
    p = PRESENTATIONS[name]
    w = list(data.draw(words(p, 10)))
    target = normal_form(p, w).normal_form
    rng = random.Random(data.draw(st.integers(0, 2**31)))
    for _ in range(30):
        moves = []
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            if a[0] == b[0] and a[1] == -b[1]:
                moves.append(("cancel", i))
            elif a[0] != b[0] and p.commute(a[0], b[0]):
                moves.append(("swap", i))
        moves.append(("insert", rng.randrange(len(w) + 1)))
        kind, i = rng.choice(moves)
        if kind == "cancel":
            del w[i:i + 2]
        elif kind == "swap":
            w[i], w[i + 1] = w[i + 1], w[i]
        else:
            g = rng.randrange(p.rank)
            w[i:i] = [(g, 1), (g, -1)]
        assert normal_form(p, w).normal_form == target


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_laws(data):
    p = tree_of_flats()
    a, b, c = (p.element(data.draw(words(p))) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert (a * a.inverse()).is_identity()
    assert (a * b).inverse() == b.inverse() * a.inverse()


def test_products():
    assert (free_abelian().element("x") * free_abelian().element("y")).render() == "x y"
    p = free_group()
    assert (p.element("ab") * p.element("b⁻¹a")).render() == "a²"
    g = p.element("a b⁻¹ a")
    assert (g * g.inverse()).is_identity()


def test_parse_forms_agree():
    p = tree_of_flats()
    assert p.element("x^3 z x^-1") == p.element("x³ z x⁻¹") == p.element("xxx z x⁻¹")
    assert p.element("e").is_identity()


def test_unknown_generator():
    with pytest.raises(UnknownGenerator):
        tree_of_flats().element("x w")


def test_bad_presentation_documents():
    with pytest.raises(ParseError):
        RaagPresentation.from_dict({"generators": "xyz"})
    with pytest.raises(UnknownGenerator):
        RaagPresentation.from_dict({"generators": ["x"], "commuting_pairs": [["x", "q"]]})


def test_presentation_round_trip():
    p = tree_of_flats()
    assert RaagPresentation.from_dict(p.to_dict()) == p


# windows


def test_free_group_ball_count():
    b = build_window(free_group(), 3)
    assert b.window.n == 1 + 4 + 12 + 36


def test_z2_ball_count():
    assert build_window(free_abelian(), 2).window.n == 13


def test_tree_of_flats_ball_matches_enumeration():
    p = tree_of_flats()
    seen = {()}
    frontier = [()]
    for _ in range(2):
        nxt = []
        for w in frontier:
            for l in p.letters():
                nf = oracles.brute_normal_form(w + (l,), p.commute)
                if nf not in seen:
                    seen.add(nf)
                    nxt.append(nf)
        frontier = nxt
    assert build_window(p, 2).window.n == len(seen)


def test_budget_cap():
    with pytest.raises(BudgetExceeded):
        build_window(free_group(), 6, cap=100)


def test_free_group_windows_are_trees():
    b = build_window(free_group(("a", "b", "c")), 4)
    w = b.window
    assert w.graph.edge_count == w.n - 1
    assert all(len(wall.edge_class) == 1 for wall in w.walls)


def test_z2_walls_are_two_crossing_families():
    b = build_window(free_abelian(), 6)
    w = b.window
    inner = [wall for wall in w.walls
             if min(max(w.depth[u], w.depth[v]) for u, v in wall.edge_class) <= w.guard]
    family = {}
    for wall in inner:
        u, v = wall.edge_class[0]
        family[wall.index] = (b.element_of(u).inverse() * b.element_of(v)).normal_form[0][0]
    for a in inner:
        for c in inner:
            if family[a.index] != family[c.index]:
                assert w.cross(a, c)


# action


@functools.lru_cache(maxsize=1)
def _tof6():
    return build_window(tree_of_flats(), 6)


def test_action_examples():
    b = build_window(free_group(), 6)
    p = b.presentation
    assert act_vertex(b, p.identity(), b.vertex_of("a b")) == b.vertex_of("a b")
    assert b.window.labels[act_vertex(b, p.element("a"), 0)] == "a"
    t = build_window(tree_of_flats(), 6)
    q = t.presentation
    assert t.window.labels[act_vertex(t, q.element("z x z⁻¹"), t.vertex_of("z"))] == "z x"


def test_action_beyond_guard():
    b = build_window(free_group(), 6)
    with pytest.raises(HorizonExceeded):
        act_vertex(b, b.presentation.element("a^3"), b.vertex_of("b^2"))


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_action_is_an_isometry(data):
    b = _tof6()
    p = b.presentation
    small = [w for w in b.elements if len(w) <= 1]
    g = p.element(data.draw(st.sampled_from(small)))
    inner = [v for v, w in enumerate(b.elements) if len(w) + 1 <= b.guard]
    u, v = data.draw(st.sampled_from(inner)), data.draw(st.sampled_from(inner))
    gu, gv = act_vertex(b, g, u), act_vertex(b, g, v)
    assert distance(b.window, u, v) == distance(b.window, gu, gv)


# enumeration


def test_enumerate_single_generator():
    got = [g.render() for g in enumerate_elements(free_group(), ["a"], 2)]
    assert sorted(got) == sorted(["e", "a", "a⁻¹", "a²", "a⁻²"])


def test_enumerate_tree_of_flats_length_one():
    assert len(enumerate_elements(tree_of_flats(), ["x", "z"], 1)) == 5


def test_enumerate_free_group_length_three():
    p = free_group()
    expected = {oracles.brute_normal_form(w, p.commute)
                for n in range(4) for w in _all_words(p, n)}
    assert len(enumerate_elements(p, ["a", "b"], 3)) == len(expected) == 53


def _all_words(p, n):
    if n == 0:
        yield ()
        return
    for w in _all_words(p, n - 1):
        for l in p.letters():
            yield w + (l,)
