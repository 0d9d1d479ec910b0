"""End-to-end acceptance suite: one test per criterion, each with its time budget.

Every test records a one-line verdict; conftest prints them after the run.
"""

from __future__ import annotations

import functools
import time
from contextlib import contextmanager

import pytest

from curtainlab import suites
from curtainlab.contact import detect_product
from curtainlab.hhs import (conjugate_chain, instantiate_degenerate, instantiate_tree_of_flats,
                            passing_up_search, rho_separations, verify_behrstock, verify_bgi)
from curtainlab.raag import GroupElement, f2_times_z, free_abelian, free_group
from curtainlab.recipe import certificate_consistent, recipe_rank_one, relation_search

VERDICTS: list[str] = []

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(number: int, title: str, budget: float, carried: float = 0.0):
    """Time the body (plus ``carried`` seconds of shared setup) and record a verdict line."""
    start = time.perf_counter()
    detail: dict = {}
    ok = False
    try:
        yield detail
        ok = True
    finally:
        took = time.perf_counter() - start + carried
        in_time = took < budget
        passed = ok and in_time
        note = "" if in_time else f" over budget {budget:.0f}s"
        extra = "".join(f" {k}={v}" for k, v in detail.items())
        VERDICTS.append(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  "
                        f"[{took:.1f}s{note}]{extra}")
    assert took < budget, f"criterion {number} took {took:.1f}s, budget {budget:.0f}s"


@functools.lru_cache(maxsize=1)
def tree_of_flats_8():
    start = time.perf_counter()
    b, s = instantiate_tree_of_flats(8)
    return b, s, time.perf_counter() - start


@functools.lru_cache(maxsize=1)
def tree_of_flats_recipe():
    b, s, built = tree_of_flats_8()
    start = time.perf_counter()
    out = recipe_rank_one(b, s, ["x", "y", "z"])
    return out, built + time.perf_counter() - start


def test_criterion_01_wall_distance_identity():
    with criterion(1, "wall-distance identity on 50 random median graphs", 60) as d:
        rep = suites.median_oracle(count=50, max_vertices=200, seed=7, laws=("distance",))
        d["pairs"] = rep["pairs"]
        d["failures"] = rep["failure_count"]
        assert rep["passed"], rep["failures"]


def test_criterion_02_hull_and_gate_laws():
    with criterion(2, "hull rounds and gate characterisation", 60) as d:
        rep = suites.median_oracle(count=50, max_vertices=200, seed=7, laws=("hull",))
        d["hulls"] = rep["hull_sets"]
        d["failures"] = rep["failure_count"]
        assert rep["passed"], rep["failures"]


def test_criterion_03_curtain_axioms():
    with criterion(3, "curtain axioms on 200 seeded curtains", 60) as d:
        rep = suites.curtain_axioms(count=200, seed=0)
        d["curtains"] = rep["curtains"]
        d["failures"] = rep["failure_count"]
        assert rep["curtains"] == 200
        assert rep["passed"], rep["failures"]


def test_criterion_04_chain_bound():
    with criterion(4, "greedy chain bounds", 30) as d:
        rep = suites.chain_bound(pairs_per_host=20, seed=0)
        d["chains"] = rep["chains"]
        d["failures"] = rep["failure_count"]
        assert rep["chains"] > 0
        assert rep["passed"], rep["failures"]


def test_criterion_05_flip_then_skewer_soundness():
    with criterion(5, "flip-then-skewer soundness", 60) as d:
        rep = suites.flip_skewer_soundness(seed=0, k=3)
        d["instances"] = rep["instances"]
        d["both_flips"] = rep["both_flips"]
        assert rep["both_flips"] > 0
        assert rep["passed"], rep["failures"]


def test_criterion_06_reducible_side():
    with criterion(6, "products are detected and have no rank-one element", 120) as d:
        for name, p in (("F2xZ", f2_times_z()), ("Z2", free_abelian())):
            b, s = instantiate_degenerate(p, 6)
            witness = detect_product(b)
            assert witness is not None and witness.family_a and witness.family_b, name
            out = recipe_rank_one(b, s, list(p.generators))
            assert out.certificate is None and out.product is not None, name
            d[name] = f"{len(witness.family_a)}+{len(witness.family_b)}"


def test_criterion_07_rank_one_side():
    with criterion(7, "free group: certified rank-one generator", 120) as d:
        b, s = instantiate_degenerate(free_group(), 10)
        out = recipe_rank_one(b, s, ["a", "b"])
        cert = out.certificate
        assert cert is not None and cert.complete
        assert cert.g is None and cert.a in ("a", "b")
        assert cert.skewer_power is not None and cert.skewer_power <= 16
        d["element"] = cert.a
        d["m"] = cert.skewer_power
        ok, fresh = certificate_consistent(cert.to_dict())
        assert ok and all(fresh.values())


def test_criterion_08_tree_of_flats_end_to_end():
    out, carried = tree_of_flats_recipe()
    with criterion(8, "tree of flats: x^m z x^m z⁻¹ with flip-then-skewer and cubical wall",
                   600, carried) as d:
        cert = out.certificate
        assert cert is not None
        m = cert.m
        d["w"] = f"'{cert.element_w}'"
        d["m"] = m
        b, _, _ = tree_of_flats_8()
        pres = b.presentation
        x, z = pres.element("x"), pres.element("z")
        assert m is not None and 1 <= m <= 32
        assert pres.element(cert.element_w) == (x ** m) * z * (x ** m) * z.inverse()
        assert cert.cubical_wall and cert.cubical_wall["proper"] and cert.cubical_wall["in_pole"]
        failed = sorted(k for k, v in cert.checks.items() if not v)
        d["failed_checks"] = ",".join(failed) or "none"
        assert cert.checks["flip_plus_by_a_power"] and cert.checks["flip_minus_by_conjugate"]
        assert cert.checks["flip_then_skewer"]
        assert cert.complete


def test_criterion_09_hhs_axiom_sweep():
    b, s, carried = tree_of_flats_8()
    with criterion(9, "Behrstock and bounded geodesic image sweeps", 300, carried) as d:
        behrstock = verify_behrstock(s)
        bgi = verify_bgi(s)
        d["lambda"] = s.constants.lam
        d["violations"] = len(behrstock) + len(bgi)
        assert behrstock == [] and bgi == []


def _different_flats(p, rep_a, rep_b) -> bool:
    """Two line cosets are transverse exactly when their flats differ: rep_a⁻¹·rep_b leaves ⟨x, y⟩."""
    between = GroupElement(p, rep_a).inverse() * GroupElement(p, rep_b)
    return any(p.generators[g] not in ("x", "y") for g, _ in between.normal_form)


def test_criterion_10_passing_up_pipeline():
    b, s, carried = tree_of_flats_8()
    with criterion(10, "conjugate chain of 4 transverse domains and passing up to S", 300, carried) as d:
        p = b.presentation
        E = s.constants.E_window
        chain = conjugate_chain(s, b, p.element("x"), p.element("z"), s.line("e", "x"), K1=10 * E, P=3)
        assert len(chain.domains) == 4
        assert all(_different_flats(p, chain.domains[i].rep, chain.domains[j].rep)
                   for i in range(4) for j in range(i + 1, 4))
        assert chain.pairwise_transverse
        seps = rho_separations(s, s.maximal, chain.domains)
        d["powers"] = chain.powers
        d["rho_separations_in_S"] = sorted(v for v in seps.values() if v is not None)
        d["invisible_pairs"] = sum(v is None for v in seps.values())
        found = passing_up_search(s, chain.domains, K1=10 * E, K2=50 * E)
        assert found is not None
        W, _ = found
        assert W.is_maximal


def test_criterion_11_relation_search():
    out, carried = tree_of_flats_recipe()
    with criterion(11, "no short relation between w and a conjugate", 120, carried) as d:
        cert = out.certificate
        assert cert is not None
        b, _, _ = tree_of_flats_8()
        p = b.presentation
        w = p.element(cert.element_w)
        g = p.element(cert.g or "z")
        conj = g * w * g.inverse()
        d["pair"] = f"'{w.render()}', '{conj.render()}'"
        assert relation_search(p, w, conj, 4) is None
