"""The rank-one recipe a^m·(g a^m g⁻¹), its certificates, and a bounded relation search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .contact import ProductWitness, build_contact_graph, detect_product, vertex_action, wall_action
from .errors import (BudgetExceeded, ChainBroken, CurtainLabError, HorizonExceeded, IntervalTooWide,
                     NoGrowth, PartialAction, SeparationNotAchieved)
from .hhs import (ActiveDomainReport, ProjectionSystem, conjugate_chain, find_active_domain,
                  find_transverse_pair, passing_up_search)
from .hyperbolic import (Curtain, HypGraph, TauCertificate, certify_tau, contained, flip_then_skewer,
                         flips, make_curtain, skewers)
from .raag import BallComplex, GroupElement, RaagPresentation, build_window, normal_form

PARTIAL = "skip"


@dataclass
class RecipeBudget:
    m_max: int = 32
    skew_max: int = 16
    k: int | None = None
    A_threshold: Fraction = Fraction(1, 2)
    s_max: int = 64
    chain_k: int = 3
    conjugates: int = 3

    def to_dict(self) -> dict:
        return {"m_max": self.m_max, "skew_max": self.skew_max, "k": self.k,
                "A_threshold": str(self.A_threshold), "s_max": self.s_max,
                "chain_k": self.chain_k, "conjugates": self.conjugates}


@dataclass
class RecipeCertificate:
    """Everything needed to rebuild the window and re-run each predicate."""

    presentation: dict
    horizon: int
    element_w: str
    a: str
    g: str | None
    m: int | None
    E: int
    curtain: dict
    checks: dict[str, bool]
    skewer_power: int | None = None
    tau: dict | None = None
    cubical_wall: dict | None = None
    notes: list[str] = field(default_factory=list)
    search: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"presentation": self.presentation, "horizon": self.horizon,
                "element_w": self.element_w, "a": self.a, "g": self.g, "m": self.m, "E": self.E,
                "curtain": self.curtain, "checks": dict(sorted(self.checks.items())),
                "complete": self.complete, "skewer_power": self.skewer_power, "tau": self.tau,
                "cubical_wall": self.cubical_wall, "notes": self.notes, "search": self.search}

    @classmethod
    def from_dict(cls, doc: dict) -> "RecipeCertificate":
        keys = ("presentation", "horizon", "element_w", "a", "g", "m", "E", "curtain", "checks",
                "skewer_power", "tau", "cubical_wall", "notes", "search")
        return cls(**{k: doc.get(k) for k in keys if k in doc or k in ("presentation",)})

    def transcript(self) -> str:
        lines = [f"element w = {self.element_w}  (a = {self.a}, g = {self.g}, m = {self.m})",
                 f"contact-graph curtain: interval {self.curtain['interval']} on an axis of "
                 f"{len(self.curtain['axis'])} walls, E = {self.E}"]
        if self.skewer_power is not None:
            lines.append(f"skewer power: {self.skewer_power}")
        if self.tau:
            lines.append(f"translates chain verified: {self.tau['chain_verified']}, "
                         f"displacements {self.tau['displacements']}, tau ≥ {self.tau['tau_lower']}")
        if self.cubical_wall:
            cw = self.cubical_wall
            lines.append(f"cubical wall {cw['edge']} in the pole: {cw['in_pole']}; "
                         f"w maps the side of {cw['plus_side']} properly into itself: {cw['proper']}")
        for name, ok in sorted(self.checks.items()):
            lines.append(f"  [{'ok' if ok else 'FAIL'}] {name}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


@dataclass
class RecipeOutcome:
    certificate: RecipeCertificate | None
    product: ProductWitness | None = None
    log: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.certificate is not None


# helpers


def _axis_through(space: HypGraph, centre: int, ends: Sequence[tuple[int, int]], half: int) -> list[int] | None:
    """A geodesic p → centre → q with at least ``half`` edges on each side."""
    g = space.graph
    dc = g.row(centre)
    for p, q in ends:
        if p is None or q is None:
            continue
        dp, dq = int(dc[p]), int(dc[q])
        if dp < half or dq < half or dp < 0 or dq < 0:
            continue
        if g.distance(p, q) == dp + dq:
            return g.shortest_path(p, centre) + g.shortest_path(centre, q)[1:]
    return None


def _generic_axis(space: HypGraph, centre: int, half: int, tries: int = 64) -> list[int] | None:
    g = space.graph
    dc = g.row(centre)
    ring = [int(v) for v in (dc == half).nonzero()[0]][:tries]
    for p in ring:
        dp = g.bfs(p)
        far = (dc == half) & (dp == 2 * half)
        hits = far.nonzero()[0]
        if hits.size:
            q = int(hits[0])
            return g.shortest_path(p, centre) + g.shortest_path(centre, q)[1:]
    return None


def _orbit_axis(space: HypGraph, act_pow, node: int, half: int) -> list[int] | None:
    ends = []
    for j in (1, 2, 3):
        ends.append((act_pow(-j)(node), act_pow(j)(node)))
    return _axis_through(space, node, ends, half)


def _curtain_dict(c: Curtain, space: HypGraph) -> dict:
    return c.to_dict(space.label, full=False)


def _cubical_check(b: BallComplex, w: GroupElement, edge: tuple[int, int]) -> dict:
    """Orient the wall of ``edge`` so that w pushes one side properly into itself, if either does."""
    win = b.window
    wall = win.wall_of_edge(*edge)
    act = vertex_action(b, w)
    sides = (("a", wall.side_a), ("b", wall.side_b))
    for tag, side in sides:
        res = contained(act, side, side, None, PARTIAL)
        if res.holds:
            rep = min(side, key=win.order_key)
            return {"edge": [win.labels[edge[0]], win.labels[edge[1]]], "plus_side": win.labels[rep],
                    "proper": True, "checked": res.checked, "skipped": res.skipped}
    return {"edge": [win.labels[edge[0]], win.labels[edge[1]]], "plus_side": None, "proper": False,
            "checked": 0, "skipped": 0}


# the recipe


def recipe_rank_one(b: BallComplex, s: ProjectionSystem, T: Sequence[str | GroupElement],
                    budget: RecipeBudget | None = None) -> RecipeOutcome:
    budget = budget or RecipeBudget()
    p = b.presentation
    log: list[str] = []
    pw = detect_product(b)
    if pw is not None:
        log.append(f"walls split into two pairwise crossing families "
                   f"({len(pw.family_a)} and {len(pw.family_b)}): reducible, no rank-one element")
        return RecipeOutcome(None, pw, log)
    T = [p.element(t) for t in T]
    if not T:
        raise CurtainLabError("T must be nonempty")
    report: ActiveDomainReport | None = None
    for a in T:
        try:
            r = find_active_domain(s, b, a, budget.k, budget.A_threshold)
        except NoGrowth:
            continue
        log.append(f"{a}: most growth in {s.label(r.domain)} (ratio {r.growth_ratio})")
        if r.passes_threshold:
            report = r
            break
    if report is None:
        raise NoGrowth("no element of T is active on any domain within the window")
    space = s.contact.space
    if report.domain.is_maximal:
        cert = _certify_on_maximal(b, s, report.element, budget, log)
        return RecipeOutcome(cert, None, log)
    return RecipeOutcome(_pass_up_and_flip(b, s, report, T, budget, log), None, log)


def _certify_on_maximal(b: BallComplex, s: ProjectionSystem, a: GroupElement, budget: RecipeBudget,
                        log: list[str]) -> RecipeCertificate | None:
    """a already moves the contact graph: skewer a curtain on its orbit and certify."""
    cg = s.contact
    space = cg.space
    E = space.E
    act = wall_action(b, a)
    # contact axis along the orbit of the wall of the edge (e, a)
    first = b.vertex_of(a.presentation.element(a.normal_form[:1]))
    node = cg.node_of_edge(0, first)
    ends = []
    for step in (act, act.inverse()):
        cur, seen = node, 0
        while seen < cg.n:
            nxt = step(cur)
            if nxt is None or nxt == node:
                break
            cur, seen = nxt, seen + 1
        ends.append(cur)
    nodes = [ends[1], ends[0]]
    alpha = space.graph.shortest_path(nodes[0], nodes[-1])
    L = len(alpha) - 1
    log.append(f"contact axis of {a}: {L} edges")
    for offset in range(1, L - 6 * E):
        try:
            c = make_curtain(space, alpha, offset)
        except IntervalTooWide:
            break
        m = skewers(space, act, c, budget.skew_max, partial=PARTIAL)
        if m is None:
            continue
        w = act.power(m)
        try:
            tau = certify_tau(space, w, c, budget.chain_k, partial=PARTIAL)
        except ChainBroken as exc:
            log.append(f"offset {offset}: {exc}")
            continue
        log.append(f"offset {offset}: {a} skewers with power {m}")
        checks = {"skewer": True, "tau_chain": tau.chain_verified}
        return RecipeCertificate(
            presentation=b.presentation.to_dict(), horizon=b.horizon, element_w=a.render(),
            a=a.render(), g=None, m=m, E=E, curtain=_curtain_dict(c, space), checks=checks,
            skewer_power=m, tau=tau.to_dict(space.label),
            notes=["active on the maximal domain; certified directly by skewering"],
            search={"budget": budget.to_dict(), "offset": offset})
    log.append(f"no curtain on the axis of {a} is skewered within power {budget.skew_max}")
    return None


def _pass_up_and_flip(b: BallComplex, s: ProjectionSystem, report: ActiveDomainReport,
                      T: Sequence[GroupElement], budget: RecipeBudget, log: list[str]) -> RecipeCertificate | None:
    p = b.presentation
    cg = s.contact
    space = cg.space
    E = space.E
    a, U = report.element, report.domain
    pair = find_transverse_pair(s, T, U)
    if pair is None:
        raise SeparationNotAchieved(f"no translate of {s.label(U)} by a short word is transverse to it")
    g, gU = pair
    log.append(f"{g} moves {s.label(U)} to the transverse {s.label(gU)}")
    S = s.maximal
    sep = s.dist(S, s.rho(U, S), s.rho(gU, S))
    log.append(f"ρ-separation in the contact graph: {sep} (needs > 30E = {30 * E})")
    separated = sep > 30 * E
    notes = []
    if not separated:
        try:
            chain = conjugate_chain(s, b, a, g, U, 10 * E, budget.conjugates, s_max=budget.s_max)
            found = passing_up_search(s, chain.domains, K1=10 * E, K2=50 * E)
            log.append(f"conjugate chain powers {chain.powers}; passing up: "
                       f"{'none' if found is None else s.label(found[0])}")
        except (SeparationNotAchieved, HorizonExceeded) as exc:
            log.append(f"passing up failed: {exc}")
        notes.append(f"ρ-images of {s.label(U)} and {s.label(gU)} are {sep} apart in the contact "
                     f"graph, not more than 30E; falling back to the cubical wall of the edge e–{g}")
    # cubical wall at the edge from the basepoint along g's first letter
    first = b.vertex_of(GroupElement(p, g.normal_form[:1]))
    k_node = cg.node_of_edge(0, first)
    k_edge = b.window.walls[k_node].edge_class[0]
    best = None
    for m in range(1, budget.m_max + 1):
        am = a ** m
        conj = g * am * g.inverse()
        w = am * conj
        g1, g2 = wall_action(b, am), wall_action(b, conj)
        wact = wall_action(b, w)
        alpha = _orbit_axis(space, wact.power, k_node, 3 * E + 1) or _generic_axis(space, k_node, 3 * E + 1)
        if alpha is None:
            log.append(f"m = {m}: no contact geodesic through the cubical wall fits the window")
            continue
        c = make_curtain(space, alpha, alpha.index(k_node) - 3 * E)
        flip1 = flips(space, g1, c, partial=PARTIAL)
        flip2 = flips(space, g2, c.flipped(), partial=PARTIAL)
        cube = _cubical_check(b, w, k_edge)
        cube["in_pole"] = k_node in c.pole
        tau = None
        skew = None
        fts = False
        if flip1 and flip2:
            try:
                tcert = flip_then_skewer(space, g1, g2, c, budget.chain_k, partial=PARTIAL)
                tau, fts, skew = tcert.to_dict(space.label), True, 1
            except (ChainBroken, CurtainLabError) as exc:
                log.append(f"m = {m}: flip then skewer failed: {exc}")
        if skew is None:
            skew = skewers(space, wact, c, budget.skew_max, partial=PARTIAL)
            if skew is not None:
                try:
                    tau = certify_tau(space, wact.power(skew), c, budget.chain_k,
                                      partial=PARTIAL).to_dict(space.label)
                except ChainBroken as exc:
                    log.append(f"m = {m}: {exc}")
        checks = {
            "separation_30E": separated,
            "flip_plus_by_a_power": flip1,
            "flip_minus_by_conjugate": flip2,
            "flip_then_skewer": fts,
            "contact_skewer": skew is not None,
            "tau_chain": bool(tau and tau["chain_verified"]),
            "cubical_wall_in_pole": cube["in_pole"],
            "cubical_wall_proper": cube["proper"],
        }
        log.append(f"m = {m}: flips {flip1}/{flip2}, skewer power {skew}, cubical wall {cube['proper']}")
        cert = RecipeCertificate(
            presentation=p.to_dict(), horizon=b.horizon, element_w=w.render(), a=a.render(),
            g=g.render(), m=m, E=E, curtain=_curtain_dict(c, space), checks=checks,
            skewer_power=skew, tau=tau, cubical_wall=cube, notes=list(notes),
            search={"budget": budget.to_dict(), "rho_separation": sep,
                    "axis": [space.label(v) for v in alpha]})
        if cert.complete:
            return cert
        # keep the first m with the cubical wall and a contact skewer; otherwise the first m tried
        score = (cube["proper"] and cube["in_pole"], skew is not None)
        if best is None or score > best[0]:
            best = (score, cert)
        if flip1 is False and flip2 is False and score == (True, True) and m >= 1:
            # flips cannot appear for larger m either: both powers fix walls a bounded distance apart
            if _fixed_walls_close(b, s, a, g, c):
                cert.notes.append("a and g·a·g⁻¹ fix walls of the two flats a bounded contact distance "
                                  "apart, so no power can flip both sides of a curtain")
                return cert
    return None if best is None else best[1]


def _fixed_walls_close(b: BallComplex, s: ProjectionSystem, a: GroupElement, g: GroupElement,
                       c: Curtain) -> bool:
    """Do a and g a g⁻¹ fix visible walls within 3E of each other?"""
    cg = s.contact
    space = cg.space
    act_a, act_c = wall_action(b, a), wall_action(b, g * a * g.inverse())
    near = [v for v in range(cg.n) if cg.radius[v] <= b.guard]
    fa = [v for v in near if act_a(v) == v]
    fc = [v for v in near if act_c(v) == v]
    if not fa or not fc:
        return False
    return 0 <= space.graph.set_distance(fa, fc) <= 3 * c.E


# re-verification


def recheck_certificate(doc: dict, cap: int | None = None) -> dict[str, bool]:
    """Rebuild the window from the stored presentation and recompute every check."""
    p = RaagPresentation.from_dict(doc["presentation"])
    b = build_window(p, int(doc["horizon"]), cap=cap)
    cg = build_contact_graph(b, E=int(doc["E"]))
    space = cg.space
    index = {space.label(v): v for v in range(cg.n)} if cg.n < 5_000_000 else {}
    cur = doc["curtain"]
    alpha = [index[lab] for lab in cur["axis"]]
    c = make_curtain(space, alpha, int(cur["start"]), int(cur["E"]))
    out = {}
    out["curtain_sizes"] = (len(c.pole), len(c.plus), len(c.minus)) == (
        cur["sizes"]["pole"], cur["sizes"]["plus"], cur["sizes"]["minus"])
    w = p.element(doc["element_w"])
    k = int(doc["tau"]["iterations"]) if doc.get("tau") else 3
    if doc.get("g") is None:
        a = p.element(doc["a"])
        act = wall_action(b, a)
        m = skewers(space, act, c, int(doc["m"]), partial=PARTIAL)
        out["skewer"] = m == doc["skewer_power"]
        try:
            out["tau_chain"] = certify_tau(space, act.power(m), c, k, partial=PARTIAL).chain_verified
        except (ChainBroken, TypeError):
            out["tau_chain"] = False
        return out
    a, g, m = p.element(doc["a"]), p.element(doc["g"]), int(doc["m"])
    am = a ** m
    conj = g * am * g.inverse()
    out["element_form"] = (am * conj) == w
    g1, g2 = wall_action(b, am), wall_action(b, conj)
    out["flip_plus_by_a_power"] = flips(space, g1, c, partial=PARTIAL)
    out["flip_minus_by_conjugate"] = flips(space, g2, c.flipped(), partial=PARTIAL)
    wact = wall_action(b, w)
    skew = skewers(space, wact, c, max(1, int(doc.get("skewer_power") or 1)), partial=PARTIAL)
    out["contact_skewer"] = skew is not None
    if doc.get("cubical_wall"):
        cw = doc["cubical_wall"]
        u, v = (b.window.vid(x) for x in cw["edge"])
        cube = _cubical_check(b, w, (u, v))
        out["cubical_wall_proper"] = cube["proper"]
        out["cubical_wall_in_pole"] = cg.node_of_edge(u, v) in c.pole
    return out


def certificate_consistent(doc: dict, cap: int | None = None) -> tuple[bool, dict]:
    """Recompute the checks and compare them with the stored booleans."""
    fresh = recheck_certificate(doc, cap=cap)
    stored = doc.get("checks", {})
    same = fresh.get("curtain_sizes", True) and all(
        fresh[k] == stored[k] for k in fresh if k in stored)
    return bool(same), fresh


# relation search


def relation_search(p: RaagPresentation, g1: GroupElement | str, g2: GroupElement | str, L: int,
                    max_exponent: int = 3, budget: int = 2_000_000) -> str | None:
    """Shortest nontrivial alternating word in g1, g2 of at most L syllables that is trivial.

    Exponents range over ±1..±max_exponent. Returns the relator rendered in the
    symbols ``g1``, ``g2``, or None.
    """
    g1, g2 = p.element(g1), p.element(g2)
    exps = [e for k in range(1, max_exponent + 1) for e in (k, -k)]
    powers = {(i, e): (g1 if i == 0 else g2) ** e for i in (0, 1) for e in exps}
    used = 0
    for length in range(1, L + 1):
        for first in (0, 1):
            for combo in itertools.product(exps, repeat=length):
                used += 1
                if used > budget:
                    raise BudgetExceeded(f"relation search exceeded {budget} words")
                acc = p.identity()
                for j, e in enumerate(combo):
                    acc = acc * powers[((first + j) % 2, e)]
                if acc.is_identity():
                    sup = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")
                    return " ".join(f"g{(first + j) % 2 + 1}" + ("" if e == 1 else str(e).translate(sup))
                                    for j, e in enumerate(combo))
    return None
