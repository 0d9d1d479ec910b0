"""Projection systems on group windows: domains, projections, axiom sweeps and passing-up searches.

The tree-of-flats instance has one maximal domain (the window's contact graph)
and, for each flat, its two coordinate lines. Line spaces are copies of the
integers, so projections onto lines are computed exactly from normal forms and
never depend on the window; anything measured in the contact graph does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .contact import ContactGraph, build_contact_graph
from .errors import (BudgetExceeded, HorizonExceeded, InputError, NoGrowth,
                     SeparationNotAchieved)
from .raag import (BallComplex, GroupElement, RaagPresentation, Word, build_window,
                   enumerate_elements, tree_of_flats)

MAXIMAL = "S"


@dataclass(frozen=True, order=True)
class Domain:
    """``kind`` is ``"S"`` for the maximal domain or ``"line"`` for a flat's coordinate line."""

    kind: str
    rep: Word = ()
    axis: int = -1

    @property
    def is_maximal(self) -> bool:
        return self.kind == MAXIMAL

    def name(self, p: RaagPresentation) -> str:
        if self.is_maximal:
            return MAXIMAL
        return f"{p.generators[self.axis]}-line@{p.render(self.rep)}"


@dataclass
class Constants:
    lam: int
    K: int
    N: int
    E: int
    E_window: int

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "K": self.K, "N": self.N, "E": self.E, "E_window": self.E_window}


class ProjectionSystem:
    """Domains with nesting, orthogonality and transversality, and their projections.

    ``flat_gens`` lists the generators spanning the flats (a clique of the
    commutation graph whose members commute with nothing else); without it the
    system is degenerate and has only the maximal domain.
    """

    def __init__(self, ball: BallComplex, contact: ContactGraph,
                 flat_gens: Sequence[int] | None = None, name: str = "system"):
        self.ball = ball
        self.contact = contact
        self.p = ball.presentation
        self.flat_gens = tuple(flat_gens or ())
        self.name = name
        self.maximal = Domain(MAXIMAL)
        self.rho_override: dict[tuple[Domain, Domain], frozenset] = {}
        self._set_dist: dict[frozenset, np.ndarray] = {}
        self.domains = [self.maximal] + self._visible_lines()
        self.constants = Constants(lam=1, K=1, N=len(self.flat_gens) + 1, E=1, E_window=contact.E)

    # flats and lines

    def coset_rep(self, g: GroupElement | Word) -> Word:
        """Normal form with its trailing flat letters removed."""
        nf = g.normal_form if isinstance(g, GroupElement) else tuple(g)
        k = len(nf)
        while k > 0 and nf[k - 1][0] in self.flat_gens:
            k -= 1
        return nf[:k]

    def flat_coords(self, rep: Word, point: GroupElement | Word) -> dict[int, int]:
        """Exponent sums of the gate of ``point`` onto the flat ``rep·⟨flat⟩``."""
        nf = point.normal_form if isinstance(point, GroupElement) else tuple(point)
        rel = self.p.element(rep).inverse() * GroupElement(self.p, nf)
        coords = {a: 0 for a in self.flat_gens}
        for g, e in rel.normal_form:
            if g not in self.flat_gens:
                break
            coords[g] += e
        return coords

    def line(self, rep: Word | GroupElement | str, axis: int | str) -> Domain:
        if isinstance(rep, str):
            rep = self.p.element(rep)
        if isinstance(axis, str):
            axis = self.p.gen(axis)
        if axis not in self.flat_gens:
            raise InputError(f"generator {self.p.generators[axis]} does not span a line")
        return Domain("line", self.coset_rep(rep), axis)

    def _visible_lines(self) -> list[Domain]:
        if not self.flat_gens:
            return []
        reps = set()
        for w in self.ball.elements:
            if len(w) > self.ball.guard:
                break
            reps.add(self.coset_rep(w))
        key = lambda r: (len(r), tuple((g, 0 if e > 0 else 1) for g, e in r))
        return [Domain("line", r, a) for r in sorted(reps, key=key) for a in self.flat_gens]

    def act(self, g: GroupElement, U: Domain) -> Domain:
        if U.is_maximal:
            return U
        return Domain("line", self.coset_rep(g * GroupElement(self.p, U.rep)), U.axis)

    def label(self, U: Domain) -> str:
        return U.name(self.p)

    # relations

    def relation(self, U: Domain, V: Domain) -> str:
        """One of ``eq``, ``nest`` (U ⊏ V), ``contains`` (V ⊏ U), ``orth``, ``trans``."""
        if U == V:
            return "eq"
        if V.is_maximal:
            return "nest"
        if U.is_maximal:
            return "contains"
        if U.rep == V.rep:
            return "orth"
        return "trans"

    # projections

    def _element(self, x) -> GroupElement:
        if isinstance(x, GroupElement):
            return x
        if isinstance(x, str):
            return self.p.element(x)
        return self.ball.element_of(int(x))

    def pi(self, U: Domain, x):
        """Line domains: an integer coordinate. Maximal domain: the walls at the vertex."""
        if U.is_maximal:
            v = x if isinstance(x, (int, np.integer)) else self.ball.vertex_of(self._element(x))
            wall_of_edge = self.ball.window.wall_of_edge
            return frozenset(wall_of_edge(int(v), u).index for u in self.ball.window.adj[int(v)])
        return self.flat_coords(U.rep, self._element(x))[U.axis]

    def rho(self, U: Domain, V: Domain):
        """ρ^U_V: where U sits inside V."""
        if (U, V) in self.rho_override:
            return self.rho_override[(U, V)]
        rel = self.relation(U, V)
        if rel == "trans":
            return frozenset({self.flat_coords(V.rep, U.rep)[V.axis]})
        if rel == "nest" and V.is_maximal:
            return self._line_walls(U)
        raise InputError(f"ρ is not defined from {self.label(U)} to {self.label(V)} ({rel})")

    def _line_walls(self, U: Domain) -> frozenset[int]:
        """Walls crossing the line: duals of its visible edges."""
        b = self.ball
        step = ((U.axis, 1),)
        out = set()
        base = GroupElement(self.p, U.rep)
        g = self.p.element(step)
        for sign in (1, -1):
            i = 0 if sign == 1 else -1
            while True:
                u = b.index.get((base * (g ** i)).normal_form)
                v = b.index.get((base * (g ** (i + 1))).normal_form)
                if u is None or v is None:
                    if abs(i) > b.horizon + len(U.rep) + 1:
                        break
                    i += sign
                    continue
                out.add(b.window.wall_of_edge(u, v).index)
                i += sign
        if not out:
            raise HorizonExceeded(f"{self.label(U)} has no visible edge", vertex=self.p.render(U.rep))
        return frozenset(out)

    def _bfs_from(self, nodes: frozenset[int]) -> np.ndarray:
        d = self._set_dist.get(nodes)
        if d is None:
            d = self.contact.graph.bfs(nodes)
            if len(self._set_dist) > 256:
                self._set_dist.clear()
            self._set_dist[nodes] = d
        return d

    def dist(self, U: Domain, A, B) -> int:
        """Distance between two projections (sets or single points) in U's space."""
        if U.is_maximal:
            A = frozenset(A)
            d = self._bfs_from(A)[list(B)]
            d = d[d >= 0]
            return int(d.min()) if d.size else -1
        A = A if isinstance(A, (set, frozenset)) else {A}
        B = B if isinstance(B, (set, frozenset)) else {B}
        return min(abs(a - b) for a in A for b in B)

    def diam(self, U: Domain, A) -> int:
        A = list(A) if isinstance(A, (set, frozenset)) else [A]
        if U.is_maximal:
            return max(int(self.contact.graph.row(a)[A].max()) for a in A)
        return max(A) - min(A)

    # constants

    def sample_vertices(self, radius: int | None = None) -> list[int]:
        r = self.ball.guard if radius is None else radius
        depth = self.ball.window.depth
        return [v for v in range(self.ball.window.n) if depth[v] <= r]

    def transverse_pairs(self) -> list[tuple[Domain, Domain]]:
        return [(U, V) for i, U in enumerate(self.domains) for V in self.domains[i + 1:]
                if self.relation(U, V) == "trans"]

    def measure_constants(self, samples: Sequence[int] | None = None, bgi_pairs: int = 400,
                          seed: int = 0) -> Constants:
        """Set λ to one more than the largest defect seen, then derive K and E."""
        samples = self.sample_vertices() if samples is None else list(samples)
        worst = 0
        for U, V in self.transverse_pairs():
            worst = max(worst, self.diam(U, self.rho(V, U)), self.diam(V, self.rho(U, V)))
            for x in samples:
                worst = max(worst, min(self.dist(U, self.pi(U, x), self.rho(V, U)),
                                       self.dist(V, self.pi(V, x), self.rho(U, V))))
        for U in self.domains[1:]:
            worst = max(worst, self.diam(self.maximal, self.rho(U, self.maximal)))
        for x in samples:
            worst = max(worst, self.diam(self.maximal, self.pi(self.maximal, x)))
        lam = worst + 1
        # BGI defect among pairs whose contact geodesic keeps away from ρ
        for row in _bgi_rows(self, self.domains[1:], _pairs(samples, bgi_pairs, seed), lam):
            worst = max(worst, row["diameter"])
        lam = worst + 1
        K = 1
        win = self.ball.window
        for x in samples:
            for y in win.adj[x]:
                for U in self.domains:
                    px, py = self.pi(U, x), self.pi(U, y)
                    if U.is_maximal:
                        K = max(K, self.diam(U, px | py))
                    else:
                        K = max(K, abs(px - py))
        N = len(self.flat_gens) + 1
        self.constants = Constants(lam=lam, K=K, N=N, E=max(K, N * lam), E_window=self.contact.E)
        return self.constants

    def to_dict(self, samples: Sequence[int] | None = None) -> dict:
        samples = self.sample_vertices() if samples is None else list(samples)
        lab = self.label
        vl = self.ball.window.labels
        rel = {}
        for i, U in enumerate(self.domains):
            for V in self.domains[i + 1:]:
                rel[f"{lab(U)} | {lab(V)}"] = self.relation(U, V)
        pi = {lab(U): {vl[x]: (sorted(self.pi(U, x)) if U.is_maximal else self.pi(U, x))
                       for x in samples} for U in self.domains}
        rho = {}
        for U in self.domains:
            for V in self.domains:
                r = self.relation(U, V)
                if r == "trans" or (r == "nest" and V.is_maximal):
                    rho[f"{lab(U)} -> {lab(V)}"] = sorted(self.rho(U, V))
        return {"name": self.name, "presentation": self.p.to_dict(), "horizon": self.ball.horizon,
                "guard": self.ball.guard, "maximal": MAXIMAL,
                "domains": [lab(U) for U in self.domains], "relations": rel, "pi": pi, "rho": rho,
                "constants": self.constants.to_dict()}


def instantiate_tree_of_flats(horizon: int = 8, cap: int | None = None, seed: int = 0,
                              measure: bool = True) -> tuple[BallComplex, ProjectionSystem]:
    if horizon < 6:
        raise InputError("the tree-of-flats system needs horizon ≥ 6")
    p = tree_of_flats()
    ball = build_window(p, horizon, cap=cap)
    cg = build_contact_graph(ball, seed=seed)
    s = ProjectionSystem(ball, cg, flat_gens=(p.gen("x"), p.gen("y")), name="tree of flats")
    if measure:
        s.measure_constants(seed=seed)
    return ball, s


def instantiate_degenerate(p: RaagPresentation, horizon: int, cap: int | None = None,
                           seed: int = 0, name: str = "degenerate") -> tuple[BallComplex, ProjectionSystem]:
    """Only the maximal domain (used for free groups and products)."""
    ball = build_window(p, horizon, cap=cap)
    cg = build_contact_graph(ball, seed=seed)
    s = ProjectionSystem(ball, cg, None, name=name)
    s.constants = Constants(lam=1, K=1, N=1, E=cg.E, E_window=cg.E)
    return ball, s


# axiom sweeps


def _pairs(samples: Sequence[int], count: int, seed: int) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    samples = list(samples)
    if len(samples) < 2:
        return []
    total = len(samples) * (len(samples) - 1) // 2
    if total <= count:
        return [(samples[i], samples[j]) for i in range(len(samples)) for j in range(i + 1, len(samples))]
    out = set()
    while len(out) < count:
        i, j = rng.choice(len(samples), 2, replace=False)
        out.add((samples[min(i, j)], samples[max(i, j)]))
    return sorted(out)


def verify_behrstock(s: ProjectionSystem, samples: Iterable[int] | None = None,
                     lam: int | None = None) -> list[dict]:
    """Triples (U, V, x) where x is far from ρ in both of two transverse domains."""
    lam = s.constants.lam if lam is None else lam
    samples = s.sample_vertices() if samples is None else list(samples)
    bad = []
    for U, V in s.transverse_pairs():
        rVU, rUV = s.rho(V, U), s.rho(U, V)
        for a, b, ra, rb in ((U, V, rVU, rUV), (V, U, rUV, rVU)):
            for x in samples:
                du = s.dist(a, s.pi(a, x), ra)
                if du > lam:
                    dv = s.dist(b, s.pi(b, x), rb)
                    if not dv < lam:
                        bad.append({"U": s.label(a), "V": s.label(b), "x": s.ball.window.labels[x],
                                    "d_U": du, "d_V": dv})
    return bad


def _contact_geodesic(s: ProjectionSystem, A: frozenset[int], B: frozenset[int]) -> list[int]:
    """A shortest contact-graph path from the set A to the set B."""
    dA = s._bfs_from(A)
    Bl = sorted(B)
    end = min(Bl, key=lambda v: (dA[v], v))
    path = [end]
    adj = s.contact.graph.adj
    while dA[path[-1]] > 0:
        cur = path[-1]
        path.append(min(w for w in adj[cur] if dA[w] == dA[cur] - 1))
    return path[::-1]


def _bgi_rows(s: ProjectionSystem, lines: Sequence[Domain], pairs, lam: int):
    S = s.maximal
    geos = {}
    for x, y in pairs:
        geos[(x, y)] = _contact_geodesic(s, s.pi(S, x), s.pi(S, y))
    for U in lines:
        dr = s._bfs_from(s.rho(U, S))
        for (x, y), gam in geos.items():
            gap = int(dr[gam].min())
            if gap > lam:
                yield {"U": U, "x": x, "y": y, "gap": gap,
                       "diameter": abs(s.pi(U, x) - s.pi(U, y))}


def verify_bgi(s: ProjectionSystem, U: Domain | None = None, V: Domain | None = None,
               pairs: Sequence[tuple[int, int]] | None = None, lam: int | None = None,
               count: int = 400, seed: int = 0) -> list[dict]:
    """Pairs x, y whose contact geodesic stays λ-far from ρ^U_S yet whose U-projections differ by more than λ.

    With U omitted every line domain is checked.
    """
    lam = s.constants.lam if lam is None else lam
    V = s.maximal if V is None else V
    if not V.is_maximal:
        raise InputError("bounded geodesic image is swept against the maximal domain")
    lines = [U] if U is not None else s.domains[1:]
    for L in lines:
        if s.relation(L, V) != "nest":
            raise InputError(f"{s.label(L)} is not nested in {s.label(V)}")
    pairs = _pairs(s.sample_vertices(), count, seed) if pairs is None else list(pairs)
    bad = []
    for row in _bgi_rows(s, lines, pairs, lam):
        if row["diameter"] > lam:
            bad.append({"U": s.label(row["U"]), "x": s.ball.window.labels[row["x"]],
                        "y": s.ball.window.labels[row["y"]], "gap": row["gap"],
                        "diameter": row["diameter"]})
    return bad


# searches


@dataclass
class ActiveDomainReport:
    element: GroupElement
    domain: Domain
    growth_ratio: Fraction
    passes_threshold: bool
    ratios: dict[str, str] = field(default_factory=dict)

    def to_dict(self, s: ProjectionSystem) -> dict:
        return {"element": self.element.render(), "domain": s.label(self.domain),
                "growth_ratio": str(self.growth_ratio), "passes_threshold": self.passes_threshold}


def find_active_domain(s: ProjectionSystem, b: BallComplex, a: GroupElement, k: int | None = None,
                       A_threshold: Fraction = Fraction(1, 2)) -> ActiveDomainReport:
    """Domain where the orbit of the basepoint under a grows fastest."""
    if a.is_identity():
        raise NoGrowth("the identity has no growth")
    if k is None:
        k = max(1, b.guard // a.length)
    if a.length * k > b.horizon:
        raise HorizonExceeded(f"{a}^{k} leaves the window of radius {b.horizon}", vertex=str(a ** k))
    orbit = [a ** i for i in range(k + 1)]
    best: tuple[Fraction, int, Domain] | None = None
    ratios = {}
    x0 = orbit[0]
    for order, U in enumerate(s.domains):
        p0 = s.pi(U, x0)
        r = Fraction(0)
        for i in range(1, k + 1):
            r = max(r, Fraction(s.dist(U, p0, s.pi(U, orbit[i])), i))
        ratios[s.label(U)] = str(r)
        # prefer proper domains on ties: the maximal domain only wins with strictly more growth
        rank = (r, 0 if U.is_maximal else 1, -order)
        if best is None or rank > best[0]:
            best = (rank, order, U)
    (r, _, _), _, U = best
    if r == 0:
        raise NoGrowth(f"{a} moves the basepoint nowhere within {k} steps")
    return ActiveDomainReport(a, U, r, r > A_threshold, ratios)


def find_transverse_pair(s: ProjectionSystem, T: Sequence[GroupElement | str], U: Domain,
                         N: int | None = None) -> tuple[GroupElement, Domain] | None:
    """Shortest b in T ∪ ... ∪ T^{N+1} with bU transverse to U."""
    if U.is_maximal:
        raise InputError("the domain must not be the maximal one")
    N = s.constants.N if N is None else N
    for b in enumerate_elements(s.p, T, N + 1):
        if b.is_identity():
            continue
        bU = s.act(b, U)
        if s.relation(U, bU) == "trans":
            return b, bU
    return None


@dataclass
class ConjugateChain:
    domains: list[Domain]
    elements: list[GroupElement]
    carriers: list[GroupElement]
    powers: list[int]
    separations: list[int]
    pairwise_transverse: bool

    def to_dict(self, s: ProjectionSystem) -> dict:
        return {"domains": [s.label(U) for U in self.domains],
                "elements": [g.render() for g in self.elements],
                "powers": self.powers, "separations": self.separations,
                "pairwise_transverse": self.pairwise_transverse}


def conjugate_chain(s: ProjectionSystem, b_complex: BallComplex, a: GroupElement, b: GroupElement,
                    U: Domain, K1: float, P: int, M: int = 1, s_max: int = 64) -> ConjugateChain:
    """Translates U_0..U_P of U, consecutive ones ρ-separated by more than K1.

    U_i = c_i·U and g_i = c_i a^M c_i⁻¹ is active over U_i; U_{i+1} = g_i^s U_{i-1}
    with s the least power giving the separation.
    """
    bU = s.act(b, U)
    if s.relation(U, bU) != "trans":
        raise InputError("b·U must be transverse to U")
    aM = a ** M
    if s.act(aM, U) != U:
        raise InputError("a^M must fix U")
    carriers = [s.p.identity(), b]
    domains = [U, bU]
    elements: list[GroupElement] = []
    powers, seps = [], []
    for i in range(1, P):
        c = carriers[i]
        g = c * aM * c.inverse()
        elements.append(g)
        Ui, prev = domains[i], domains[i - 1]
        r_prev = s.rho(prev, Ui)
        for k in range(1, s_max + 1):
            cand = s.act(g ** k, prev)
            if s.relation(cand, Ui) != "trans":
                continue
            sep = s.dist(Ui, r_prev, s.rho(cand, Ui))
            if sep > K1:
                break
        else:
            raise SeparationNotAchieved(
                f"no power up to {s_max} separates the projections in {s.label(Ui)} by more than {K1}")
        powers.append(k)
        seps.append(sep)
        carriers.append((g ** k) * carriers[i - 1])
        domains.append(cand)
    if P >= 1 and len(elements) < P:
        c = carriers[P]
        elements.append(c * aM * c.inverse())
    E = s.constants.E_window
    for i in range(len(domains) - 1):
        if s.relation(domains[i], domains[i + 1]) != "trans":
            raise SeparationNotAchieved(f"consecutive domains {i}, {i + 1} are not transverse")
    for i, sep in enumerate(seps):
        if not sep > 4 * E:
            raise SeparationNotAchieved(f"separation {sep} in U_{i + 1} does not exceed 4E = {4 * E}")
    pairwise = all(s.relation(domains[i], domains[j]) == "trans"
                   for i in range(len(domains)) for j in range(i + 1, len(domains)))
    return ConjugateChain(domains[:P + 1], elements[:P], carriers[:P + 1], powers, seps, pairwise)


def passing_up_search(s: ProjectionSystem, domains: Sequence[Domain], x=None, y=None,
                      K1: float = 0, K2: float = 0) -> tuple[Domain, tuple[Domain, Domain, Domain]] | None:
    """First W (in domain order) nesting three inputs whose ρ-images in W are pairwise more than K2 apart."""
    if len(domains) < 3:
        return None
    candidates = [W for W in s.domains]
    for W in candidates:
        nested = [U for U in domains if s.relation(U, W) == "nest"]
        if len(nested) < 3:
            continue
        rhos = {}
        for U in nested:
            try:
                rhos[U] = s.rho(U, W)
            except HorizonExceeded:
                continue
        usable = [U for U in nested if U in rhos]
        for i in range(len(usable)):
            for j in range(i + 1, len(usable)):
                if not s.dist(W, rhos[usable[i]], rhos[usable[j]]) > K2:
                    continue
                for k in range(j + 1, len(usable)):
                    if (s.dist(W, rhos[usable[i]], rhos[usable[k]]) > K2
                            and s.dist(W, rhos[usable[j]], rhos[usable[k]]) > K2):
                        return W, (usable[i], usable[j], usable[k])
    return None


def rel_set(s: ProjectionSystem, x, y, K: float) -> list[Domain]:
    """Domains where x and y project more than K apart."""
    out = []
    for U in s.domains:
        try:
            if s.dist(U, s.pi(U, x), s.pi(U, y)) > K:
                out.append(U)
        except (HorizonExceeded, BudgetExceeded):
            continue
    return out


def rho_separations(s: ProjectionSystem, W: Domain, domains: Sequence[Domain]) -> dict[tuple[int, int], int | None]:
    """Pairwise distances between ρ-images in W; None when a ρ-image is not visible."""
    rh = []
    for U in domains:
        try:
            rh.append(s.rho(U, W))
        except HorizonExceeded:
            rh.append(None)
    out = {}
    for i in range(len(domains)):
        for j in range(i + 1, len(domains)):
            out[(i, j)] = None if rh[i] is None or rh[j] is None else s.dist(W, rh[i], rh[j])
    return out
