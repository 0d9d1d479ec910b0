"""Curtains in finite hyperbolic graphs, chains of curtains, and flip/skewer predicates.

A curtain is cut out of a geodesic ``axis`` by a subinterval of 6E edges: the
pole is everything whose nearest-point projection meets the interval, and the
two half-spaces are what projects entirely before or after it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import (ChainBroken, CurtainLabError, FlipPreconditionFailed, IntervalTooWide,
                     NotGeodesic, PartialAction, TooClose)
from .graph import Graph, four_point_delta

log = logging.getLogger(__name__)


@dataclass
class HypGraph:
    graph: Graph
    E: int = 1
    labels: list[str] | None = None

    def __post_init__(self):
        if self.E < 1:
            raise ValueError("E must be a positive integer")

    @property
    def n(self) -> int:
        return self.graph.n

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def distance(self, u: int, v: int) -> int:
        return self.graph.distance(u, v)

    def check_hyperbolicity(self, samples: int | None = None, seed: int = 0) -> float:
        """Observed four-point constant; must not exceed E."""
        return four_point_delta(self.graph, samples=samples, seed=seed)


def estimate_E(graph: Graph, samples: int | None = None, seed: int = 0) -> int:
    """Smallest integer E ≥ 1 bounding the four-point constant.

    Exhaustive up to 120 vertices unless ``samples`` is given; sampled above.
    """
    if samples is None and graph.n > 120:
        samples = 200_000
    delta = four_point_delta(graph, samples=samples, seed=seed)
    return max(1, math.ceil(delta))


def path_graph(n: int, E: int = 1) -> HypGraph:
    return HypGraph(Graph(n, [(i, i + 1) for i in range(n - 1)]), E)


# partial automorphisms


class Automorphism:
    """A graph automorphism known only where ``forward``/``backward`` return a vertex.

    Both maps return None outside their domain of definition (for instance when
    the image leaves a finite window).
    """

    def __init__(self, forward: Callable[[int], int | None], backward: Callable[[int], int | None],
                 name: str = "g"):
        self._fwd = forward
        self._bwd = backward
        self.name = name
        self._cache: dict[int, int | None] = {}

    def __call__(self, v: int) -> int | None:
        try:
            return self._cache[v]
        except KeyError:
            w = self._fwd(int(v))
            self._cache[v] = w
            return w

    def __repr__(self):
        return f"Automorphism({self.name})"

    def inverse(self) -> "Automorphism":
        return Automorphism(self._bwd, self._fwd, name=f"({self.name})⁻¹")

    def compose(self, other: "Automorphism") -> "Automorphism":
        """``self ∘ other``: apply other first."""
        def fwd(v):
            w = other(v)
            return None if w is None else self(w)

        inv_self, inv_other = self.inverse(), other.inverse()

        def bwd(v):
            w = inv_self(v)
            return None if w is None else inv_other(w)

        return Automorphism(fwd, bwd, name=f"{self.name}·{other.name}")

    def power(self, k: int) -> "Automorphism":
        if k == 0:
            return Automorphism(lambda v: v, lambda v: v, name="id")
        base = self if k > 0 else self.inverse()
        steps = abs(k)

        def fwd(v, base=base):
            for _ in range(steps):
                v = base(v)
                if v is None:
                    return None
            return v

        inv = base.inverse()

        def bwd(v, inv=inv):
            for _ in range(steps):
                v = inv(v)
                if v is None:
                    return None
            return v

        return Automorphism(fwd, bwd, name=self.name if k == 1 else f"({self.name})^{k}")

    @classmethod
    def from_permutation(cls, perm: Sequence[int], name: str = "g") -> "Automorphism":
        """Total automorphism from an image array; ``-1`` entries mark undefined images."""
        perm = [int(p) for p in perm]
        inv = {p: i for i, p in enumerate(perm) if p >= 0}
        return cls(lambda v: perm[v] if perm[v] >= 0 else None, lambda v: inv.get(v), name=name)

    @classmethod
    def identity(cls) -> "Automorphism":
        return cls(lambda v: v, lambda v: v, name="id")


# curtains


@dataclass(frozen=True)
class Curtain:
    axis: tuple[int, ...]
    start: int
    E: int
    pole: frozenset[int]
    plus: frozenset[int]
    minus: frozenset[int]
    straddling: int = 0

    @property
    def stop(self) -> int:
        return self.start + 6 * self.E

    @property
    def interval(self) -> tuple[int, ...]:
        return self.axis[self.start:self.stop + 1]

    def flipped(self) -> "Curtain":
        """Same curtain with the orientation of the axis reversed."""
        L = len(self.axis) - 1
        return Curtain(tuple(reversed(self.axis)), L - self.stop, self.E,
                       self.pole, self.minus, self.plus, self.straddling)

    def to_dict(self, labels: Callable[[int], str] | None = None, full: bool = True) -> dict:
        name = labels or str
        doc = {"axis": [name(v) for v in self.axis], "start": self.start, "E": self.E,
               "interval": [self.start, self.stop],
               "sizes": {"pole": len(self.pole), "plus": len(self.plus), "minus": len(self.minus)},
               "straddling": self.straddling}
        if full:
            doc["pole"] = sorted(name(v) for v in self.pole)
            doc["plus"] = sorted(name(v) for v in self.plus)
            doc["minus"] = sorted(name(v) for v in self.minus)
        return doc


def check_geodesic(g: HypGraph, alpha: Sequence[int]) -> None:
    alpha = list(alpha)
    for u, v in zip(alpha, alpha[1:]):
        if v not in g.graph.adj[u]:
            raise NotGeodesic(f"{g.label(u)} and {g.label(v)} are not adjacent")
    if len(alpha) > 1 and g.distance(alpha[0], alpha[-1]) != len(alpha) - 1:
        raise NotGeodesic(f"path of length {len(alpha) - 1} is not a geodesic")


# below this size one batched scipy call beats a frontier BFS per source
SCIPY_BFS_LIMIT = 50_000


def _distance_rows(g: HypGraph, sources: Sequence[int], chunk: int = 64):
    """Distance rows from each source in turn, unreachable as int64 max."""
    big = np.iinfo(np.int64).max
    sources = list(sources)
    if g.n > SCIPY_BFS_LIMIT:
        # frontier BFS wins on large graphs of small diameter
        for a in sources:
            d = g.graph.bfs(a)
            yield np.where(d < 0, big, d)
        return
    for lo in range(0, len(sources), chunk):
        rows = shortest_path(g.graph.csr, unweighted=True, directed=False, indices=sources[lo:lo + chunk])
        far = np.isinf(rows)
        out = np.where(far, 0, rows).astype(np.int64)
        out[far] = big
        yield from out


def _projection_scan(g: HypGraph, alpha: Sequence[int], lo_mark: int | None = None,
                     hi_mark: int | None = None):
    """Per vertex: distance to alpha, first and last nearest index, and whether a nearest index
    lies in [lo_mark, hi_mark]."""
    n = g.n
    best = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    first = np.full(n, -1, dtype=np.int64)
    last = np.full(n, -1, dtype=np.int64)
    meets = np.zeros(n, dtype=bool)
    for i, d in enumerate(_distance_rows(g, alpha)):
        closer = d < best
        tie = d == best
        best[closer] = d[closer]
        first[closer] = i
        last[closer | tie] = i
        inside = lo_mark is not None and lo_mark <= i <= hi_mark
        meets[closer] = inside
        if inside:
            meets[tie] = True
    return best, first, last, meets


def project_to_geodesic(g: HypGraph, alpha: Sequence[int], x: int) -> frozenset[int]:
    """All vertices of alpha at minimal distance from x."""
    check_geodesic(g, alpha)
    row = g.graph.row(x)
    d = row[list(alpha)]
    d = np.where(d < 0, np.iinfo(np.int64).max, d)
    idx = np.flatnonzero(d == d.min())
    if idx[-1] - idx[0] > g.E:
        log.warning("projection of %s onto the axis has diameter %d > E = %d",
                    g.label(x), idx[-1] - idx[0], g.E)
    return frozenset(alpha[i] for i in idx)


def make_curtain(g: HypGraph, alpha: Sequence[int], offset: int, E: int | None = None,
                 validate: bool = True) -> Curtain:
    """Curtain dual to the interval of 6E edges starting ``offset`` edges along alpha."""
    E = g.E if E is None else E
    alpha = tuple(int(a) for a in alpha)
    L = len(alpha) - 1
    if L < 6 * E + 2:
        raise IntervalTooWide(f"axis of length {L} is shorter than 6E + 2 = {6 * E + 2}")
    if offset < 1 or offset + 6 * E > L - 1:
        raise IntervalTooWide(
            f"interval [{offset}, {offset + 6 * E}] is not strictly inside the axis [0, {L}]")
    if validate:
        check_geodesic(g, alpha)
    stop = offset + 6 * E
    _, first, last, meets = _projection_scan(g, alpha, offset, stop)
    plus = ~meets & (first > stop)
    minus = ~meets & (last < offset)
    pole = ~(plus | minus)
    straddling = int((pole & ~meets).sum())
    return Curtain(alpha, offset, E, frozenset(np.flatnonzero(pole).tolist()),
                   frozenset(np.flatnonzero(plus).tolist()),
                   frozenset(np.flatnonzero(minus).tolist()), straddling)


def curtain_report(g: HypGraph, c: Curtain) -> dict:
    """Check the defining properties of a curtain; every entry must be True."""
    every = c.pole | c.plus | c.minus
    partition = len(every) == g.n and not (c.pole & c.plus) and not (c.pole & c.minus)
    disjoint = not (c.plus & c.minus)
    crossing = True
    for u in c.plus:
        if any(w in c.minus for w in g.graph.adj[u]):
            crossing = False
            break
    if c.plus and c.minus:
        sep = g.graph.set_distance(c.plus, c.minus)
        separated = sep < 0 or sep > 3 * c.E
    else:
        sep, separated = None, True
    return {"partition": partition, "disjoint_halves": disjoint, "path_crossing": crossing,
            "separation": sep, "separated": separated}


def _separates(c: Curtain, a: frozenset[int], b: frozenset[int]) -> bool:
    return (a <= c.minus and b <= c.plus) or (a <= c.plus and b <= c.minus)


def is_chain(g: HypGraph, curtains: Sequence[Curtain]) -> bool:
    """Each curtain separates its neighbours, and the poles are pairwise disjoint."""
    cs = list(curtains)
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            if cs[i].pole & cs[j].pole:
                return False
    for i in range(len(cs) - 1):
        a, b = cs[i], cs[i + 1]
        if not (b.pole <= a.plus or b.pole <= a.minus):
            return False
    for i in range(1, len(cs) - 1):
        if not _separates(cs[i], cs[i - 1].pole, cs[i + 1].pole):
            return False
    return True


def greedy_chain(g: HypGraph, x: int, y: int, E: int | None = None) -> list[Curtain]:
    """Curtains on one x–y geodesic with intervals of 6E edges spaced 2E apart."""
    E = g.E if E is None else E
    d = g.distance(x, y)
    if d < 8 * E + 2:
        raise TooClose(f"d({g.label(x)}, {g.label(y)}) = {d} < 8E + 2 = {8 * E + 2}")
    alpha = g.graph.shortest_path(x, y)
    out = []
    start = 1
    while start + 6 * E <= d - 1:
        out.append(make_curtain(g, alpha, start, E, validate=False))
        start += 8 * E
    return out


# flipping and skewering


def _domain(g: HypGraph, domain: Iterable[int] | None) -> frozenset[int] | None:
    return None if domain is None else frozenset(domain)


def _restrict(s: frozenset[int], domain: frozenset[int] | None) -> frozenset[int]:
    return s if domain is None else s & domain


@dataclass
class Containment:
    """Outcome of checking ``a(src) ⊊ target`` pointwise."""
    inside: bool
    strict: bool
    checked: int
    skipped: int

    @property
    def holds(self) -> bool:
        return self.inside and self.strict


def contained(a: Automorphism, src: frozenset[int], target: frozenset[int],
              domain: frozenset[int] | None = None, partial: str = "raise") -> Containment:
    """Pointwise check of a(src) ⊆ target, plus a witness that the inclusion is proper.

    With ``partial="skip"`` vertices whose image is unknown are counted, not fatal.
    """
    checked = skipped = 0
    for v in sorted(_restrict(src, domain)):
        w = a(v)
        if w is None:
            if partial == "raise":
                raise PartialAction(f"{a.name} is undefined at vertex {v}", vertex=v)
            skipped += 1
            continue
        checked += 1
        if w not in target:
            return Containment(False, False, checked, skipped)
    inv = a.inverse()
    strict = False
    for t in sorted(_restrict(target, domain)):
        s = inv(t)
        if s is not None and s not in src:
            strict = True
            break
    return Containment(True, strict, checked, skipped)


def avoids(a: Automorphism, src: frozenset[int], forbidden: frozenset[int],
           domain: frozenset[int] | None = None, partial: str = "raise") -> bool:
    """a(src) ∩ forbidden = ∅ on the visible part of src."""
    for v in sorted(_restrict(src, domain)):
        w = a(v)
        if w is None:
            if partial == "raise":
                raise PartialAction(f"{a.name} is undefined at vertex {v}", vertex=v)
            continue
        if w in forbidden:
            return False
    return True


def flips(g: HypGraph, a: Automorphism, c: Curtain, domain: Iterable[int] | None = None,
          partial: str = "raise") -> bool:
    """a(h⁺) ⊊ h⁻ and a(h) ∩ h = ∅."""
    dom = _domain(g, domain)
    if not contained(a, c.plus, c.minus, dom, partial).holds:
        return False
    return avoids(a, c.pole, c.pole, dom, partial)


def skewers(g: HypGraph, a: Automorphism, c: Curtain, m_max: int,
            domain: Iterable[int] | None = None, partial: str = "raise") -> int | None:
    """Least m ≤ m_max with a^m(h⁺) ⊊ h⁺ and a^m(h) ∩ h = ∅, else None."""
    dom = _domain(g, domain)
    for m in range(1, m_max + 1):
        am = a.power(m)
        if contained(am, c.plus, c.plus, dom, partial).holds and avoids(am, c.pole, c.pole, dom, partial):
            return m
    return None


@dataclass
class TauCertificate:
    curtain: Curtain
    element: str
    iterations: int
    chain_verified: bool
    tau_lower: Fraction
    tau_bound: Fraction
    displacements: list[int] = field(default_factory=list)
    points_checked: int = 0
    undecided: int = 0

    def to_dict(self, labels: Callable[[int], str] | None = None) -> dict:
        return {"curtain": self.curtain.to_dict(labels, full=False), "element": self.element,
                "iterations": self.iterations, "chain_verified": self.chain_verified,
                "tau_lower": str(self.tau_lower), "tau_bound": str(self.tau_bound),
                "displacements": self.displacements, "points_checked": self.points_checked,
                "undecided": self.undecided}


def _translate_chain(w: Automorphism, c: Curtain, k: int, domain, partial):
    """Check {c, wc, ..., w^k c} is a chain; membership in w^i(S) is tested by pulling back."""
    undecided = 0
    pulls = [w.power(-i) for i in range(k + 1)]
    pushes = [w.power(i) for i in range(k + 1)]

    def image(i, s):
        nonlocal undecided
        out = set()
        for v in _restrict(s, domain):
            u = pushes[i](v)
            if u is None:
                if partial == "raise":
                    raise PartialAction(f"{w.name}^{i} is undefined at vertex {v}", vertex=v)
                undecided += 1
            else:
                out.add(u)
        return out

    def member(i, v, s):
        nonlocal undecided
        u = pulls[i](v)
        if u is None:
            if partial == "raise":
                raise PartialAction(f"{w.name}^-{i} is undefined at vertex {v}", vertex=v)
            undecided += 1
            return None
        return u in s

    poles = [image(i, c.pole) for i in range(k + 1)]
    for i in range(k + 1):
        for j in range(i + 1, k + 1):
            if poles[i] & poles[j]:
                return False, undecided
    for i in range(k + 1):
        for j in range(k + 1):
            if i == j:
                continue
            side = c.minus if j < i else c.plus
            for v in poles[j]:
                if member(i, v, side) is False:
                    return False, undecided
    return True, undecided


def certify_tau(g: HypGraph, w: Automorphism, c: Curtain, k: int = 3,
                domain: Iterable[int] | None = None, partial: str = "raise",
                max_points: int = 200) -> TauCertificate:
    """Check that the translates c, wc, ..., w^k c form a chain and measure displacements."""
    if k < 1:
        raise ValueError("k must be at least 1")
    dom = _domain(g, domain)
    if not (contained(w, c.plus, c.plus, dom, partial).holds and avoids(w, c.pole, c.pole, dom, partial)):
        raise ChainBroken(f"{w.name} does not skewer the curtain with power 1")
    ok, undecided = _translate_chain(w, c, k, dom, partial)
    if not ok:
        raise ChainBroken(f"the translates of the curtain by {w.name} up to power {k} are not a chain")
    pts = sorted(_restrict(c.pole, dom))
    if len(pts) > max_points:
        step = len(pts) / max_points
        pts = [pts[int(i * step)] for i in range(max_points)]
    powers = [w.power(i) for i in range(k + 1)]
    E = c.E
    worst = [None] * (k + 1)
    checked = 0
    for x in pts:
        row = None
        for i in range(1, k + 1):
            y = powers[i](x)
            if y is None:
                undecided += 1
                continue
            if row is None:
                row = g.graph.row(x)
                checked += 1
            d = int(row[y])
            if d < 0:
                undecided += 1
                continue
            if d < E * (i + 1):
                raise ChainBroken(
                    f"d({g.label(x)}, {w.name}^{i}·{g.label(x)}) = {d} < E(i+1) = {E * (i + 1)}")
            worst[i] = d if worst[i] is None else min(worst[i], d)
    return TauCertificate(c, w.name, k, True, Fraction(E), Fraction(E * (k + 1), k),
                          [d for d in worst[1:] if d is not None], checked, undecided)


def flip_then_skewer(g: HypGraph, g1: Automorphism, g2: Automorphism, c: Curtain, k: int = 3,
                     domain: Iterable[int] | None = None, partial: str = "raise") -> TauCertificate:
    """If g1 flips h⁺ and g2 flips h⁻, certify that g2·g1 pushes h ∪ h⁺ properly into h⁺."""
    dom = _domain(g, domain)
    if not flips(g, g1, c, dom, partial):
        raise FlipPreconditionFailed(f"{g1.name} does not flip the plus side")
    if not flips(g, g2, c.flipped(), dom, partial):
        raise FlipPreconditionFailed(f"{g2.name} does not flip the minus side")
    w = g2.compose(g1)
    if not contained(w, c.pole | c.plus, c.plus, dom, partial).holds:
        raise CurtainLabError(f"{w.name} does not map h ∪ h⁺ properly into h⁺")
    return certify_tau(g, w, c, k, dom, partial)
