"""Finite median graphs and windows into infinite ones.

A :class:`MedianWindow` is either a complete median graph (``is_window`` false)
or a radius-``horizon`` ball of an infinite median graph, in which case exact
queries are only answered for vertices within ``guard`` of the basepoint.
Walls are the Θ-classes of edges: two edges are equivalent when they are
opposite sides of a 4-cycle, closed transitively.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    CurtainLabError,
    DegenerateWall,
    HorizonExceeded,
    NoMedian,
    NotConvex,
    ParseError,
    WindowNotCheckable,
)
from .graph import Graph

Vertex = int


class Wall:
    """A Θ-class of edges together with its two half-spaces.

    Half-spaces are computed on first access by deleting the edge class and
    labelling components. ``side_a`` is the side containing the first endpoint
    of the wall's first edge.
    """

    def __init__(self, window: "MedianWindow", index: int, edges: Sequence[tuple[int, int]]):
        self.window = window
        self.index = index
        self.edge_class = tuple(edges)
        self.carrier = frozenset(v for e in self.edge_class for v in e)
        self._labels: np.ndarray | None = None

    def __repr__(self):
        return f"Wall({self.index}, {len(self.edge_class)} edges)"

    @property
    def labels(self) -> np.ndarray:
        """0 on side_a, 1 on side_b, 2 elsewhere (only for degenerate walls)."""
        if self._labels is None:
            self._labels = self.window._side_labels(self)
        return self._labels

    @property
    def degenerate(self) -> bool:
        u, v = self.edge_class[0]
        lab = self.labels
        return bool(lab[u] == lab[v]) or bool((lab == 2).any())

    @property
    def side_a(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.labels == 0).tolist())

    @property
    def side_b(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.labels == 1).tolist())

    def side(self, v: int) -> int:
        return int(self.labels[v])

    def separates(self, x: int, y: int) -> bool:
        lab = self.labels
        return lab[x] != lab[y] and lab[x] < 2 and lab[y] < 2

    def separates_sets(self, xs: Iterable[int], ys: Iterable[int]) -> bool:
        lab = self.labels
        a = {int(lab[v]) for v in xs}
        b = {int(lab[v]) for v in ys}
        return len(a) == 1 and len(b) == 1 and a != b and 2 not in a | b

    def to_dict(self) -> dict:
        lab = self.window.labels
        return {
            "index": self.index,
            "edges": [[lab[u], lab[v]] for u, v in self.edge_class],
        }


@dataclass(frozen=True)
class ConvexSet:
    members: frozenset[int]
    witness: dict = field(default_factory=dict, compare=False, hash=False)

    def __contains__(self, v) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))


class MedianWindow:
    """Median graph, or a ball in an infinite median graph."""

    def __init__(
        self,
        labels: Sequence[Hashable],
        edges: Iterable[tuple[int, int]],
        basepoint: int = 0,
        horizon: int | None = None,
        guard: int | None = None,
        is_window: bool = False,
    ):
        self.labels = [str(v) for v in labels]
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("duplicate vertex labels")
        self.graph = Graph(len(self.labels), edges)
        self.basepoint = basepoint
        self.depth = self.graph.bfs(basepoint)
        if (self.depth < 0).any():
            raise ValueError("graph is not connected")
        self.horizon = int(self.depth.max()) if horizon is None else int(horizon)
        self.is_window = bool(is_window)
        if guard is None:
            guard = self.horizon // 3 if is_window else self.horizon
        self.guard = int(guard)
        if self.is_window and self.guard > self.horizon:
            raise ValueError("guard must not exceed horizon")
        self._walls: list[Wall] | None = None
        self._edge_wall: dict[tuple[int, int], int] | None = None
        self._crossing: set[tuple[int, int]] | None = None
        self._dimension: int | None = None
        self.degenerate_walls: list[int] = []

    # -- basic access -------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def adj(self):
        return self.graph.adj

    def vid(self, v) -> int:
        """Vertex id from an id or a label."""
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if not 0 <= v < self.n:
                raise KeyError(v)
            return int(v)
        try:
            return self.index[str(v)]
        except KeyError:
            raise KeyError(f"unknown vertex {v!r}") from None

    def check_guard(self, *vs: int, radius: int | None = None) -> None:
        if not self.is_window:
            return
        r = self.guard if radius is None else radius
        for v in vs:
            if self.depth[v] > r:
                raise HorizonExceeded(
                    f"vertex {self.labels[v]} at radius {self.depth[v]} exceeds guard {r}",
                    vertex=self.labels[v],
                )

    def order_key(self, v: int):
        return (int(self.depth[v]), self.labels[v])

    # -- walls ----------------------------------------------------------------------

    def _build_walls(self) -> None:
        adj = self.graph.adj
        adjset = [frozenset(a) for a in adj]
        edge_id: dict[tuple[int, int], int] = {}
        for u, nb in enumerate(adj):
            for v in nb:
                if u < v:
                    edge_id[(u, v)] = len(edge_id)
        parent = list(range(len(edge_id)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i, j):
            ri, rj = find(i), find(j)
            if ri != rj:
                if ri < rj:
                    parent[rj] = ri
                else:
                    parent[ri] = rj

        def eid(u, v):
            return edge_id[(u, v) if u < v else (v, u)]

        corners: list[tuple[int, int]] = []
        for v, nb in enumerate(adj):
            higher = [a for a in nb if a > v]
            for a, b in itertools.combinations(higher, 2):
                for w in adjset[a] & adjset[b]:
                    if w <= v:
                        continue
                    # square v-a-w-b with v its smallest vertex
                    e_va, e_vb = eid(v, a), eid(v, b)
                    union(e_va, eid(b, w))
                    union(e_vb, eid(a, w))
                    corners.append((e_va, e_vb))

        classes: dict[int, list[tuple[int, int]]] = {}
        for e, i in edge_id.items():
            classes.setdefault(find(i), []).append(e)

        depth = self.depth
        labels = self.labels

        def wall_key(edges):
            return min((min(int(depth[u]), int(depth[v])), *sorted((labels[u], labels[v])))
                       for u, v in edges)

        ordered = sorted(classes.values(), key=wall_key)
        self._walls = []
        self._edge_wall = {}
        for idx, edges in enumerate(ordered):
            edges.sort(key=lambda e: (min(depth[e[0]], depth[e[1]]), labels[e[0]], labels[e[1]]))
            # orient the reference edge from the basepoint side
            u, v = edges[0]
            if depth[v] < depth[u]:
                edges[0] = (v, u)
            self._walls.append(Wall(self, idx, edges))
            for e in edges:
                self._edge_wall[(min(e), max(e))] = idx
        root_wall = {r: self._edge_wall[cls[0] if cls[0][0] < cls[0][1] else (cls[0][1], cls[0][0])]
                     for r, cls in classes.items()}
        crossing = set()
        self_crossing = set()
        for e1, e2 in corners:
            w1, w2 = root_wall[find(e1)], root_wall[find(e2)]
            if w1 == w2:
                self_crossing.add(w1)
            else:
                crossing.add((min(w1, w2), max(w1, w2)))
        self._crossing = crossing
        self._self_crossing = self_crossing

    def _side_labels(self, wall: Wall) -> np.ndarray:
        base = self.graph.csr
        data = base.data.copy()
        indptr, indices = base.indptr, base.indices
        for u, v in wall.edge_class:
            for a, b in ((u, v), (v, u)):
                lo, hi = indptr[a], indptr[a + 1]
                pos = lo + np.searchsorted(indices[lo:hi], b)
                data[pos] = 0
        # eliminate_zeros compacts in place, so never share arrays with the base
        cut = type(base)((data, indices.copy(), indptr.copy()), shape=base.shape)
        cut.eliminate_zeros()
        _, comp = connected_components(cut, directed=False)
        u, v = wall.edge_class[0]
        out = np.full(self.n, 2, dtype=np.int8)
        if comp[u] == comp[v]:
            return out
        out[comp == comp[u]] = 0
        out[comp == comp[v]] = 1
        return out

    @property
    def walls(self) -> list[Wall]:
        if self._walls is None:
            self._build_walls()
        return self._walls

    def wall_of_edge(self, u: int, v: int) -> Wall:
        if self._edge_wall is None:
            self._build_walls()
        try:
            return self._walls[self._edge_wall[(min(u, v), max(u, v))]]
        except KeyError:
            raise KeyError(f"{self.labels[u]}-{self.labels[v]} is not an edge") from None

    def cross(self, w1: Wall | int, w2: Wall | int) -> bool:
        """Walls cross when some square has an edge from each."""
        if self._crossing is None:
            self._build_walls()
        i = w1 if isinstance(w1, int) else w1.index
        j = w2 if isinstance(w2, int) else w2.index
        return (min(i, j), max(i, j)) in self._crossing

    @property
    def crossing_pairs(self) -> set[tuple[int, int]]:
        if self._crossing is None:
            self._build_walls()
        return self._crossing

    @property
    def dimension(self) -> int:
        """Largest family of pairwise crossing walls incident to one vertex."""
        if self._dimension is None:
            best = 1 if self.n > 1 else 0
            for v in range(self.n):
                ws = sorted({self.wall_of_edge(v, u).index for u in self.adj[v]})
                if len(ws) <= best:
                    continue
                nbrs = {a: {b for b in ws if b != a and self.cross(a, b)} for a in ws}
                best = max(best, _max_clique(set(ws), nbrs))
            self._dimension = best
        return self._dimension

    # -- serialisation ------------------------------------------------------------

    def to_dict(self) -> dict:
        lab = self.labels
        return {
            "vertices": list(lab),
            "edges": [[lab[u], lab[v]] for u, v in self.graph.edges()],
            "basepoint": lab[self.basepoint],
            "horizon": self.horizon,
            "guard": self.guard,
            "is_window": self.is_window,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MedianWindow":
        try:
            labels = [str(v) for v in doc["vertices"]]
            index = {v: i for i, v in enumerate(labels)}
            edges = [(index[str(a)], index[str(b)]) for a, b in doc["edges"]]
            base = index[str(doc.get("basepoint", labels[0]))]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed median window document: {exc!r}") from None
        return cls(labels, edges, basepoint=base, horizon=doc.get("horizon"),
                   guard=doc.get("guard"), is_window=bool(doc.get("is_window", False)))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def from_networkx_like(vertices, edges, **kw) -> MedianWindow:
    vertices = list(vertices)
    index = {v: i for i, v in enumerate(vertices)}
    return MedianWindow(vertices, [(index[a], index[b]) for a, b in edges], **kw)


# -- operations -----------------------------------------------------------------


def _max_clique(candidates: set[int], nbrs: dict[int, set[int]], size: int = 0) -> int:
    best = size
    cands = set(candidates)
    while cands:
        if size + len(cands) <= best:
            break
        a = cands.pop()
        best = max(best, _max_clique(cands & nbrs[a], nbrs, size + 1))
    return best


def validate_median(g: MedianWindow) -> bool:
    """True iff every vertex triple has exactly one median."""
    if g.is_window:
        raise WindowNotCheckable("median validation needs the full graph, not a window")
    n = g.n
    D = np.stack([g.graph.bfs(v) for v in range(n)])
    # packed interval bitsets: bit v of P[x, y] is set iff v lies on an x-y geodesic
    words = -(-n // 64)
    P = np.zeros((n, n, words * 8), dtype=np.uint8)
    for x in range(n):
        packed = np.packbits((D[x][None, :] + D) == D[x][:, None], axis=1, bitorder="little")
        P[x, :, :packed.shape[1]] = packed
    P = P.view(np.uint64)
    chunk = max(1, 2_000_000 // max(1, n * words))
    for x in range(n):
        Px = P[x]
        for lo in range(0, n, chunk):
            meet = Px[lo:lo + chunk, None, :] & Px[None, :, :] & P[lo:lo + chunk]
            if (np.bitwise_count(meet).sum(axis=2) != 1).any():
                return False
    return True


def compute_walls(g: MedianWindow, strict: bool | None = None) -> list[Wall]:
    """Θ-classes of edges, ordered by distance from the basepoint.

    A wall that does not disconnect the graph raises :class:`DegenerateWall` on
    full graphs; on windows it is only recorded in ``g.degenerate_walls``.
    """
    walls = g.walls
    strict = (not g.is_window) if strict is None else strict
    bad = sorted(set(g._self_crossing) | {w.index for w in walls if w.degenerate})
    g.degenerate_walls = bad
    if bad and strict:
        raise DegenerateWall(f"{len(bad)} edge classes do not split the graph (first: wall {bad[0]})")
    return walls


def distance(g: MedianWindow, x, y) -> int:
    x, y = g.vid(x), g.vid(y)
    g.check_guard(x, y)
    return g.graph.distance(x, y)


def separating_walls(g: MedianWindow, x, y) -> list[Wall]:
    """Walls with x and y on opposite sides, in order along a geodesic from x."""
    x, y = g.vid(x), g.vid(y)
    g.check_guard(x, y)
    path = g.graph.shortest_path(x, y)
    # every separating wall is crossed by every path, so the geodesic's walls suffice
    out = []
    seen = set()
    for u, v in zip(path, path[1:]):
        w = g.wall_of_edge(u, v)
        if w.index not in seen and w.separates(x, y):
            seen.add(w.index)
            out.append(w)
    return out


def median(g: MedianWindow, x, y, z) -> int:
    x, y, z = g.vid(x), g.vid(y), g.vid(z)
    g.check_guard(x, y, z)
    rx, ry, rz = g.graph.row(x), g.graph.row(y), g.graph.row(z)
    on = ((rx + ry == rx[y]) & (ry + rz == ry[z]) & (rx + rz == rx[z]))
    cands = np.flatnonzero(on)
    if len(cands) != 1:
        raise NoMedian(f"triple ({g.labels[x]}, {g.labels[y]}, {g.labels[z]}) has "
                       f"{len(cands)} median candidates")
    return int(cands[0])


def interval(g: MedianWindow, x: int, y: int) -> frozenset[int]:
    rx, ry = g.graph.row(x), g.graph.row(y)
    return frozenset(np.flatnonzero(rx + ry == rx[y]).tolist())


def _join(g: MedianWindow, members: frozenset[int]) -> frozenset[int]:
    ms = sorted(members)
    if len(ms) <= 1:
        return frozenset(ms)
    rows = {v: g.graph.row(v) for v in ms}
    acc = np.zeros(g.n, dtype=bool)
    for i, x in enumerate(ms):
        rx = rows[x]
        for y in ms[i + 1:]:
            acc |= rx + rows[y] == rx[y]
    acc[ms] = True
    return frozenset(np.flatnonzero(acc).tolist())


def hull(g: MedianWindow, Y: Iterable) -> ConvexSet:
    """Interval closure of Y by iterating the join J until it is stable.

    ``witness["rounds"]`` is the first k with J^k(Y) = J^(k+1)(Y).
    """
    cur = frozenset(g.vid(v) for v in Y)
    if not cur:
        return ConvexSet(cur, {"rounds": 0})
    g.check_guard(*cur)
    rounds = 0
    while True:
        nxt = _join(g, cur)
        if nxt == cur:
            break
        rounds += 1
        if g.is_window:
            outside = [v for v in nxt if g.depth[v] > g.guard]
            if outside and _join(g, nxt) != nxt:
                v = min(outside, key=g.order_key)
                raise HorizonExceeded(
                    f"hull iteration left the guard ball at {g.labels[v]}", vertex=g.labels[v])
        cur = nxt
    return ConvexSet(cur, {"rounds": rounds, "method": "join fixed point", "dimension": g.dimension})


def is_convex(g: MedianWindow, Y: Iterable[int]) -> bool:
    Y = frozenset(Y)
    return _join(g, Y) == Y


def gate_projection(g: MedianWindow, Y, x) -> int:
    """Nearest vertex of the convex set Y to x.

    Verifies that every wall separating x from its gate also separates x from Y.
    """
    x = g.vid(x)
    g.check_guard(x)
    if isinstance(Y, ConvexSet):
        members = Y.members
    else:
        members = frozenset(g.vid(v) for v in Y)
        if not is_convex(g, members):
            raise NotConvex("gate projection needs a convex target")
    if not members:
        raise NotConvex("empty target set")
    row = g.graph.row(x)
    p = min(members, key=lambda v: (int(row[v]), g.order_key(v)))
    for w in separating_walls(g, x, p) if not g.is_window else _walls_on_path(g, x, p):
        if not w.separates_sets([x], members):
            raise CurtainLabError(
                f"gate postcondition failed: wall {w.index} separates x from its gate but not from Y")
    return p


def _walls_on_path(g, x, p):
    path = g.graph.shortest_path(x, p)
    return [g.wall_of_edge(u, v) for u, v in zip(path, path[1:])]


def maximal_wall_chain(g: MedianWindow, x, y) -> list[Wall]:
    """Longest chain among the walls separating x from y.

    Separating walls either cross or are nested along the direction x → y, and
    nesting is transitive, so a chain is a longest path in the non-crossing DAG
    ordered along a geodesic.
    """
    seps = separating_walls(g, x, y)
    k = len(seps)
    if k == 0:
        return []
    best = [1] * k
    prev = [-1] * k
    for j in range(k):
        for i in range(j):
            if not g.cross(seps[i], seps[j]) and best[i] + 1 > best[j]:
                best[j] = best[i] + 1
                prev[j] = i
    end = max(range(k), key=lambda j: (best[j], -j))
    chain = []
    while end >= 0:
        chain.append(seps[end])
        end = prev[end]
    return chain[::-1]


def is_wall_chain(g: MedianWindow, walls: Sequence[Wall]) -> bool:
    """Each wall separates its two neighbours (checked on half-space labels)."""
    for a, b, c in zip(walls, walls[1:], walls[2:]):
        if not b.separates_sets(a.carrier, c.carrier):
            return False
    for a, b in zip(walls, walls[1:]):
        if g.cross(a, b):
            return False
    return True
