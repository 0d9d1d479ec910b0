"""Contact graphs of cube-complex windows, the induced action on walls, and product detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import HorizonExceeded
from .graph import Graph
from .hyperbolic import Automorphism, HypGraph, estimate_E
from .median import MedianWindow
from .raag import BallComplex, GroupElement


def _window(b) -> MedianWindow:
    return b.window if isinstance(b, BallComplex) else b


@dataclass
class ContactGraph:
    """Walls of a window as nodes; adjacent when they cross or their carriers share a vertex.

    Crossing walls share the vertices of a square, so carrier contact covers both cases.
    """

    window: MedianWindow
    space: HypGraph
    radius: np.ndarray
    interior: np.ndarray
    horizon_cut: int

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def graph(self) -> Graph:
        return self.space.graph

    @property
    def E(self) -> int:
        return self.space.E

    def wall(self, node: int):
        return self.window.walls[node]

    def node_of_edge(self, u, v) -> int:
        w = self.window
        return w.wall_of_edge(w.vid(u), w.vid(v)).index

    def label(self, node: int) -> str:
        u, v = self.window.walls[node].edge_class[0]
        return f"[{self.window.labels[u]}, {self.window.labels[v]}]"

    def to_dict(self) -> dict:
        return {"nodes": [self.label(i) for i in range(self.n)],
                "edges": [[u, v] for u, v in self.graph.edges()],
                "E": self.E, "horizon_cut": self.horizon_cut,
                "interior": int(self.interior.sum())}

    def edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.graph.edges())

    def to_dot(self) -> str:
        lines = ["graph contact {"]
        for i in range(self.n):
            lines.append(f'  {i} [label="{self.label(i)}"];')
        for u, v in self.graph.edges():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_contact_graph(b, E: int | None = None, seed: int = 0) -> ContactGraph:
    """Contact graph on every wall of the window.

    ``interior`` marks walls with an edge inside the guard ball; walls whose
    carrier reaches the horizon sphere are counted in ``horizon_cut``.
    """
    w = _window(b)
    walls = w.walls
    rows, cols = [], []
    for wall in walls:
        for v in wall.carrier:
            rows.append(wall.index)
            cols.append(v)
    inc = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)),
                            shape=(len(walls), w.n))
    touch = (inc @ inc.T).tocsr()
    touch.data[:] = 1
    g = Graph.from_csr(touch)
    depth = w.depth
    radius = np.array([min(int(depth[v]) for v in wall.carrier) for wall in walls], dtype=np.int64)
    reach = np.array([max(int(depth[v]) for v in wall.carrier) for wall in walls], dtype=np.int64)
    interior = np.array([min(max(int(depth[a]), int(depth[c])) for a, c in wall.edge_class) <= w.guard
                         for wall in walls], dtype=bool)
    cut = int((reach >= w.horizon).sum()) if w.is_window else 0
    if E is None:
        E = estimate_E(g, seed=seed)
    labels = None
    space = HypGraph(g, E, labels)
    cg = ContactGraph(w, space, radius, interior, cut)
    space.labels = _LazyLabels(cg)
    return cg


class _LazyLabels:
    """Node labels rendered on demand; windows have too many walls to render eagerly."""

    def __init__(self, cg: ContactGraph):
        self.cg = cg

    def __getitem__(self, i):
        return self.cg.label(i)

    def __len__(self):
        return self.cg.n


def _edge_image(b: BallComplex, g: GroupElement, node: int) -> tuple[int, int] | None:
    u, v = b.window.walls[node].edge_class[0]
    gu, gv = b.translate(g, u), b.translate(g, v)
    if gu is None or gv is None:
        return None
    return gu, gv


def translate_node(b: BallComplex, g: GroupElement, node: int, radius: int | None = None) -> int:
    """Node of the wall g·n; the image edge must lie within ``radius`` (default: the guard)."""
    r = b.guard if radius is None else radius
    img = _edge_image(b, g, node)
    if img is None or max(b.window.depth[img[0]], b.window.depth[img[1]]) > r:
        u, _ = b.window.walls[node].edge_class[0]
        raise HorizonExceeded(f"translate of wall {node} by {g} leaves radius {r}",
                              vertex=b.window.labels[u])
    return b.window.wall_of_edge(*img).index


def wall_action(b: BallComplex, g: GroupElement) -> Automorphism:
    """The action of g on the contact graph's nodes, defined where the image wall is visible."""
    inv = g.inverse()
    wall_of_edge = b.window.wall_of_edge

    def fwd(node, h=g):
        img = _edge_image(b, h, node)
        return None if img is None else wall_of_edge(*img).index

    def bwd(node, h=inv):
        img = _edge_image(b, h, node)
        return None if img is None else wall_of_edge(*img).index

    return Automorphism(fwd, bwd, name=g.render())


def vertex_action(b: BallComplex, g: GroupElement) -> Automorphism:
    """The action of g on window vertices, defined where the image stays in the window."""
    inv = g.inverse()
    return Automorphism(lambda v: b.translate(g, v), lambda v: b.translate(inv, v), name=g.render())


@dataclass
class ProductWitness:
    family_a: list[int]
    family_b: list[int]
    evidence: str

    def to_dict(self, labels=None) -> dict:
        name = labels or str
        return {"family_a": [name(i) for i in self.family_a],
                "family_b": [name(i) for i in self.family_b], "evidence": self.evidence}


def detect_product(b) -> ProductWitness | None:
    """Split the interior walls into two families that pairwise cross, if possible.

    Components of the non-crossing relation on interior walls; the first
    component is one family, the union of the rest the other.
    """
    w = _window(b)
    walls = w.walls
    if w.is_window:
        keep = [wall.index for wall in walls
                if min(max(int(w.depth[a]), int(w.depth[c])) for a, c in wall.edge_class) <= w.guard]
    else:
        keep = [wall.index for wall in walls]
    k = len(keep)
    if k < 2:
        return None
    pos = {idx: i for i, idx in enumerate(keep)}
    crossing = np.zeros((k, k), dtype=bool)
    for a, c in w.crossing_pairs:
        if a in pos and c in pos:
            crossing[pos[a], pos[c]] = crossing[pos[c], pos[a]] = True
    apart = ~crossing
    np.fill_diagonal(apart, False)
    ncomp, comp = connected_components(sparse.csr_matrix(apart), directed=False)
    if ncomp < 2:
        return None
    a_fam = [keep[i] for i in range(k) if comp[i] == comp[0]]
    b_fam = [keep[i] for i in range(k) if comp[i] != comp[0]]
    return ProductWitness(a_fam, b_fam, "window evidence" if w.is_window else "exact")
