"""Small undirected simple graph on vertices ``0..n-1`` with vectorised BFS."""

from __future__ import annotations

from collections import OrderedDict
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

UNREACHED = -1


class Graph:
    """Adjacency-list graph; BFS runs frontier-at-a-time over a CSR matrix."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], cache_rows: int = 64):
        self.n = int(n)
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.adj: list[tuple[int, ...]] = [tuple(sorted(s)) for s in nbrs]
        self._csr = None
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._cache_rows = cache_rows

    @classmethod
    def from_adjacency(cls, adj: Sequence[Sequence[int]]) -> "Graph":
        g = cls.__new__(cls)
        g.n = len(adj)
        g.adj = [tuple(sorted(a)) for a in adj]
        g._csr = None
        g._rows = OrderedDict()
        g._cache_rows = 64
        return g

    @classmethod
    def from_csr(cls, mat: sparse.csr_matrix) -> "Graph":
        """Graph from a symmetric 0/1 sparse matrix; the diagonal is ignored."""
        mat = sparse.csr_matrix(mat)
        mat.setdiag(0)
        mat.eliminate_zeros()
        mat.sort_indices()
        indptr, indices = mat.indptr, mat.indices
        g = cls.from_adjacency([indices[indptr[i]:indptr[i + 1]].tolist() for i in range(mat.shape[0])])
        return g

    def edges(self):
        for u, nb in enumerate(self.adj):
            for v in nb:
                if u < v:
                    yield (u, v)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    @property
    def csr(self) -> sparse.csr_matrix:
        if self._csr is None:
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(a) for a in self.adj])
            indices = np.fromiter(
                (v for a in self.adj for v in a), dtype=np.int64, count=int(indptr[-1])
            )
            data = np.ones(len(indices), dtype=np.int8)
            self._csr = sparse.csr_matrix((data, indices, indptr), shape=(self.n, self.n))
        return self._csr

    def bfs(self, sources, mask: np.ndarray | None = None) -> np.ndarray:
        """Distances from the source set; ``-1`` where unreachable.

        ``mask`` (boolean, length n) restricts the search to allowed vertices.
        """
        if isinstance(sources, (int, np.integer)):
            src = np.array([sources], dtype=np.int64)
        else:
            src = np.unique(np.fromiter(sources, dtype=np.int64))
        dist = np.full(self.n, UNREACHED, dtype=np.int64)
        if src.size == 0:
            return dist
        dist[src] = 0
        csr = self.csr
        indptr, indices = csr.indptr, csr.indices
        frontier = src
        d = 0
        while frontier.size:
            d += 1
            starts = indptr[frontier]
            lens = indptr[frontier + 1] - starts
            # flat positions of every neighbour slot of the frontier
            pos = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(int(lens.sum()))
            nb = np.unique(indices[pos])
            nb = nb[dist[nb] == UNREACHED]
            if mask is not None:
                nb = nb[mask[nb]]
            dist[nb] = d
            frontier = nb
        return dist

    def row(self, v: int) -> np.ndarray:
        """Cached single-source distance row."""
        r = self._rows.get(v)
        if r is not None:
            self._rows.move_to_end(v)
            return r
        r = self.bfs(v)
        r.setflags(write=False)
        self._rows[v] = r
        if len(self._rows) > self._cache_rows:
            self._rows.popitem(last=False)
        return r

    def distance(self, u: int, v: int) -> int:
        return int(self.row(u)[v])

    def set_distance(self, a: Iterable[int], b: Iterable[int]) -> int:
        b = list(b)
        dist = self.bfs(list(a))
        vals = dist[b]
        vals = vals[vals >= 0]
        return int(vals.min()) if vals.size else UNREACHED

    def shortest_path(self, u: int, v: int) -> list[int]:
        """One geodesic from u to v; ties broken towards smaller vertex ids."""
        dv = self.row(v)
        if dv[u] < 0:
            raise ValueError(f"{u} and {v} are not connected")
        path = [u]
        cur = u
        while cur != v:
            cur = min(w for w in self.adj[cur] if dv[w] == dv[cur] - 1)
            path.append(cur)
        return path

    def is_connected(self) -> bool:
        return self.n == 0 or bool((self.bfs(0) >= 0).all())

    def components(self, removed_edges: set[tuple[int, int]] | None = None) -> np.ndarray:
        """Component label per vertex after deleting ``removed_edges``."""
        labels = np.full(self.n, -1, dtype=np.int64)
        removed = removed_edges or set()
        comp = 0
        for s in range(self.n):
            if labels[s] >= 0:
                continue
            labels[s] = comp
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self.adj[u]:
                    if labels[w] < 0 and (min(u, w), max(u, w)) not in removed:
                        labels[w] = comp
                        stack.append(w)
            comp += 1
        return labels

    def diameter(self, vertices: Iterable[int] | None = None) -> int:
        vs = list(range(self.n)) if vertices is None else list(vertices)
        best = 0
        for v in vs:
            r = self.row(v)[vs]
            best = max(best, int(r.max()))
        return best


def _four_point(D: np.ndarray, i, j, k, l) -> np.ndarray:
    s = np.sort(np.stack([D[i, j] + D[k, l], D[i, k] + D[j, l], D[i, l] + D[j, k]]), axis=0)
    return (s[2] - s[1]) / 2


def four_point_delta(g: Graph, vertices: Sequence[int] | None = None, samples: int | None = None,
                     seed: int = 0, pool: int = 256) -> float:
    """Gromov four-point hyperbolicity constant.

    Exhaustive over all quadruples of ``vertices`` when ``samples`` is None
    (quartic cost, limited to 400 vertices). Otherwise ``samples`` seeded random
    quadruples drawn from a pool of at most ``pool`` vertices whose pairwise
    distances are computed once.
    """
    vs = np.arange(g.n) if vertices is None else np.asarray(list(vertices), dtype=np.int64)
    if len(vs) < 4:
        return 0.0
    if samples is None:
        if len(vs) > 400:
            raise ValueError("exhaustive four-point scan is limited to 400 vertices")
        D = np.stack([g.bfs(int(v))[vs] for v in vs]).astype(np.float64)
        m = len(vs)
        best = 0.0
        # vectorised over the (k, l) block for each pair i < j
        for i in range(m):
            for j in range(i + 1, m):
                a = D[i, j] + D
                b = D[i][:, None] + D[j][None, :]
                c = D[j][:, None] + D[i][None, :]
                s = np.sort(np.stack([a, b, c]), axis=0)
                best = max(best, float((s[2] - s[1]).max()) / 2)
        return best
    rng = np.random.default_rng(seed)
    if len(vs) > pool:
        vs = np.sort(rng.choice(vs, pool, replace=False))
    D = np.stack([g.bfs(int(v))[vs] for v in vs]).astype(np.float64)
    q = rng.integers(0, len(vs), size=(samples, 4))
    return float(_four_point(D, q[:, 0], q[:, 1], q[:, 2], q[:, 3]).max())
