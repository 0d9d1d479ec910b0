"""Small named median graphs and a seeded random median-graph generator."""

from __future__ import annotations

import itertools
import random

import numpy as np

from .graph import Graph
from .median import MedianWindow


def path(n: int) -> MedianWindow:
    """Path with n vertices 0..n-1."""
    return MedianWindow([str(i) for i in range(n)], [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> MedianWindow:
    return MedianWindow([str(i) for i in range(n)], [(i, (i + 1) % n) for i in range(n)])


def hypercube(d: int) -> MedianWindow:
    labels = ["".join(bits) for bits in itertools.product("01", repeat=d)]
    index = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for lab in labels:
        for k in range(d):
            if lab[k] == "0":
                other = lab[:k] + "1" + lab[k + 1:]
                edges.append((index[lab], index[other]))
    return MedianWindow(labels, edges)


def grid(rows: int, cols: int) -> MedianWindow:
    """rows × cols grid; vertex (i, j) is labelled ``"i,j"``."""
    labels = [f"{i},{j}" for i in range(rows) for j in range(cols)]
    index = {lab: k for k, lab in enumerate(labels)}
    edges = []
    for i in range(rows):
        for j in range(cols):
            if i + 1 < rows:
                edges.append((index[f"{i},{j}"], index[f"{i + 1},{j}"]))
            if j + 1 < cols:
                edges.append((index[f"{i},{j}"], index[f"{i},{j + 1}"]))
    return MedianWindow(labels, edges)


def product(a: MedianWindow, b: MedianWindow) -> MedianWindow:
    labels = [f"({x}|{y})" for x in a.labels for y in b.labels]
    nb = b.n
    edges = []
    for u in range(a.n):
        for v, w in b.graph.edges():
            edges.append((u * nb + v, u * nb + w))
    for u, v in a.graph.edges():
        for w in range(nb):
            edges.append((u * nb + w, v * nb + w))
    return MedianWindow(labels, edges)


def _closure(adj: list[set[int]], seeds: set[int]) -> set[int]:
    """Interval closure by brute force on an explicit adjacency list."""
    g = Graph.from_adjacency([sorted(a) for a in adj])
    cur = set(seeds)
    while True:
        rows = {v: g.row(v) for v in cur}
        new = set(cur)
        vs = sorted(cur)
        for i, x in enumerate(vs):
            for y in vs[i + 1:]:
                new.update(np.flatnonzero(rows[x] + rows[y] == rows[x][y]).tolist())
        if new == cur:
            return cur
        cur = new


def random_median_graph(max_vertices: int, seed: int, max_seed_points: int = 3) -> MedianWindow:
    """Grow a median graph by repeated peripheral convex expansions.

    Each step picks the convex hull C of a few random vertices and glues a
    parallel copy of C along new edges; this keeps the graph median.
    """
    rng = random.Random(seed)
    adj: list[set[int]] = [set()]
    stalled = 0
    while len(adj) < max_vertices and stalled < 20:
        k = rng.randint(1, max_seed_points)
        seeds = {rng.randrange(len(adj)) for _ in range(k)}
        C = _closure(adj, seeds)
        if len(adj) + len(C) > max_vertices:
            stalled += 1
            continue
        stalled = 0
        copy = {c: len(adj) + i for i, c in enumerate(sorted(C))}
        adj.extend(set() for _ in C)
        for c, c2 in copy.items():
            adj[c].add(c2)
            adj[c2].add(c)
            for d in list(adj[c]):
                if d in copy and d != c2:
                    adj[c2].add(copy[d])
                    adj[copy[d]].add(c2)
    edges = [(u, v) for u in range(len(adj)) for v in adj[u] if u < v]
    return MedianWindow([f"v{i}" for i in range(len(adj))], edges)


def random_tree(n: int, seed: int) -> MedianWindow:
    rng = random.Random(seed)
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    return MedianWindow([f"t{i}" for i in range(n)], edges)
