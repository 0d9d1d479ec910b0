"""Seeded verification sweeps shared by the CLI and the test suite.

Each sweep returns a report dict with ``passed``, counts, and a list of
failures; every failure names the generator call that reproduces it.
"""

from __future__ import annotations

import random

import numpy as np
from scipy.sparse.csgraph import shortest_path as scipy_shortest_path

from . import corpus
from .contact import build_contact_graph, wall_action
from .errors import CurtainLabError
from .hyperbolic import (Automorphism, HypGraph, contained, curtain_report, flip_then_skewer,
                         flips, greedy_chain, is_chain, make_curtain)
from .median import gate_projection, hull, is_convex, separating_walls, validate_median
from .raag import build_window, free_group


def _report(name: str, failures: list[dict], **counts) -> dict:
    return {"suite": name, "passed": not failures, "failures": failures[:20],
            "failure_count": len(failures), **counts}


def _oracle_distances(g) -> np.ndarray:
    return scipy_shortest_path(g.graph.csr, unweighted=True, directed=False).astype(np.int64)


def median_oracle(count: int = 50, max_vertices: int = 200, seed: int = 7,
                  hull_sets: int = 5, path_pairs: int = 20,
                  laws: tuple[str, ...] = ("distance", "hull")) -> dict:
    """Wall-distance identity and hull/gate laws on random median graphs.

    Distances are compared against scipy's BFS and a wall count over every pair;
    gates against the nearest point of the hull, for every vertex.
    """
    failures: list[dict] = []
    pairs = 0
    for i in range(count):
        gseed = seed * 1000 + i
        where = {"generator": "random_median_graph", "max_vertices": max_vertices, "seed": gseed}
        g = corpus.random_median_graph(max_vertices, gseed)
        _check(g, gseed, where, failures, hull_sets, path_pairs, laws)
        pairs += g.n * g.n
    return _report("median-oracle", failures, instances=count, laws=list(laws), pairs=pairs,
                   hull_sets=hull_sets * count if "hull" in laws else 0)


def check_median_graph(g, seed: int = 0, where: dict | None = None, hull_sets: int = 5,
                       path_pairs: int = 20, laws: tuple[str, ...] = ("distance", "hull")) -> dict:
    """The same laws on one explicit graph."""
    failures: list[dict] = []
    _check(g, seed, where or {}, failures, hull_sets, path_pairs, laws)
    return _report("median-oracle", failures, instances=1, laws=list(laws), vertices=g.n)


def _check(g, seed, where, failures, hull_sets, path_pairs, laws) -> None:
    if "distance" in laws and not validate_median(g):
        failures.append({**where, "check": "median"})
        return
    D = _oracle_distances(g)
    L = np.array([w.labels for w in g.walls], dtype=np.int8)
    rng = random.Random(seed)
    if "distance" in laws:
        _distance_law(g, D, L, rng, path_pairs, where, failures)
    if "hull" in laws:
        _hull_law(g, D, L, rng, hull_sets, where, failures)


def _distance_law(g, D, L, rng, path_pairs, where, failures) -> None:
    counts = np.zeros((g.n, g.n), dtype=np.int64)
    for row in L:
        counts += row[:, None] != row[None, :]
    if not np.array_equal(counts, D):
        x, y = map(int, np.argwhere(counts != D)[0])
        failures.append({**where, "check": "wall count", "x": g.labels[x], "y": g.labels[y],
                         "walls": int(counts[x, y]), "bfs": int(D[x, y])})
    for _ in range(path_pairs):
        x, y = rng.randrange(g.n), rng.randrange(g.n)
        if len(separating_walls(g, x, y)) != D[x, y]:
            failures.append({**where, "check": "separating_walls", "x": g.labels[x], "y": g.labels[y]})


def _hull_law(g, D, L, rng, hull_sets, where, failures) -> None:
    """J-iteration rounds, and walls separating x from its gate are exactly those separating x from Y."""
    for _ in range(hull_sets):
        Y = rng.sample(range(g.n), rng.randint(1, min(4, g.n)))
        H = hull(g, Y)
        if not is_convex(g, H.members) or H.witness["rounds"] > g.dimension + 1:
            failures.append({**where, "check": "hull", "set": [g.labels[v] for v in Y],
                             "rounds": H.witness["rounds"], "dimension": g.dimension})
            continue
        members = np.array(sorted(H.members))
        yside = np.where((L[:, members] == L[:, members[:1]]).all(axis=1), L[:, members[0]], -1)
        dist_to = D[:, members]
        nearest = members[dist_to.argmin(axis=1)]
        unique = (dist_to == dist_to.min(axis=1, keepdims=True)).sum(axis=1) == 1
        sep_gate = L != L[:, nearest]
        sep_set = (yside[:, None] >= 0) & (L != yside[:, None])
        bad = np.flatnonzero(~unique | (sep_gate != sep_set).any(axis=0))
        if bad.size:
            x = int(bad[0])
            failures.append({**where, "check": "gate law", "set": [g.labels[v] for v in Y],
                             "x": g.labels[x]})
        for x in rng.sample(range(g.n), min(10, g.n)):
            if gate_projection(g, H, x) != nearest[x]:
                failures.append({**where, "check": "gate_projection", "set": [g.labels[v] for v in Y],
                                 "x": g.labels[x]})


# hosts for curtain sweeps: (name, HypGraph) built deterministically


def curtain_hosts(seed: int = 0) -> list[tuple[str, HypGraph]]:
    hosts = []
    for n in (20, 40, 80):
        hosts.append((f"path({n})", HypGraph(corpus.path(n).graph, 1)))
    for k in range(3):
        t = corpus.random_tree(150, seed + k)
        hosts.append((f"random_tree(150, {seed + k})", HypGraph(t.graph, 1)))
    for name, p, h in (("free group", free_group(), 5), ("rank-3 free group", free_group(("a", "b", "c")), 4)):
        cg = build_contact_graph(build_window(p, h), seed=seed)
        hosts.append((f"contact graph of the {name} window, horizon {h}", cg.space))
    return hosts


def _random_axis(rng: random.Random, g: HypGraph, min_len: int, tries: int = 200):
    for _ in range(tries):
        x, y = rng.randrange(g.n), rng.randrange(g.n)
        if g.distance(x, y) >= min_len:
            return g.graph.shortest_path(x, y)
    return None


def curtain_axioms(count: int = 200, seed: int = 0, hosts=None) -> dict:
    """Partition, disjoint halves, path crossing and 3E separation for seeded curtains."""
    hosts = curtain_hosts(seed) if hosts is None else hosts
    rng = random.Random(seed)
    failures: list[dict] = []
    made = 0
    attempts = 0
    while made < count and attempts < 20 * count:
        attempts += 1
        name, g = hosts[attempts % len(hosts)]
        alpha = _random_axis(rng, g, 6 * g.E + 2)
        if alpha is None:
            continue
        offset = rng.randint(1, len(alpha) - 2 - 6 * g.E)
        c = make_curtain(g, alpha, offset)
        made += 1
        rep = curtain_report(g, c)
        if not all(rep[k] for k in ("partition", "disjoint_halves", "path_crossing", "separated")):
            failures.append({"host": name, "axis": [g.label(alpha[0]), g.label(alpha[-1])],
                             "offset": offset, "report": rep})
    return _report("curtain-axioms", failures, curtains=made, hosts=[h for h, _ in hosts])


def chain_bound(pairs_per_host: int = 20, seed: int = 0, hosts=None) -> dict:
    """greedy_chain length against d ≥ E·|c| and |c| ≥ floor((d − 2E)/(8E))."""
    hosts = curtain_hosts(seed) if hosts is None else hosts
    rng = random.Random(seed)
    failures: list[dict] = []
    chains = 0
    for name, g in hosts:
        E = g.E
        for _ in range(pairs_per_host):
            alpha = _random_axis(rng, g, 8 * E + 2)
            if alpha is None:
                break
            x, y = alpha[0], alpha[-1]
            d = g.distance(x, y)
            c = greedy_chain(g, x, y)
            chains += 1
            ok = d >= E * len(c) and len(c) >= (d - 2 * E) // (8 * E) and is_chain(g, c)
            if not ok:
                failures.append({"host": name, "x": g.label(x), "y": g.label(y), "d": d, "size": len(c)})
    return _report("chain-bound", failures, chains=chains)


def _reflection(n: int, centre2: int) -> Automorphism:
    """Reflection v -> centre2 - v of the path 0..n-1, undefined where it leaves the path."""
    f = lambda v: centre2 - v if 0 <= centre2 - v < n else None
    return Automorphism(f, f, name=f"r{centre2}")


def flip_skewer_instances(seed: int = 0):
    """(name, space, g1, g2, curtain) with both flips checked by the caller.

    Reflection pairs on paths, and short-word pairs acting on the free-group contact window.
    """
    for n in (40, 60):
        g = HypGraph(corpus.path(n).graph, 1)
        for start in range(4, n - 12, 3):
            c = make_curtain(g, list(range(n)), start)
            for c1 in range(2 * start - 8, 2 * start):
                for c2 in range(2 * c.stop + 2, 2 * c.stop + 10):
                    yield f"path({n}) reflections {c1}/2, {c2}/2", g, _reflection(n, c1), _reflection(n, c2), c
    p = free_group()
    b = build_window(p, 8)
    cg = build_contact_graph(b, E=1, seed=seed)
    space = cg.space
    a_node = cg.node_of_edge("e", "a")
    ends = (cg.node_of_edge("a⁻⁵", "a⁻⁴"), cg.node_of_edge("a⁴", "a⁵"))
    alpha = space.graph.shortest_path(*ends)
    c = make_curtain(space, alpha, alpha.index(a_node) - 3)
    words = ["a", "a³", "b a b⁻¹", "a b a⁻¹", "b", "a⁻³ b", "a⁻⁴ b", "a³ b", "a⁴ b", "a⁴ b⁻¹"]
    for w1 in words:
        for w2 in words:
            g1, g2 = wall_action(b, p.element(w1)), wall_action(b, p.element(w2))
            yield f"free-group contact window, g1 = {w1}, g2 = {w2}", space, g1, g2, c


def flip_skewer_soundness(seed: int = 0, k: int = 3) -> dict:
    """Wherever both flips hold, g2·g1 pushes h ∪ h⁺ properly into h⁺ and certify_tau passes."""
    failures: list[dict] = []
    tried = flipped = 0
    for name, g, g1, g2, c in flip_skewer_instances(seed):
        tried += 1
        if not (flips(g, g1, c, partial="skip") and flips(g, g2, c.flipped(), partial="skip")):
            continue
        flipped += 1
        w = g2.compose(g1)
        inside = contained(w, c.pole | c.plus, c.plus, None, "skip").holds
        try:
            cert = flip_then_skewer(g, g1, g2, c, k, partial="skip")
            growth = all(d >= c.E * (i + 1) for i, d in enumerate(cert.displacements, start=1))
            ok = inside and cert.chain_verified and growth
            detail = {"displacements": cert.displacements}
        except CurtainLabError as exc:
            ok, detail = False, {"error": str(exc)}
        if not ok:
            failures.append({"instance": name, "interval": [c.start, c.stop], **detail})
    return _report("flip-skewer", failures, instances=tried, both_flips=flipped)

