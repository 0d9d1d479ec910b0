"""Command-line front end: build windows and systems, query them, run the recipe and the sweeps.

Every command prints (or writes with --out) a JSON document with sorted keys and
a ``manifest`` echoing the command, inputs, parameters and seed. Exit codes:
0 pass, 1 invariant failure, 2 input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, suites
from .contact import build_contact_graph, detect_product, wall_action
from .errors import CurtainLabError, InputError, ParseError
from .hhs import instantiate_degenerate, instantiate_tree_of_flats, verify_behrstock, verify_bgi
from .hyperbolic import HypGraph, curtain_report, estimate_E, flips, make_curtain, skewers
from .median import (MedianWindow, distance, gate_projection, hull, separating_walls, validate_median)
from .raag import (BallComplex, RaagPresentation, build_window, f2_times_z, free_abelian, free_group,
                   tree_of_flats)
from .recipe import RecipeBudget, certificate_consistent, recipe_rank_one, relation_search

DEFAULT_SEED = 0
PRESETS = {"free": free_group, "z2": free_abelian, "tof": tree_of_flats, "f2xz": f2_times_z}
QUERIES = ("dist", "walls", "hull", "gate", "contact", "curtain", "flips", "skewers", "product")
SUITES = ("median-oracle", "curtain-axioms", "chain-bound", "flip-skewer", "behrstock", "bgi",
          "recipe-roundtrip")
# validating medians is cubic; above this size build reports walls without the check
VALIDATE_LIMIT = 1500


# documents


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def read_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object at the top level", line=1, column=1)
    return doc


def doc_kind(doc: dict) -> str:
    if "kind" in doc:
        return doc["kind"]
    if "element_w" in doc:
        return "certificate"
    if "generators" in doc:
        return "presentation"
    if "vertices" in doc and "edges" in doc:
        return "median"
    raise ParseError("unrecognised document: expected a presentation, graph, window, system or certificate")


def is_tree_of_flats(p: RaagPresentation) -> bool:
    return p.to_dict() == tree_of_flats().to_dict()


def load_space(doc: dict, cap: int | None = None) -> MedianWindow | BallComplex:
    kind = doc_kind(doc)
    if kind in ("ball", "system"):
        p = RaagPresentation.from_dict(doc["presentation"])
        return build_window(p, int(doc["horizon"]), cap=cap, guard=doc.get("guard"))
    if kind == "median":
        return MedianWindow.from_dict(doc)
    raise InputError(f"a {kind} document has no graph to query")


def load_system(doc: dict, cap: int | None = None, seed: int = DEFAULT_SEED):
    kind = doc_kind(doc)
    if kind not in ("ball", "system"):
        raise InputError(f"a projection system needs a window or system document, not {kind}")
    p = RaagPresentation.from_dict(doc["presentation"])
    horizon = int(doc["horizon"])
    if is_tree_of_flats(p):
        return instantiate_tree_of_flats(horizon, cap=cap, seed=seed)
    return instantiate_degenerate(p, horizon, cap=cap, seed=seed)


def window_of(space) -> MedianWindow:
    return space.window if isinstance(space, BallComplex) else space


def vertex(space, text: str) -> int:
    """Vertex id from a label; window labels go through the word parser."""
    if isinstance(space, BallComplex):
        return space.vertex_of(text)
    try:
        return space.vid(text)
    except KeyError:
        raise InputError(f"unknown vertex {text!r}") from None


def contact_node(space, cg, text: str) -> int:
    """Contact-graph node from ``"[u, v]"`` or ``"u|v"`` naming any edge of the wall."""
    inner = text.strip()
    if inner.startswith("[") and inner.endswith("]"):
        parts = inner[1:-1].split(", ")
    else:
        parts = inner.split("|")
    if len(parts) != 2:
        raise InputError(f"a wall is named by one of its edges, as '[u, v]' or 'u|v'; got {text!r}")
    u, v = (vertex(space, s.strip()) for s in parts)
    try:
        return window_of(space).wall_of_edge(u, v).index
    except KeyError:
        raise InputError(f"{text!r} is not an edge") from None


# host hyperbolic graphs for curtain queries


def curtain_host(space, E: int | None, seed: int):
    """Median documents host curtains on the graph itself; windows on their contact graph."""
    if isinstance(space, BallComplex):
        cg = build_contact_graph(space, E=E, seed=seed)
        return cg.space, (lambda text: contact_node(space, cg, text))
    g = space.graph
    host = HypGraph(g, estimate_E(g, seed=seed) if E is None else E, list(space.labels))
    return host, (lambda text: vertex(space, text))


def load_curtain(host: HypGraph, resolve, doc: dict):
    try:
        axis = [resolve(lab) for lab in doc["axis"]]
        return make_curtain(host, axis, int(doc["start"]), int(doc["E"]))
    except KeyError as exc:
        raise ParseError(f"curtain document lacks {exc}") from None


# commands


def manifest(args, inputs: list[str], parameters: dict) -> dict:
    return {"command": args.command, "inputs": inputs, "parameters": parameters,
            "seed": getattr(args, "seed", DEFAULT_SEED), "outputs": [args.out] if getattr(args, "out", None) else []}


def cmd_build(args) -> tuple[dict, int]:
    params = {"horizon": args.horizon, "guard": args.guard, "budget": args.budget}
    if args.graph:
        doc = read_json(args.graph)
        g = MedianWindow.from_dict(doc)
        checked = g.n <= VALIDATE_LIMIT
        if checked and not validate_median(g):
            raise InputError(f"{args.graph} is not a median graph")
        out = {"kind": "median", **g.to_dict(),
               "summary": {"vertices": g.n, "walls": len(g.walls), "dimension": g.dimension,
                           "guard": g.guard, "median_checked": checked}}
        out["manifest"] = manifest(args, [args.graph], params)
        return out, 0
    if args.raag:
        p = RaagPresentation.from_dict(read_json(args.raag))
        inputs = [args.raag]
    else:
        p = PRESETS[args.preset]()
        inputs = []
        params["preset"] = args.preset
    b = build_window(p, args.horizon, cap=args.budget, guard=args.guard)
    out = {"kind": "ball", "presentation": p.to_dict(), "horizon": b.horizon, "guard": b.guard,
           "summary": {"vertices": b.window.n, "walls": len(b.window.walls), "guard": b.guard,
                       "horizon": b.horizon}}
    if args.system_out:
        _, s = (instantiate_tree_of_flats(args.horizon, cap=args.budget, seed=args.seed)
                if is_tree_of_flats(p) else
                instantiate_degenerate(p, args.horizon, cap=args.budget, seed=args.seed))
        sys_doc = {"kind": "system", **s.to_dict()}
        sys_doc["manifest"] = manifest(args, inputs, params)
        Path(args.system_out).write_text(dumps(sys_doc), encoding="utf-8")
        out["summary"]["domains"] = len(s.domains)
        out["summary"]["constants"] = s.constants.to_dict()
    out["manifest"] = manifest(args, inputs, params)
    if args.system_out:
        out["manifest"]["outputs"].append(args.system_out)
    return out, 0


def cmd_query(args) -> tuple[dict | str, int]:
    doc = read_json(args.complex)
    space = load_space(doc, cap=args.budget)
    win = window_of(space)
    q, rest = args.query, args.args
    params = {"query": q, "args": rest}
    inputs = [args.complex]
    result: dict
    if q == "dist":
        _need(rest, 2, "dist needs two vertices")
        result = {"distance": distance(win, vertex(space, rest[0]), vertex(space, rest[1]))}
    elif q == "walls":
        if rest:
            _need(rest, 2, "walls takes no vertices or two vertices")
            ws = separating_walls(win, vertex(space, rest[0]), vertex(space, rest[1]))
            result = {"separating": [w.to_dict() for w in ws], "count": len(ws)}
        else:
            result = {"count": len(win.walls)}
            if not win.is_window:
                result["walls"] = [w.to_dict() for w in win.walls]
    elif q == "hull":
        _need(rest, 1, "hull needs at least one vertex", exact=False)
        H = hull(win, [vertex(space, v) for v in rest])
        result = {"members": sorted(win.labels[v] for v in H.members), "size": len(H.members),
                  "rounds": H.witness["rounds"]}
    elif q == "gate":
        _need(rest, 2, "gate needs a vertex and at least one set vertex", exact=False)
        x = vertex(space, rest[0])
        H = hull(win, [vertex(space, v) for v in rest[1:]])
        p = gate_projection(win, H, x)
        result = {"gate": win.labels[p], "hull_size": len(H.members),
                  "distance": distance(win, x, p)}
    elif q == "contact":
        cg = build_contact_graph(space, E=args.E, seed=args.seed)
        if args.format == "edges":
            return cg.edge_list(), 0
        if args.format == "dot":
            return cg.to_dot(), 0
        result = cg.to_dict()
    elif q == "curtain":
        if not (args.from_ and args.to):
            raise InputError("curtain needs --from and --to naming the ends of its axis")
        host, resolve = curtain_host(space, args.E, args.seed)
        alpha = host.graph.shortest_path(resolve(args.from_), resolve(args.to))
        c = make_curtain(host, alpha, args.offset)
        rep = curtain_report(host, c)
        result = {"curtain": c.to_dict(host.label, full=not isinstance(space, BallComplex)),
                  "report": rep}
        params.update({"from": args.from_, "to": args.to, "offset": args.offset})
        ok = all(rep[k] for k in ("partition", "disjoint_halves", "path_crossing", "separated"))
        return _finish(result, manifest(args, inputs, params)), 0 if ok else 1
    elif q in ("flips", "skewers"):
        if not isinstance(space, BallComplex):
            raise InputError(f"{q} needs a group window: elements act on its contact graph")
        if not (args.element and args.curtain):
            raise InputError(f"{q} needs --element and --curtain")
        cdoc = read_json(args.curtain)
        cdoc = cdoc.get("curtain", cdoc)
        host, resolve = curtain_host(space, int(cdoc["E"]), args.seed)
        c = load_curtain(host, resolve, cdoc)
        g = space.presentation.element(args.element)
        act = wall_action(space, g)
        inputs.append(args.curtain)
        params.update({"element": g.render(), "m_max": args.m_max})
        if q == "flips":
            result = {"flips_plus_side": flips(host, act, c, partial="skip"),
                      "flips_minus_side": flips(host, act, c.flipped(), partial="skip")}
        else:
            result = {"power": skewers(host, act, c, args.m_max, partial="skip")}
        result["element"] = g.render()
    else:
        w = detect_product(space)
        name = lambda i: _wall_name(win, i)
        result = {"product": None if w is None else w.to_dict(name)}
    return _finish(result, manifest(args, inputs, params)), 0


def _wall_name(win: MedianWindow, i: int) -> str:
    u, v = win.walls[i].edge_class[0]
    return f"[{win.labels[u]}, {win.labels[v]}]"


def _need(rest, k: int, message: str, exact: bool = True) -> None:
    if len(rest) < k or (exact and len(rest) != k):
        raise InputError(message)


def _finish(result: dict, man: dict) -> dict:
    return {**result, "manifest": man}


def cmd_verify(args) -> tuple[dict, int]:
    suite = args.suite
    params = {"suite": suite}
    inputs = [args.target] if args.target else []
    if suite == "median-oracle":
        if args.target:
            g = load_space(read_json(args.target))
            if isinstance(g, BallComplex):
                raise InputError("median-oracle needs a full median graph, not a window")
            report = suites.check_median_graph(g, seed=args.seed, where={"input": args.target})
        else:
            report = suites.median_oracle(args.random or 50, args.max_vertices, args.seed)
            params.update({"random": args.random or 50, "max_vertices": args.max_vertices})
    elif suite in ("curtain-axioms", "chain-bound"):
        hosts = None
        if args.target:
            space = load_space(read_json(args.target), cap=args.budget)
            host, _ = curtain_host(space, args.E, args.seed)
            hosts = [(args.target, host)]
        if suite == "curtain-axioms":
            report = suites.curtain_axioms(args.random or 200, args.seed, hosts)
            params["random"] = args.random or 200
        else:
            report = suites.chain_bound(args.random or 20, args.seed, hosts)
            params["random"] = args.random or 20
    elif suite == "flip-skewer":
        report = suites.flip_skewer_soundness(args.seed)
    elif suite in ("behrstock", "bgi"):
        if not args.target:
            raise InputError(f"{suite} needs a window or system document")
        doc = read_json(args.target)
        _, s = load_system(doc, cap=args.budget, seed=args.seed)
        lam = args.lam
        if lam is None and doc_kind(doc) == "system":
            lam = int(doc["constants"]["lambda"])
        lam = s.constants.lam if lam is None else lam
        bad = verify_behrstock(s, lam=lam) if suite == "behrstock" else verify_bgi(s, lam=lam, seed=args.seed)
        report = {"suite": suite, "passed": not bad, "lam": lam, "violations": bad[:20],
                  "failure_count": len(bad), "domains": len(s.domains)}
        params["lam"] = lam
    else:
        if not args.target:
            raise InputError("recipe-roundtrip needs a certificate document")
        doc = read_json(args.target)
        doc = doc.get("certificate") or doc
        if doc_kind(doc) != "certificate":
            raise InputError(f"{args.target} holds no certificate")
        same, fresh = certificate_consistent(doc, cap=args.budget)
        report = {"suite": suite, "passed": same, "recomputed": fresh,
                  "stored": doc.get("checks", {}), "input": args.target}
    report["manifest"] = manifest(args, inputs, params)
    return report, 0 if report["passed"] else 1


def cmd_recipe(args) -> tuple[dict, int]:
    doc = read_json(args.complex)
    b, s = load_system(doc, cap=args.budget, seed=args.seed)
    T = args.T.split(",") if args.T else list(b.presentation.generators)
    budget = RecipeBudget(m_max=args.m_max, skew_max=args.skew_max)
    outcome = recipe_rank_one(b, s, T, budget)
    cert = outcome.certificate
    out = {"certificate": None if cert is None else cert.to_dict(),
           "product": None if outcome.product is None else outcome.product.to_dict(
               lambda i: _wall_name(b.window, i)),
           "log": outcome.log}
    if cert is not None:
        out["transcript"] = cert.transcript()
    out["manifest"] = manifest(args, [args.complex], {"T": T, **budget.to_dict()})
    if cert is None:
        code = 0 if outcome.product is not None else 1
    else:
        code = 0 if cert.complete else 1
    return out, code


def cmd_relations(args) -> tuple[dict, int]:
    if args.preset:
        p = PRESETS[args.preset]()
    else:
        p = RaagPresentation.from_dict(read_json(args.presentation))
    found = relation_search(p, args.g1, args.g2, args.length, max_exponent=args.max_exponent)
    out = {"g1": p.element(args.g1).render(), "g2": p.element(args.g2).render(),
           "relator": found, "syllables": args.length, "max_exponent": args.max_exponent}
    out["manifest"] = manifest(args, [args.presentation] if args.presentation else [],
                               {"length": args.length, "max_exponent": args.max_exponent})
    return out, 0


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curtainlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for sampled estimates")
        p.add_argument("--budget", type=int, default=None,
                       help="vertex cap for window enumeration (env CURTAINLAB_BUDGET otherwise)")
        if out:
            p.add_argument("--out", help="write the result document here instead of stdout")

    b = sub.add_parser("build", help="build a median window or group window")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--raag", help="presentation file: generators and commuting pairs")
    src.add_argument("--graph", help="explicit graph file: vertices and edges")
    src.add_argument("--preset", choices=sorted(PRESETS))
    b.add_argument("--horizon", type=int, default=6)
    b.add_argument("--guard", type=int, default=None, help="exactness radius (default horizon // 3)")
    b.add_argument("--system-out", help="also build the projection system and write it here")
    common(b)

    q = sub.add_parser("query", help="run one query against a built document")
    q.add_argument("complex", help="median or window document")
    q.add_argument("query", choices=QUERIES)
    q.add_argument("args", nargs="*", help="vertex labels for dist, walls, hull, gate")
    q.add_argument("--element", help="group element, e.g. 'x^3 z x^3 z^-1'")
    q.add_argument("--curtain", help="curtain document from a curtain query")
    q.add_argument("--from", dest="from_", help="axis start (vertex, or '[u, v]' wall for windows)")
    q.add_argument("--to", help="axis end")
    q.add_argument("--offset", type=int, default=1, help="first axis index of the curtain's interval")
    q.add_argument("--E", type=int, default=None, help="hyperbolicity constant (estimated if omitted)")
    q.add_argument("--m-max", type=int, default=16)
    q.add_argument("--format", choices=("json", "edges", "dot"), default="json")
    common(q)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("target", nargs="?", help="document to verify (suite dependent)")
    v.add_argument("--random", type=int, default=None, help="number of random instances")
    v.add_argument("--max-vertices", type=int, default=200)
    v.add_argument("--lam", type=int, default=None, help="override the frozen λ")
    v.add_argument("--E", type=int, default=None)
    common(v)
    v.set_defaults(seed=7)

    r = sub.add_parser("recipe", help="search for a rank-one element and certify it")
    r.add_argument("complex", help="window or system document")
    r.add_argument("--T", help="comma-separated generating words (default: all generators)")
    r.add_argument("--m-max", type=int, default=32)
    r.add_argument("--skew-max", type=int, default=16)
    common(r)

    rel = sub.add_parser("relations", help="bounded search for relations between two elements")
    grp = rel.add_mutually_exclusive_group(required=True)
    grp.add_argument("--presentation")
    grp.add_argument("--preset", choices=sorted(PRESETS))
    rel.add_argument("g1")
    rel.add_argument("g2")
    rel.add_argument("--length", type=int, default=4, help="maximum number of syllables")
    rel.add_argument("--max-exponent", type=int, default=3)
    common(rel)
    return ap


COMMANDS = {"build": cmd_build, "query": cmd_query, "verify": cmd_verify, "recipe": cmd_recipe,
            "relations": cmd_relations}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result, code = COMMANDS[args.command](args)
    except CurtainLabError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("vertex", "line", "column"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        sys.stderr.write(dumps(err))
        return exc.exit_code
    text = result if isinstance(result, str) else dumps(result)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
        if isinstance(result, dict):
            summary = result.get("summary") or {k: result[k] for k in ("passed", "failure_count")
                                                 if k in result}
            if "transcript" in result:
                sys.stdout.write(result["transcript"])
            elif summary:
                sys.stdout.write(dumps(summary))
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
