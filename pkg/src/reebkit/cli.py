"""Command-line surface.

Every subcommand prints exactly one JSON object on stdout and exits 0 on
success, 1 when a domain contract fails (bad orientation, impossible
target, failed verification), and 2 on malformed input.  Errors go to
stderr, also as JSON, so pipelines stay parseable.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from typing import Any

from . import io as rio
from .errors import InputError, ReebError
from .graph import (
    ReebGraph,
    betti,
    classify,
    is_good_orientation,
    iso_oriented,
    require_good_orientation,
    smooth,
)
from .manifolds import reeb_number
from .reduction import canonicalize, drop_cycles, primitivize, to_one_min_max

__all__ = ["main"]


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _read_graph(path: str) -> ReebGraph:
    return rio.parse_graph(_read_bytes(path))


def _write_bytes(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


# -- subcommand bodies (each returns the JSON-ready result object) ------------


def _cmd_validate(args: argparse.Namespace) -> dict[str, Any]:
    g = _read_graph(args.graph)
    out: dict[str, Any] = {
        "n_vertices": g.n_vertices,
        "n_edges": g.n_edges,
        "good_orientation": is_good_orientation(g),
    }
    if out["good_orientation"]:
        out["betti"] = betti(g)
    else:
        try:
            require_good_orientation(g)
        except ReebError as exc:
            out["reason"] = str(exc)
    return out


def _cmd_betti(args: argparse.Namespace) -> dict[str, Any]:
    return {"betti": betti(_read_graph(args.graph))}


def _cmd_classify(args: argparse.Namespace) -> dict[str, Any]:
    g = _read_graph(args.graph)
    classes = {v: classify(g, v).name for v in g.vertices}
    return {"classes": classes, "counts": dict(Counter(classes.values()))}


def _reduction_result(args: argparse.Namespace, res) -> dict[str, Any]:
    out: dict[str, Any] = {
        "graph": rio.graph_to_doc(res.graph),
        "steps": len(res.steps),
    }
    if getattr(args, "out_trace", None):
        _write_bytes(args.out_trace, rio.emit_trace(res.steps))
    else:
        out["trace"] = rio.trace_to_doc(res.steps)
    return out


def _cmd_canonicalize(args: argparse.Namespace) -> dict[str, Any]:
    return _reduction_result(args, canonicalize(_read_graph(args.graph)))


def _cmd_primitivize(args: argparse.Namespace) -> dict[str, Any]:
    return _reduction_result(args, primitivize(_read_graph(args.graph)))


def _cmd_one_min_max(args: argparse.Namespace) -> dict[str, Any]:
    return _reduction_result(args, to_one_min_max(_read_graph(args.graph)))


def _cmd_drop_cycles(args: argparse.Namespace) -> dict[str, Any]:
    g = _read_graph(args.graph)
    return _reduction_result(args, drop_cycles(g, args.k))


def _cmd_smooth(args: argparse.Namespace) -> dict[str, Any]:
    return rio.graph_to_doc(smooth(_read_graph(args.graph)))


def _cmd_iso(args: argparse.Namespace) -> dict[str, Any]:
    mapping = iso_oriented(_read_graph(args.g1), _read_graph(args.g2))
    return {"isomorphic": mapping is not None, "mapping": mapping}


def _cmd_dot(args: argparse.Namespace) -> dict[str, Any]:
    return {"dot": rio.emit_dot(_read_graph(args.graph)).decode()}


def _cmd_reeb_number(args: argparse.Namespace) -> dict[str, Any]:
    res = reeb_number(args.expr,
                      normalize_surfaces=not args.no_normalize_surfaces)
    return {"value": res.value, "derivation": list(res.derivation)}


def _cmd_gen_random(args: argparse.Namespace) -> dict[str, Any]:
    g = rio.gen_random(args.seed, args.vertices, args.betti)
    return rio.graph_to_doc(g)


def _cmd_plan(args: argparse.Namespace) -> dict[str, Any]:
    from .planner import realize

    target = _read_graph(args.target)
    if args.budget is not None:
        budget = args.budget
    else:
        budget = reeb_number(args.manifold).value
    plan = realize(target, budget)
    doc = rio.plan_to_doc(plan)
    if args.out_plan:
        _write_bytes(args.out_plan, rio.emit_plan(plan))
        return {"ok": True, "budget": budget, "steps": len(plan.steps),
                "extra_ops": len(plan.extra_ops), "plan_file": args.out_plan}
    return doc


def _cmd_verify_plan(args: argparse.Namespace) -> dict[str, Any]:
    from .planner import check_plan

    plan = rio.parse_plan(_read_bytes(args.plan))
    reason = check_plan(plan)
    if reason is not None:
        raise ReebError(f"plan verification failed: {reason}")
    return {"ok": True}


# -- wiring --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="reebkit",
        description="Good orientations, elementary moves, reductions, "
                    "realization plans, and Reeb numbers.")
    sub = top.add_subparsers(dest="command", required=True)

    def graph_cmd(name: str, fn, help_: str, trace_out: bool = False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("graph", help="graph document path, or - for stdin")
        if trace_out:
            p.add_argument("-o", "--out-trace", metavar="FILE",
                           help="write the move trace here instead of stdout")
        p.set_defaults(fn=fn)
        return p

    graph_cmd("validate", _cmd_validate, "check the good-orientation contract")
    graph_cmd("betti", _cmd_betti, "first Betti number")
    graph_cmd("classify", _cmd_classify, "class of every vertex")
    graph_cmd("canonicalize", _cmd_canonicalize,
              "reduce to the chain-of-cycles normal form", trace_out=True)
    graph_cmd("primitivize", _cmd_primitivize,
              "reorder forks so no splitting vertex sits above a merge",
              trace_out=True)
    graph_cmd("one-min-max", _cmd_one_min_max,
              "merge extrema down to a single minimum and maximum",
              trace_out=True)
    p = graph_cmd("drop-cycles", _cmd_drop_cycles,
                  "collapse cycles until the given count remains",
                  trace_out=True)
    p.add_argument("-k", type=int, required=True, metavar="COUNT",
                   help="cycle count to keep")
    graph_cmd("smooth", _cmd_smooth, "remove all degree-2 vertices")
    graph_cmd("dot", _cmd_dot, "DOT rendering (bottom to top)")

    p = sub.add_parser("iso", help="oriented isomorphism test")
    p.add_argument("g1")
    p.add_argument("g2")
    p.set_defaults(fn=_cmd_iso)

    p = sub.add_parser("reeb-number", help="Reeb number of a manifold expression")
    p.add_argument("expr", help='e.g. "N(2)" or "S1xS(3)#S1xS(3)"')
    p.add_argument("--no-normalize-surfaces", action="store_true",
                   help="refuse mixed-orientability surface sums")
    p.set_defaults(fn=_cmd_reeb_number)

    p = sub.add_parser("gen-random", help="seeded random good orientation")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--vertices", type=int, required=True)
    p.add_argument("--betti", type=int, required=True)
    p.set_defaults(fn=_cmd_gen_random)

    p = sub.add_parser("plan", help="realization plan for a target graph")
    p.add_argument("--target", required=True,
                   help="graph document path, or - for stdin")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--budget", type=int, help="cycle budget")
    group.add_argument("--manifold", help="budget from this expression's "
                                          "Reeb number")
    p.add_argument("-o", "--out-plan", metavar="FILE",
                   help="write the plan document here instead of stdout")
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("verify-plan", help="replay and check a plan document")
    p.add_argument("plan", help="plan document path, or - for stdin")
    p.set_defaults(fn=_cmd_verify_plan)

    return top


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        result = args.fn(args)
    except InputError as exc:
        _emit_error(exc)
        return 2
    except ReebError as exc:
        _emit_error(exc)
        return 1
    except OSError as exc:
        _emit_error(exc)
        return 2
    json.dump(result, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _emit_error(exc: Exception) -> None:
    json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
    sys.stderr.write("\n")


if __name__ == "__main__":
    sys.exit(main())
