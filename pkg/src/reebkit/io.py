"""Stable file formats and random-instance generation.

Graphs and traces travel as versioned JSON documents.  Levels are stored
as exact integer fractions (``{"num": ..., "den": ...}``) so a document
replays bit-for-bit; floats never appear.  DOT emission is one-way and
meant for human eyes only.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .errors import Disconnected, Infeasible, SchemaError
from .graph import (
    ReebGraph,
    classify,
    initial_graph,
    fresh_ids,
    require_good_orientation,
    synthesize_levels,
)
from .moves import (
    FORWARD,
    MOVE_KINDS,
    REVERSE,
    MoveInstance,
    Trace,
    apply_move,
    match_sites,
)
from .planner import ExtraOp, Plan

__all__ = [
    "FORMAT_VERSION",
    "emit_dot",
    "emit_graph",
    "emit_plan",
    "emit_trace",
    "gen_random",
    "graph_to_doc",
    "graph_from_doc",
    "parse_graph",
    "parse_plan",
    "parse_trace",
    "plan_to_doc",
    "plan_from_doc",
    "trace_to_doc",
    "trace_from_doc",
]

FORMAT_VERSION = "1"


# -- plumbing -----------------------------------------------------------------


def _load(data: bytes | str | Mapping[str, Any], what: str) -> Mapping[str, Any]:
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{what}: not JSON (line {exc.lineno}: {exc.msg})")
    if not isinstance(data, Mapping):
        raise SchemaError(f"{what}: expected a JSON object")
    return data


def _field(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _check_version(obj: Mapping[str, Any], what: str) -> None:
    version = _field(obj, "version", what)
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"{what}: unsupported version {version!r} (this build reads "
            f"{FORMAT_VERSION!r})")


def _str_field(obj: Mapping[str, Any], key: str, where: str) -> str:
    value = _field(obj, key, where)
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{where}.{key}: expected a nonempty string")
    return value


def _dump(doc: dict[str, Any]) -> bytes:
    return (json.dumps(doc, indent=2) + "\n").encode()


# -- graphs -------------------------------------------------------------------


def graph_from_doc(doc: bytes | str | Mapping[str, Any]) -> ReebGraph:
    obj = _load(doc, "graph document")
    _check_version(obj, "graph document")
    raw_vs = _field(obj, "vertices", "graph document")
    raw_es = _field(obj, "edges", "graph document")
    if not isinstance(raw_vs, list) or not isinstance(raw_es, list):
        raise SchemaError("graph document: vertices and edges must be lists")

    vertices: list[str] = []
    levels: dict[str, Fraction] = {}
    markers: list[str] = []
    for i, rv in enumerate(raw_vs):
        where = f"vertices[{i}]"
        if not isinstance(rv, Mapping):
            raise SchemaError(f"{where}: expected an object")
        vid = _str_field(rv, "id", where)
        vertices.append(vid)
        if "level" in rv:
            lv = rv["level"]
            if (not isinstance(lv, Mapping) or not isinstance(lv.get("num"), int)
                    or not isinstance(lv.get("den"), int) or lv["den"] <= 0
                    or isinstance(lv["num"], bool) or isinstance(lv["den"], bool)):
                raise SchemaError(
                    f"{where}.level: expected {{num, den}} with integer "
                    "numerator and positive integer denominator")
            levels[vid] = Fraction(lv["num"], lv["den"])
        if rv.get("marker", False) is True:
            markers.append(vid)
        elif rv.get("marker", False) is not False:
            raise SchemaError(f"{where}.marker: expected a boolean")

    if levels and len(levels) != len(vertices):
        raise SchemaError(
            "graph document: levels must cover all vertices or none")

    edges: list[tuple[str, str, str]] = []
    for i, re_ in enumerate(raw_es):
        where = f"edges[{i}]"
        if not isinstance(re_, Mapping):
            raise SchemaError(f"{where}: expected an object")
        edges.append((_str_field(re_, "id", where),
                      _str_field(re_, "src", where),
                      _str_field(re_, "dst", where)))

    try:
        return ReebGraph.build(vertices, edges,
                               levels=levels or None, markers=markers)
    except (ValueError, Disconnected) as exc:  # duplicate ids, bad levels...
        raise SchemaError(f"graph document: {exc}")


def graph_to_doc(g: ReebGraph) -> dict[str, Any]:
    vs: list[dict[str, Any]] = []
    for v in g.vertices:
        rv: dict[str, Any] = {"id": v}
        lvl = g.level(v)
        if lvl is not None:
            rv["level"] = {"num": lvl.numerator, "den": lvl.denominator}
        if v in g.markers:
            rv["marker"] = True
        vs.append(rv)
    es = [{"id": e.id, "src": e.src, "dst": e.dst} for e in g.edges]
    return {"version": FORMAT_VERSION, "vertices": vs, "edges": es}


def parse_graph(data: bytes | str | Mapping[str, Any]) -> ReebGraph:
    """Read a graph document (JSON text, bytes, or a decoded object)."""
    return graph_from_doc(data)


def emit_graph(g: ReebGraph) -> bytes:
    return _dump(graph_to_doc(g))


# -- traces -------------------------------------------------------------------


def trace_from_doc(doc: bytes | str | Mapping[str, Any]) -> Trace:
    obj = _load(doc, "trace document")
    _check_version(obj, "trace document")
    raw = _field(obj, "steps", "trace document")
    if not isinstance(raw, list):
        raise SchemaError("trace document: steps must be a list")
    steps: list[MoveInstance] = []
    for i, rs in enumerate(raw):
        where = f"steps[{i}]"
        if not isinstance(rs, Mapping):
            raise SchemaError(f"{where}: expected an object")
        kind = _str_field(rs, "kind", where)
        if kind not in MOVE_KINDS:
            raise SchemaError(f"{where}.kind: unknown move kind {kind!r}")
        direction = _str_field(rs, "direction", where)
        if direction not in (FORWARD, REVERSE):
            raise SchemaError(f"{where}.direction: expected forward or reverse")
        site = _field(rs, "site", where)
        if (not isinstance(site, Mapping)
                or not all(isinstance(k, str) and isinstance(v, str)
                           for k, v in site.items())):
            raise SchemaError(f"{where}.site: expected an object of role: id")
        sigma = rs.get("sigma")
        if sigma is not None:
            if (not isinstance(sigma, list) or len(sigma) != 3
                    or not all(isinstance(x, int) and not isinstance(x, bool)
                               for x in sigma)):
                raise SchemaError(f"{where}.sigma: expected three integers")
            sigma = tuple(sigma)
        planner_ctx = rs.get("planner_ctx", False)
        if not isinstance(planner_ctx, bool):
            raise SchemaError(f"{where}.planner_ctx: expected a boolean")
        fresh = rs.get("fresh", {})
        if (not isinstance(fresh, Mapping)
                or not all(isinstance(k, str) and isinstance(v, str)
                           for k, v in fresh.items())):
            raise SchemaError(f"{where}.fresh: expected an object of role: id")
        steps.append(MoveInstance.make(
            kind, direction, sigma=sigma, planner_ctx=planner_ctx,
            fresh=dict(fresh), **dict(site)))
    return tuple(steps)


def trace_to_doc(steps: Iterable[MoveInstance]) -> dict[str, Any]:
    out: list[dict[str, Any]] = []
    for m in steps:
        rs: dict[str, Any] = {
            "kind": m.kind,
            "direction": m.direction,
            "site": dict(m.site),
        }
        if m.sigma is not None:
            rs["sigma"] = list(m.sigma)
        if m.planner_ctx:
            rs["planner_ctx"] = True
        if m.fresh:
            rs["fresh"] = dict(m.fresh)
        out.append(rs)
    return {"version": FORMAT_VERSION, "steps": out}


def parse_trace(data: bytes | str | Mapping[str, Any]) -> Trace:
    return trace_from_doc(data)


def emit_trace(steps: Iterable[MoveInstance]) -> bytes:
    return _dump(trace_to_doc(steps))


# -- plans --------------------------------------------------------------------


def plan_from_doc(doc: bytes | str | Mapping[str, Any]) -> Plan:
    obj = _load(doc, "plan document")
    _check_version(obj, "plan document")
    start = graph_from_doc(_load(_field(obj, "start", "plan document"),
                                 "plan document.start"))
    target = graph_from_doc(_load(_field(obj, "target", "plan document"),
                                  "plan document.target"))
    steps = trace_from_doc({"version": FORMAT_VERSION,
                            "steps": _field(obj, "steps", "plan document")})
    raw_ops = _field(obj, "extra_ops", "plan document")
    if not isinstance(raw_ops, list):
        raise SchemaError("plan document: extra_ops must be a list")
    ops: list[ExtraOp] = []
    for i, ro in enumerate(raw_ops):
        where = f"extra_ops[{i}]"
        if not isinstance(ro, Mapping):
            raise SchemaError(f"{where}: expected an object")
        kind = _str_field(ro, "kind", where)
        at = _field(ro, "at", where)
        if not isinstance(at, int) or isinstance(at, bool) or at < 0:
            raise SchemaError(f"{where}.at: expected a nonnegative integer")
        payload = _field(ro, "payload", where)
        if not isinstance(payload, Mapping):
            raise SchemaError(f"{where}.payload: expected an object")
        ops.append(ExtraOp(kind=kind, at=at, payload=dict(payload)))
    return Plan(start=start, steps=steps, extra_ops=tuple(ops), target=target)


def plan_to_doc(plan: Plan) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "start": graph_to_doc(plan.start),
        "steps": trace_to_doc(plan.steps)["steps"],
        "extra_ops": [{"kind": op.kind, "at": op.at, "payload": op.payload}
                      for op in plan.extra_ops],
        "target": graph_to_doc(plan.target),
    }


def parse_plan(data: bytes | str | Mapping[str, Any]) -> Plan:
    return plan_from_doc(data)


def emit_plan(plan: Plan) -> bytes:
    return _dump(plan_to_doc(plan))


# -- DOT ----------------------------------------------------------------------


def emit_dot(g: ReebGraph) -> bytes:
    """Render a good orientation as a bottom-to-top DOT digraph.

    Vertices at equal level share a rank; labels carry the vertex class;
    marker vertices are double-circled.  Presentation only: there is no
    DOT parser on the way back in.
    """
    require_good_orientation(g)
    leveled = g if g.levels is not None else synthesize_levels(g)
    lines = [
        "digraph reeb {",
        "  rankdir=BT;",
        '  node [shape=circle, fontsize=10];',
    ]
    for v in g.vertices:
        cls = classify(g, v).name
        shape = ', peripheries=2' if v in g.markers else ""
        lines.append(f'  "{v}" [label="{v}\\n{cls}"{shape}];')
    by_level: dict[Fraction, list[str]] = {}
    for v in g.vertices:
        by_level.setdefault(leveled.level(v), []).append(v)
    for lvl in sorted(by_level):
        names = "; ".join(f'"{v}"' for v in sorted(by_level[lvl]))
        lines.append(f"  {{ rank=same; {names}; }}")
    for e in g.edges:
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{e.id}"];')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()


# -- random instances ---------------------------------------------------------

# Kinds the generator may scramble with. All are applied in their legal
# (forward) direction and none of them changes the cycle count.
_CHURN_KINDS = ("M1", "M2", "M2p", "M3", "M3p", "M4", "M5", "M6")


def gen_random(seed: int, n_vertices: int, target_betti: int) -> ReebGraph:
    """A seeded pseudo-random good orientation with the requested size
    and cycle count.

    Grows the initial-form graph with the two expansions that insert an
    extremum-plus-fork pair (subdividing one edge when the parity calls
    for it), then shuffles the result with a burst of legal moves.  The
    cycle count is preserved by construction at every step, so the output
    never needs a posteriori correction.
    """
    if target_betti < 0:
        raise Infeasible("the cycle count cannot be negative")
    floor = 2 if target_betti == 0 else 2 * target_betti + 2
    if n_vertices < floor:
        raise Infeasible(
            f"{target_betti} cycles on degree-3 vertices needs at least "
            f"{floor} vertices, got {n_vertices}")

    rng = random.Random(seed)
    g = initial_graph(target_betti)

    while g.n_vertices + 2 <= n_vertices:
        kind = rng.choice(("M8", "M9"))
        sites = match_sites(g, kind, REVERSE)
        g = apply_move(g, rng.choice(sites))
    if g.n_vertices < n_vertices:
        e = rng.choice(g.edges)
        mid, tail = fresh_ids(g, 2)
        g = g.modified(add_vertices=[mid],
                       reattach={e.id: (e.src, mid)},
                       add_edges=[(tail, mid, e.dst)])

    for _ in range(3 * n_vertices):
        sites = match_sites(g, rng.choice(_CHURN_KINDS), FORWARD)
        if sites:
            g = apply_move(g, rng.choice(sites))
    return g
