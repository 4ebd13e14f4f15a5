"""The eleven elementary rewrites and their trace machinery.

Each move is a local surgery on a good orientation that corresponds to
pushing one critical value of a function past an adjacent one.  Edge ids
survive every move (moves reattach endpoints rather than replacing edges),
which is what makes traces replayable and invertible id-exactly.

Site conventions (role -> id), by kind:

* M1  forward: ``lower``/``upper`` adjacent regular vertices; they swap.
* M2  forward: UpFork ``fork`` descends past ``regular`` sitting on one of
  its in-strands (the regular ends up on the out-strand).
* M2p forward: ``regular`` on the out-strand of UpFork ``fork`` descends
  onto the in-strand named by ``land``.
* M3  forward: ``regular`` on an out-strand of DownFork ``fork`` descends
  onto its only in-strand.
* M3p forward: DownFork ``fork`` descends past ``regular`` on its
  in-strand; the regular lands on the out-strand named by ``land``.
* M4 (two-sided): stacked UpForks ``lower``/``upper`` swap heights.
  ``s1`` is the upper fork's exclusive in-strand, ``s2`` < ``s3`` are the
  lower fork's in-strands; ``sigma`` lists which of the three strands ends
  up as (new upper's exclusive, new lower's first, new lower's second).
* M5 (two-sided): mirror of M4 for stacked DownForks.  ``s1`` is the lower
  fork's exclusive out-strand, ``s2`` < ``s3`` the upper fork's
  out-strands; ``sigma`` gives (new lower's exclusive, new upper's two).
* M6  forward: DownFork ``down`` directly below UpFork ``up`` (one shared
  edge, no second parallel edge) slide past each other.
  reverse (planner context only): ``up`` below ``down``; ``drop_in`` names
  the in-strand that follows the DownFork down, ``keep_out`` the
  out-strand that stays with it.
* M7  forward: parallel pair ``down`` => ``up`` collapses to a strand;
  ``keep`` survives (flipped), ``drop`` is deleted.  No reverse.
* M8 (two-sided) forward: minimum ``min`` + UpFork ``fork`` cancel;
  ``context_in`` survives re-attached across the gap, ``stem`` and ``out``
  are deleted.  reverse: insert a fresh pair into ``edge``.
* M9 (two-sided): mirror for maximum + DownFork; ``context_out`` survives.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

from .errors import IllegalDirection, NotInvertible, SiteStale
from .graph import Edge, ReebGraph, degree_profile, fresh_ids, require_good_orientation

__all__ = [
    "FORWARD",
    "MOVE_KINDS",
    "MoveInstance",
    "REVERSE",
    "TWO_SIDED",
    "Trace",
    "apply_move",
    "invert",
    "match_sites",
    "replay",
]

MOVE_KINDS = ("M1", "M2", "M2p", "M3", "M3p", "M4", "M5", "M6", "M7", "M8", "M9")
TWO_SIDED = frozenset({"M4", "M5", "M8", "M9"})
FORWARD = "forward"
REVERSE = "reverse"

_DEBUG = os.environ.get("REEB_DEBUG", "") not in ("", "0")


@dataclass(frozen=True)
class MoveInstance:
    kind: str
    direction: str = FORWARD
    site: tuple[tuple[str, str], ...] = ()
    sigma: tuple[int, int, int] | None = None
    planner_ctx: bool = False
    fresh: tuple[tuple[str, str], ...] = ()

    @staticmethod
    def make(kind: str, direction: str = FORWARD, *, sigma=None, planner_ctx=False,
             fresh: dict[str, str] | None = None, **roles: str) -> "MoveInstance":
        return MoveInstance(
            kind=kind,
            direction=direction,
            site=tuple(sorted(roles.items())),
            sigma=tuple(sigma) if sigma is not None else None,
            planner_ctx=planner_ctx,
            fresh=tuple(sorted((fresh or {}).items())),
        )

    def at(self, role: str) -> str:
        for k, v in self.site:
            if k == role:
                return v
        raise KeyError(f"{self.kind} instance has no role {role!r}")

    def fresh_id(self, role: str) -> str:
        for k, v in self.fresh:
            if k == role:
                return v
        raise KeyError(f"{self.kind} instance has no fresh id {role!r}")

    def __repr__(self) -> str:  # compact, for failed-assertion readability
        roles = ", ".join(f"{k}={v}" for k, v in self.site)
        extra = f", sigma={list(self.sigma)}" if self.sigma else ""
        return f"<{self.kind} {self.direction} {roles}{extra}>"


Trace = tuple[MoveInstance, ...]


# -- small validation helpers ------------------------------------------------


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise SiteStale(msg)


def _need_profile(g: ReebGraph, v: str, prof: tuple[int, int], what: str) -> None:
    _need(g.has_vertex(v), f"{what} {v!r} is not a vertex")
    _need(degree_profile(g, v) == prof,
          f"{what} {v!r} has profile {degree_profile(g, v)}, expected {prof}")


def _need_edge(g: ReebGraph, eid: str, src: str | None = None,
               dst: str | None = None) -> Edge:
    _need(g.has_edge(eid), f"edge {eid!r} does not exist")
    e = g.edge(eid)
    if src is not None:
        _need(e.src == src, f"edge {eid!r} runs from {e.src!r}, expected {src!r}")
    if dst is not None:
        _need(e.dst == dst, f"edge {eid!r} ends at {e.dst!r}, expected {dst!r}")
    return e


def _the_edge_between(g: ReebGraph, a: str, b: str) -> Edge:
    found = [e for e in g.out_edges(a) if e.dst == b]
    _need(len(found) == 1, f"expected exactly one edge {a!r}->{b!r}, found {len(found)}")
    return found[0]


# -- per-kind application ----------------------------------------------------


def _apply_m1(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    lo, hi = m.at("lower"), m.at("upper")
    _need_profile(g, lo, (1, 1), "lower regular")
    _need_profile(g, hi, (1, 1), "upper regular")
    mid = _the_edge_between(g, lo, hi)
    e_in = g.in_edges(lo)[0]
    e_out = g.out_edges(hi)[0]
    return g.modified(reattach={
        e_in.id: (e_in.src, hi),
        mid.id: (hi, lo),
        e_out.id: (lo, e_out.dst),
    })


def _apply_m2(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    u, r = m.at("fork"), m.at("regular")
    _need_profile(g, u, (2, 1), "fork")
    _need_profile(g, r, (1, 1), "regular")
    mid = _the_edge_between(g, r, u)
    e_in = g.in_edges(r)[0]
    e_out = g.out_edges(u)[0]
    return g.modified(reattach={
        e_in.id: (e_in.src, u),
        mid.id: (u, r),
        e_out.id: (r, e_out.dst),
    })


def _apply_m2p(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    u, r, land = m.at("fork"), m.at("regular"), m.at("land")
    _need_profile(g, u, (2, 1), "fork")
    _need_profile(g, r, (1, 1), "regular")
    mid = _the_edge_between(g, u, r)
    e_land = _need_edge(g, land, dst=u)
    e_out = g.out_edges(r)[0]
    return g.modified(reattach={
        e_land.id: (e_land.src, r),
        mid.id: (r, u),
        e_out.id: (u, e_out.dst),
    })


def _apply_m3(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    d, r = m.at("fork"), m.at("regular")
    _need_profile(g, d, (1, 2), "fork")
    _need_profile(g, r, (1, 1), "regular")
    mid = _the_edge_between(g, d, r)
    e_in = g.in_edges(d)[0]
    e_out = g.out_edges(r)[0]
    return g.modified(reattach={
        e_in.id: (e_in.src, r),
        mid.id: (r, d),
        e_out.id: (d, e_out.dst),
    })


def _apply_m3p(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    d, r, land = m.at("fork"), m.at("regular"), m.at("land")
    _need_profile(g, d, (1, 2), "fork")
    _need_profile(g, r, (1, 1), "regular")
    mid = _the_edge_between(g, r, d)
    e_land = _need_edge(g, land, src=d)
    e_in = g.in_edges(r)[0]
    return g.modified(reattach={
        e_in.id: (e_in.src, d),
        mid.id: (d, r),
        e_land.id: (r, e_land.dst),
    })


def _strand_positions_m4(g: ReebGraph, lo: str, hi: str, mid: Edge) -> tuple[str, str, str]:
    upper_ins = [e for e in g.in_edges(hi) if e.id != mid.id]
    _need(len(upper_ins) == 1, f"upper fork {hi!r} shares more than one edge with {lo!r}")
    lower_ins = sorted(e.id for e in g.in_edges(lo))
    return (upper_ins[0].id, lower_ins[0], lower_ins[1])


def _apply_m4(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    lo, hi = m.at("lower"), m.at("upper")
    _need_profile(g, lo, (2, 1), "lower fork")
    _need_profile(g, hi, (2, 1), "upper fork")
    mid = _the_edge_between(g, lo, hi)
    s = _strand_positions_m4(g, lo, hi, mid)
    for i in (1, 2, 3):
        _need(m.at(f"s{i}") == s[i - 1],
              f"strand s{i} is {s[i - 1]!r} in the graph, instance says {m.at(f's{i}')!r}")
    _need(m.sigma is not None and sorted(m.sigma) == [1, 2, 3], "sigma must permute 1..3")
    assert m.sigma is not None
    e_up = g.out_edges(hi)[0]
    ex, l1, l2 = (s[i - 1] for i in m.sigma)
    return g.modified(reattach={
        e_up.id: (lo, e_up.dst),
        mid.id: (hi, lo),
        ex: (g.edge(ex).src, lo),
        l1: (g.edge(l1).src, hi),
        l2: (g.edge(l2).src, hi),
    })


def _strand_positions_m5(g: ReebGraph, lo: str, hi: str, mid: Edge) -> tuple[str, str, str]:
    lower_outs = [e for e in g.out_edges(lo) if e.id != mid.id]
    _need(len(lower_outs) == 1, f"lower fork {lo!r} shares more than one edge with {hi!r}")
    upper_outs = sorted(e.id for e in g.out_edges(hi))
    return (lower_outs[0].id, upper_outs[0], upper_outs[1])


def _apply_m5(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    lo, hi = m.at("lower"), m.at("upper")
    _need_profile(g, lo, (1, 2), "lower fork")
    _need_profile(g, hi, (1, 2), "upper fork")
    mid = _the_edge_between(g, lo, hi)
    s = _strand_positions_m5(g, lo, hi, mid)
    for i in (1, 2, 3):
        _need(m.at(f"s{i}") == s[i - 1],
              f"strand s{i} is {s[i - 1]!r} in the graph, instance says {m.at(f's{i}')!r}")
    _need(m.sigma is not None and sorted(m.sigma) == [1, 2, 3], "sigma must permute 1..3")
    assert m.sigma is not None
    e_in = g.in_edges(lo)[0]
    ex, u1, u2 = (s[i - 1] for i in m.sigma)
    return g.modified(reattach={
        e_in.id: (e_in.src, hi),
        mid.id: (hi, lo),
        ex: (hi, g.edge(ex).dst),
        u1: (lo, g.edge(u1).dst),
        u2: (lo, g.edge(u2).dst),
    })


def _independent_climb(g: ReebGraph, d: str, u: str, mid_id: str) -> bool:
    """True when some directed path d ~> u avoids the shared edge.  Sliding
    the forks past each other flips that edge, so any such path would close
    a cycle; the forks must be order-independent apart from the edge."""
    frontier = [e.dst for e in g.out_edges(d) if e.id != mid_id]
    seen = set(frontier)
    while frontier:
        v = frontier.pop()
        if v == u:
            return True
        for e in g.out_edges(v):
            if e.dst not in seen:
                seen.add(e.dst)
                frontier.append(e.dst)
    return False


def _apply_m6_forward(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    d, u = m.at("down"), m.at("up")
    _need_profile(g, d, (1, 2), "DownFork")
    _need_profile(g, u, (2, 1), "UpFork")
    mid = _the_edge_between(g, d, u)
    _need(not _independent_climb(g, d, u, mid.id),
          f"{d!r} reaches {u!r} around the shared edge; sliding would close a cycle")
    e_a = g.in_edges(d)[0]
    e_d = g.out_edges(u)[0]
    return g.modified(reattach={
        e_a.id: (e_a.src, u),
        mid.id: (u, d),
        e_d.id: (d, e_d.dst),
    })


def _apply_m6_reverse(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    if not m.planner_ctx:
        raise IllegalDirection(
            "M6 is one-sided; its reverse is only legal inside a planner trace "
            "destined for inversion"
        )
    u, d = m.at("up"), m.at("down")
    _need_profile(g, u, (2, 1), "UpFork")
    _need_profile(g, d, (1, 2), "DownFork")
    mid = _the_edge_between(g, u, d)
    drop_in = _need_edge(g, m.at("drop_in"), dst=u)
    keep_out = _need_edge(g, m.at("keep_out"), src=d)
    other_out = [e for e in g.out_edges(d) if e.id != keep_out.id]
    _need(len(other_out) == 1 and other_out[0].id != mid.id,
          "keep_out must name one of the DownFork's two out-strands")
    return g.modified(reattach={
        drop_in.id: (drop_in.src, d),
        mid.id: (d, u),
        other_out[0].id: (u, other_out[0].dst),
    })


def _apply_m7(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    d, u = m.at("down"), m.at("up")
    _need_profile(g, d, (1, 2), "DownFork")
    _need_profile(g, u, (2, 1), "UpFork")
    pair = [e for e in g.out_edges(d) if e.dst == u]
    _need(len(pair) == 2, f"expected a parallel pair {d!r}=>{u!r}")
    keep = _need_edge(g, m.at("keep"), src=d, dst=u)
    drop = _need_edge(g, m.at("drop"), src=d, dst=u)
    _need(keep.id != drop.id, "keep and drop must differ")
    e_a = g.in_edges(d)[0]
    e_b = g.out_edges(u)[0]
    return g.modified(
        remove_edges=[drop.id],
        reattach={
            e_a.id: (e_a.src, u),
            keep.id: (u, d),
            e_b.id: (d, e_b.dst),
        },
    )


def _apply_m8_forward(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    mn, u = m.at("min"), m.at("fork")
    _need_profile(g, mn, (0, 1), "minimum")
    _need_profile(g, u, (2, 1), "fork")
    stem = _need_edge(g, m.at("stem"), src=mn, dst=u)
    ctx = _need_edge(g, m.at("context_in"), dst=u)
    _need(ctx.id != stem.id, "context_in must be the fork's other in-edge")
    out = _need_edge(g, m.at("out"), src=u)
    return g.modified(
        remove_vertices=[mn, u],
        remove_edges=[stem.id, out.id],
        reattach={ctx.id: (ctx.src, out.dst)},
    )


def _apply_m8_reverse(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    host = _need_edge(g, m.at("edge"))
    mn, u = m.fresh_id("min"), m.fresh_id("fork")
    stem, out = m.fresh_id("stem"), m.fresh_id("out")
    for label in (mn, u):
        _need(not g.has_vertex(label), f"fresh vertex id {label!r} already taken")
    for label in (stem, out):
        _need(not g.has_edge(label), f"fresh edge id {label!r} already taken")
    return g.modified(
        add_vertices=[mn, u],
        add_edges=[(stem, mn, u), (out, u, host.dst)],
        reattach={host.id: (host.src, u)},
    )


def _apply_m9_forward(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    mx, d = m.at("max"), m.at("fork")
    _need_profile(g, mx, (1, 0), "maximum")
    _need_profile(g, d, (1, 2), "fork")
    stem = _need_edge(g, m.at("stem"), src=d, dst=mx)
    ctx = _need_edge(g, m.at("context_out"), src=d)
    _need(ctx.id != stem.id, "context_out must be the fork's other out-edge")
    inn = _need_edge(g, m.at("in"), dst=d)
    return g.modified(
        remove_vertices=[mx, d],
        remove_edges=[stem.id, inn.id],
        reattach={ctx.id: (inn.src, ctx.dst)},
    )


def _apply_m9_reverse(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    host = _need_edge(g, m.at("edge"))
    mx, d = m.fresh_id("max"), m.fresh_id("fork")
    stem, inn = m.fresh_id("stem"), m.fresh_id("in")
    for label in (mx, d):
        _need(not g.has_vertex(label), f"fresh vertex id {label!r} already taken")
    for label in (stem, inn):
        _need(not g.has_edge(label), f"fresh edge id {label!r} already taken")
    return g.modified(
        add_vertices=[mx, d],
        add_edges=[(stem, d, mx), (inn, host.src, d)],
        reattach={host.id: (d, host.dst)},
    )


_HANDLERS = {
    ("M1", FORWARD): _apply_m1,
    ("M2", FORWARD): _apply_m2,
    ("M2p", FORWARD): _apply_m2p,
    ("M3", FORWARD): _apply_m3,
    ("M3p", FORWARD): _apply_m3p,
    ("M4", FORWARD): _apply_m4,
    ("M4", REVERSE): _apply_m4,
    ("M5", FORWARD): _apply_m5,
    ("M5", REVERSE): _apply_m5,
    ("M6", FORWARD): _apply_m6_forward,
    ("M6", REVERSE): _apply_m6_reverse,
    ("M7", FORWARD): _apply_m7,
    ("M8", FORWARD): _apply_m8_forward,
    ("M8", REVERSE): _apply_m8_reverse,
    ("M9", FORWARD): _apply_m9_forward,
    ("M9", REVERSE): _apply_m9_reverse,
}


def apply_move(g: ReebGraph, m: MoveInstance) -> ReebGraph:
    """Apply one move instance; SiteStale if it does not match the graph,
    IllegalDirection for a one-sided move used backwards."""
    if m.kind not in MOVE_KINDS:
        raise SiteStale(f"unknown move kind {m.kind!r}")
    if m.direction not in (FORWARD, REVERSE):
        raise SiteStale(f"unknown direction {m.direction!r}")
    handler = _HANDLERS.get((m.kind, m.direction))
    if handler is None:
        raise IllegalDirection(f"{m.kind} cannot be applied in direction {m.direction}")
    out = handler(g, m)
    if _DEBUG:
        require_good_orientation(out)
    return out


def replay(g: ReebGraph, steps: Iterable[MoveInstance]) -> ReebGraph:
    """Apply a sequence of moves; failures carry the offending step index."""
    cur = g
    for i, m in enumerate(steps):
        try:
            cur = apply_move(cur, m)
        except SiteStale as exc:
            raise SiteStale(f"step {i} ({m!r}): {exc}", step_index=i) from None
    return cur


# -- site discovery -------------------------------------------------------------


def _profile_vertices(g: ReebGraph, prof: tuple[int, int]) -> list[str]:
    return [v for v in g.vertices if degree_profile(g, v) == prof]


def _sites_m1(g: ReebGraph) -> Iterator[MoveInstance]:
    for e in g.edges:
        if degree_profile(g, e.src) == (1, 1) and degree_profile(g, e.dst) == (1, 1):
            yield MoveInstance.make("M1", lower=e.src, upper=e.dst)


def _sites_m2(g: ReebGraph) -> Iterator[MoveInstance]:
    for u in _profile_vertices(g, (2, 1)):
        for e in g.in_edges(u):
            if degree_profile(g, e.src) == (1, 1):
                yield MoveInstance.make("M2", fork=u, regular=e.src)


def _sites_m2p(g: ReebGraph) -> Iterator[MoveInstance]:
    for u in _profile_vertices(g, (2, 1)):
        r = g.out_edges(u)[0].dst
        if degree_profile(g, r) == (1, 1):
            for e in g.in_edges(u):
                yield MoveInstance.make("M2p", fork=u, regular=r, land=e.id)


def _sites_m3(g: ReebGraph) -> Iterator[MoveInstance]:
    for d in _profile_vertices(g, (1, 2)):
        for e in g.out_edges(d):
            if degree_profile(g, e.dst) == (1, 1):
                yield MoveInstance.make("M3", fork=d, regular=e.dst)


def _sites_m3p(g: ReebGraph) -> Iterator[MoveInstance]:
    for d in _profile_vertices(g, (1, 2)):
        r = g.in_edges(d)[0].src
        if degree_profile(g, r) == (1, 1):
            for e in g.out_edges(d):
                yield MoveInstance.make("M3p", fork=d, regular=r, land=e.id)


def _sigma_all() -> Iterator[tuple[int, int, int]]:
    for a in (1, 2, 3):
        rest = [x for x in (1, 2, 3) if x != a]
        yield (a, rest[0], rest[1])


def _sites_m4(g: ReebGraph, direction: str) -> Iterator[MoveInstance]:
    for e in g.edges:
        lo, hi = e.src, e.dst
        if degree_profile(g, lo) != (2, 1) or degree_profile(g, hi) != (2, 1):
            continue
        s = _strand_positions_m4(g, lo, hi, e)
        for sig in _sigma_all():
            yield MoveInstance.make("M4", direction, sigma=sig,
                                    lower=lo, upper=hi, s1=s[0], s2=s[1], s3=s[2])


def _sites_m5(g: ReebGraph, direction: str) -> Iterator[MoveInstance]:
    for e in g.edges:
        lo, hi = e.src, e.dst
        if degree_profile(g, lo) != (1, 2) or degree_profile(g, hi) != (1, 2):
            continue
        s = _strand_positions_m5(g, lo, hi, e)
        for sig in _sigma_all():
            yield MoveInstance.make("M5", direction, sigma=sig,
                                    lower=lo, upper=hi, s1=s[0], s2=s[1], s3=s[2])


def _sites_m6_forward(g: ReebGraph) -> Iterator[MoveInstance]:
    for e in g.edges:
        d, u = e.src, e.dst
        if degree_profile(g, d) != (1, 2) or degree_profile(g, u) != (2, 1):
            continue
        if sum(1 for f in g.out_edges(d) if f.dst == u) != 1:
            continue  # a parallel pair is M7's pattern, not M6's
        if _independent_climb(g, d, u, e.id):
            continue
        yield MoveInstance.make("M6", down=d, up=u)


def _sites_m6_reverse(g: ReebGraph) -> Iterator[MoveInstance]:
    for e in g.edges:
        u, d = e.src, e.dst
        if degree_profile(g, u) != (2, 1) or degree_profile(g, d) != (1, 2):
            continue
        for e_in in g.in_edges(u):
            for e_out in g.out_edges(d):
                yield MoveInstance.make("M6", REVERSE, up=u, down=d,
                                        drop_in=e_in.id, keep_out=e_out.id)


def _sites_m7(g: ReebGraph) -> Iterator[MoveInstance]:
    for d in _profile_vertices(g, (1, 2)):
        outs = g.out_edges(d)
        if outs[0].dst != outs[1].dst:
            continue
        u = outs[0].dst
        if degree_profile(g, u) != (2, 1):
            continue
        keep, drop = sorted((outs[0].id, outs[1].id))
        yield MoveInstance.make("M7", down=d, up=u, keep=keep, drop=drop)


def _sites_m8_forward(g: ReebGraph) -> Iterator[MoveInstance]:
    for mn in _profile_vertices(g, (0, 1)):
        stem = g.out_edges(mn)[0]
        u = stem.dst
        if degree_profile(g, u) != (2, 1):
            continue
        ctx = next(e for e in g.in_edges(u) if e.id != stem.id)
        yield MoveInstance.make("M8", min=mn, fork=u, stem=stem.id,
                                context_in=ctx.id, out=g.out_edges(u)[0].id)


def _sites_m8_reverse(g: ReebGraph) -> Iterator[MoveInstance]:
    ids = fresh_ids(g, 4)
    fresh = {"min": ids[0], "fork": ids[1], "stem": ids[2], "out": ids[3]}
    for e in g.edges:
        yield MoveInstance.make("M8", REVERSE, edge=e.id, fresh=fresh)


def _sites_m9_forward(g: ReebGraph) -> Iterator[MoveInstance]:
    for mx in _profile_vertices(g, (1, 0)):
        stem = g.in_edges(mx)[0]
        d = stem.src
        if degree_profile(g, d) != (1, 2):
            continue
        ctx = next(e for e in g.out_edges(d) if e.id != stem.id)
        yield MoveInstance.make("M9", max=mx, fork=d, stem=stem.id,
                                context_out=ctx.id, **{"in": g.in_edges(d)[0].id})


def _sites_m9_reverse(g: ReebGraph) -> Iterator[MoveInstance]:
    ids = fresh_ids(g, 4)
    fresh = {"max": ids[0], "fork": ids[1], "stem": ids[2], "in": ids[3]}
    for e in g.edges:
        yield MoveInstance.make("M9", REVERSE, edge=e.id, fresh=fresh)


def match_sites(g: ReebGraph, kind: str, direction: str = FORWARD) -> list[MoveInstance]:
    """All instances of a move kind that match the graph, in deterministic
    order.  One-sided kinds yield nothing in reverse, except M6 whose
    reverse sites are listed for the planner's benefit (apply still
    requires the planner-context flag)."""
    if kind not in MOVE_KINDS:
        raise ValueError(f"unknown move kind {kind!r}")
    if direction not in (FORWARD, REVERSE):
        raise ValueError(f"unknown direction {direction!r}")
    if direction == REVERSE:
        table = {
            "M4": lambda: _sites_m4(g, REVERSE),
            "M5": lambda: _sites_m5(g, REVERSE),
            "M6": lambda: _sites_m6_reverse(g),
            "M8": lambda: _sites_m8_reverse(g),
            "M9": lambda: _sites_m9_reverse(g),
        }
        gen = table.get(kind)
        return list(gen()) if gen else []
    table_f = {
        "M1": lambda: _sites_m1(g),
        "M2": lambda: _sites_m2(g),
        "M2p": lambda: _sites_m2p(g),
        "M3": lambda: _sites_m3(g),
        "M3p": lambda: _sites_m3p(g),
        "M4": lambda: _sites_m4(g, FORWARD),
        "M5": lambda: _sites_m5(g, FORWARD),
        "M6": lambda: _sites_m6_forward(g),
        "M7": lambda: _sites_m7(g),
        "M8": lambda: _sites_m8_forward(g),
        "M9": lambda: _sites_m9_forward(g),
    }
    return list(table_f[kind]())


# -- inversion -----------------------------------------------------------------


def _invert_step(g_before: ReebGraph, g_after: ReebGraph, m: MoveInstance,
                 index: int) -> MoveInstance:
    """The move that undoes m, expressed in a legal direction wherever one
    exists (the primed kinds are exactly the legal renderings of the
    unprimed reverses, and vice versa)."""
    k = m.kind
    if k == "M1":
        return MoveInstance.make("M1", lower=m.at("upper"), upper=m.at("lower"))
    if k == "M2":
        e_land = g_before.in_edges(m.at("regular"))[0]
        return MoveInstance.make("M2p", fork=m.at("fork"), regular=m.at("regular"),
                                 land=e_land.id)
    if k == "M2p":
        return MoveInstance.make("M2", fork=m.at("fork"), regular=m.at("regular"))
    if k == "M3":
        e_land = g_before.out_edges(m.at("regular"))[0]
        return MoveInstance.make("M3p", fork=m.at("fork"), regular=m.at("regular"),
                                 land=e_land.id)
    if k == "M3p":
        return MoveInstance.make("M3", fork=m.at("fork"), regular=m.at("regular"))
    if k in ("M4", "M5"):
        assert m.sigma is not None
        strands = [m.at("s1"), m.at("s2"), m.at("s3")]
        new_exclusive = strands[m.sigma[0] - 1]
        new_pair = sorted((strands[m.sigma[1] - 1], strands[m.sigma[2] - 1]))
        post = [new_exclusive] + new_pair          # strand at post-position i+1
        pos = {eid: i + 1 for i, eid in enumerate(post)}
        sig = (pos[strands[0]], *sorted((pos[strands[1]], pos[strands[2]])))
        return MoveInstance.make(
            k, REVERSE if m.direction == FORWARD else FORWARD, sigma=sig,
            lower=m.at("upper"), upper=m.at("lower"),
            s1=post[0], s2=post[1], s3=post[2],
        )
    if k == "M6" and m.direction == REVERSE:
        return MoveInstance.make("M6", down=m.at("down"), up=m.at("up"))
    if k == "M6":
        d, u = m.at("down"), m.at("up")
        e_a = g_before.in_edges(d)[0]
        e_c = next(e for e in g_before.out_edges(d) if e.dst != u)
        return MoveInstance.make("M6", REVERSE, planner_ctx=True,
                                 up=u, down=d, drop_in=e_a.id, keep_out=e_c.id)
    if k == "M7":
        raise NotInvertible(
            "M7 removes a cycle; no legal move puts one back", step_index=index)
    if k == "M8" and m.direction == FORWARD:
        return MoveInstance.make(
            "M8", REVERSE, edge=m.at("context_in"),
            fresh={"min": m.at("min"), "fork": m.at("fork"),
                   "stem": m.at("stem"), "out": m.at("out")})
    if k == "M8":
        return MoveInstance.make(
            "M8", min=m.fresh_id("min"), fork=m.fresh_id("fork"),
            stem=m.fresh_id("stem"), out=m.fresh_id("out"),
            context_in=m.at("edge"))
    if k == "M9" and m.direction == FORWARD:
        return MoveInstance.make(
            "M9", REVERSE, edge=m.at("context_out"),
            fresh={"max": m.at("max"), "fork": m.at("fork"),
                   "stem": m.at("stem"), "in": m.at("in")})
    if k == "M9":
        return MoveInstance.make(
            "M9", max=m.fresh_id("max"), fork=m.fresh_id("fork"),
            stem=m.fresh_id("stem"), context_out=m.at("edge"),
            **{"in": m.fresh_id("in")})
    raise NotInvertible(f"no inverse rule for {m!r}", step_index=index)


def invert(start: ReebGraph, steps: Sequence[MoveInstance]) -> Trace:
    """Invert a trace: the returned steps replay the end graph back to the
    start graph, id-exactly.  Raises NotInvertible (with the offending
    index) when a step has no legal inverse."""
    inverses: list[MoveInstance] = []
    cur = start
    for i, m in enumerate(steps):
        nxt = apply_move(cur, m)
        inverses.append(_invert_step(cur, nxt, m, i))
        cur = nxt
    inverses.reverse()
    return tuple(inverses)
