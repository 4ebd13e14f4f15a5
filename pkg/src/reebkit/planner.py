"""Deconstruction planning and replayable construction plans.

:func:`realize` drives any good-oriented graph down to the initial
staircase of its cycle count and returns the tape of that descent played
backwards: a :class:`Plan` whose moves, plus a handful of recorded
surgeries, rebuild the target from the staircase.  :func:`check_plan`
replays such a tape and reports the first thing wrong with it.

The intermediate machinery is exposed as graph operations in its own
right: leaf classification (:func:`classify_leaf`), the move-only
clearing of increasing routes between two marked regular points
(:func:`eliminate_increasing_paths`), level squeezing
(:func:`relevel_below`), and the two fork-removal surgeries
(:func:`splice_b1`, :func:`splice_b2`).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    BudgetExceeded,
    DanglingReference,
    NeighborDegreeOne,
    NoConfiguration,
    NotSmoothed,
    PathExists,
    PreconditionNotEstablished,
    ReebError,
    WrongCase,
)
from .graph import (
    Edge,
    ReebGraph,
    betti,
    degree_profile,
    fresh_ids,
    is_initial_form,
    is_primitive,
    iso_oriented,
    path_set_IP,
    require_good_orientation,
    smooth,
    synthesize_levels,
)
from .moves import (
    REVERSE,
    TWO_SIDED,
    MoveInstance,
    Trace,
    apply_move,
    invert,
)
from .reduction import (
    ExpansionRecord,
    GadgetRecord,
    ReductionResult,
    contract_gadgets,
    expand_high_degree,
    primitivize,
)

__all__ = [
    "CaseTag",
    "ExtraOp",
    "Plan",
    "SpliceB1Record",
    "SpliceB2Record",
    "check_plan",
    "classify_leaf",
    "eliminate_increasing_paths",
    "realize",
    "relevel_below",
    "splice_b1",
    "splice_b2",
    "verify_plan",
]


class CaseTag(enum.Enum):
    """How a degree-1 vertex can be removed.

    ``A``: a single move cancels the leaf against its fork.  ``B1``: the
    fork is a three-way cut point and splices away.  ``B2_I``: the full
    frame applies and rounds of fork exchanges finish the job.  ``B2_II``:
    the frame applies but the leftover route is one-sided, so a splice has
    to finish instead.
    """

    A = "A"
    B1 = "B1"
    B2_I = "B2_I"
    B2_II = "B2_II"


@dataclass(frozen=True)
class SpliceB1Record:
    """Everything needed to undo one three-way-cut splice."""

    variant: str
    vertex: str
    fork: str
    pendant: tuple[str, str, str]
    arm1: tuple[str, str, str]
    arm2: tuple[str, str, str]
    bridge: str
    reversed_edges: tuple[str, ...]


@dataclass(frozen=True)
class SpliceB2Record:
    """Removed material of one frame splice: the four frame vertices, the
    edges that went with them (id, src, dst, in a fixed order), the one or
    two replacement edges, and the walled-region edges that were flipped."""

    variant: str
    vertices: tuple[str, str, str, str]
    edges: tuple[tuple[str, str, str], ...]
    added: tuple[tuple[str, str, str], ...]
    reversed_edges: tuple[str, ...]


@dataclass(frozen=True)
class ExtraOp:
    """A structural step inside a plan.

    ``at`` counts moves: the operation fires after ``at`` moves of the
    plan have been applied.  ``kind`` is one of ``splice_b1``,
    ``splice_b2``, ``reflect`` or ``collapse``; the payload carries the
    data the replay needs, JSON-ready (lists, strings, ints only).
    """

    kind: str
    at: int
    payload: dict


@dataclass(frozen=True)
class Plan:
    """A replayable recipe: start graph, moves, structural steps, target."""

    start: ReebGraph
    steps: Trace
    extra_ops: tuple[ExtraOp, ...]
    target: ReebGraph


# -- small structural helpers ------------------------------------------------------------


def _require_vertices(g: ReebGraph, names: Iterable[str]) -> None:
    for name in names:
        if not g.has_vertex(name):
            raise DanglingReference(f"vertex {name!r} is not in the graph")


def _undirected_component(g: ReebGraph, seed: str, skip: frozenset[str] | set[str]) -> set[str]:
    """Vertices connected to seed ignoring edge direction, never entering skip."""
    seen = {seed}
    queue = deque([seed])
    while queue:
        u = queue.popleft()
        for e in g.out_edges(u):
            if e.dst not in seen and e.dst not in skip:
                seen.add(e.dst)
                queue.append(e.dst)
        for e in g.in_edges(u):
            if e.src not in seen and e.src not in skip:
                seen.add(e.src)
                queue.append(e.src)
    return seen


def _components_without(g: ReebGraph, w: str) -> int:
    """Number of connected pieces left when w and its edges are deleted."""
    count = 0
    seen: set[str] = set()
    for u in g.vertices:
        if u == w or u in seen:
            continue
        count += 1
        seen |= _undirected_component(g, u, {w})
    return count


def _reflected(g: ReebGraph) -> ReebGraph:
    """The same graph upside down: every edge reversed."""
    return ReebGraph.build(
        g.vertices, [(e.id, e.dst, e.src) for e in g.edges], markers=g.markers
    )


def _connector_path(g: ReebGraph, start: str, goal: str) -> Optional[list[Edge]]:
    """Smallest-edge-id increasing path from start to goal.

    Returns [] when the endpoints coincide and None when no directed path
    exists.
    """
    if start == goal:
        return []
    allowed = g.ancestors(goal)
    if start not in allowed:
        return None
    path: list[Edge] = []
    cur = start
    while cur != goal:
        step = min(
            (e for e in g.out_edges(cur) if e.dst == goal or e.dst in allowed),
            key=lambda e: e.id,
        )
        path.append(step)
        cur = step.dst
    return path


def _count_increasing_paths(g: ReebGraph, src: str, dst: str) -> int:
    memo: dict[str, int] = {dst: 1}

    def walk(u: str) -> int:
        if u not in memo:
            memo[u] = sum(walk(e.dst) for e in g.out_edges(u))
        return memo[u]

    return walk(src)


# -- fork exchange moves, described by what travels ---------------------------------------


def _drop(g: ReebGraph, lower: str, upper: str, carry: str) -> MoveInstance:
    """Exchange two stacked DownForks: `upper` drops below `lower`.

    `carry` is the out-strand of `upper` that stays with it on the way
    down; the other two strands end up on `lower`.
    """
    mids = [e for e in g.out_edges(lower) if e.dst == upper]
    assert len(mids) == 1, "the forks must share exactly one strand"
    first = next(e.id for e in g.out_edges(lower) if e.id != mids[0].id)
    rest = sorted(e.id for e in g.out_edges(upper))
    strands = (first, rest[0], rest[1])
    assert carry in rest, "the travelling strand must leave the dropping fork"
    slot = strands.index(carry) + 1
    keep = sorted(i for i in (1, 2, 3) if i != slot)
    return MoveInstance.make(
        "M5",
        sigma=(slot, keep[0], keep[1]),
        lower=lower,
        upper=upper,
        s1=strands[0],
        s2=strands[1],
        s3=strands[2],
    )


def _climb(g: ReebGraph, lower: str, upper: str, carry: str) -> MoveInstance:
    """Exchange two stacked UpForks: `lower` climbs above `upper`.

    `carry` names the in-strand of `lower` that travels with it.
    """
    mids = [e for e in g.out_edges(lower) if e.dst == upper]
    assert len(mids) == 1, "the forks must share exactly one strand"
    first = next(e.id for e in g.in_edges(upper) if e.id != mids[0].id)
    rest = sorted(e.id for e in g.in_edges(lower))
    strands = (first, rest[0], rest[1])
    assert carry in rest, "the travelling strand must enter the climbing fork"
    slot = strands.index(carry) + 1
    keep = sorted(i for i in (1, 2, 3) if i != slot)
    return MoveInstance.make(
        "M4",
        sigma=(slot, keep[0], keep[1]),
        lower=lower,
        upper=upper,
        s1=strands[0],
        s2=strands[1],
        s3=strands[2],
    )


class _Cursor:
    """A graph plus the moves applied to it so far."""

    def __init__(self, g: ReebGraph):
        self.g = g
        self.steps: list[MoveInstance] = []

    def do(self, m: MoveInstance) -> None:
        self.g = apply_move(self.g, m)
        self.steps.append(m)


# -- the descent frame --------------------------------------------------------------------
#
# All of the route-clearing machinery works on one shared shape, the frame:
#
#     low end --entry--> split --...pocket...--> merge --exit--> high end
#
# where `split` is a DownFork whose second out-edge (the out_strand) and
# `merge` is an UpFork whose second in-edge (the in_strand) lead into the
# rest of the graph, and the pocket between them is sealed: its only
# boundary edges are pocket_in (leaving the split) and pocket_out
# (entering the merge).  Rounds of fork exchanges grow the pocket while
# strictly shrinking the number of increasing routes from the head of the
# out_strand to the tail of the in_strand.


def _descend_to_min(g: ReebGraph, top: str) -> tuple[list[str], list[Edge]]:
    """Walk smallest-id in-edges from `top` down to a minimum.

    Returns the visited vertices bottom-up (minimum first, `top` last) and
    the edges between them (edges[i] enters vertices[i + 1]).
    """
    vs = [top]
    es: list[Edge] = []
    cur = top
    while g.indeg(cur) > 0:
        e = min(g.in_edges(cur), key=lambda x: x.id)
        es.append(e)
        cur = e.src
        vs.append(cur)
    vs.reverse()
    es.reverse()
    return vs, es


def _straighten_descent(cur: _Cursor, vs: Sequence[str], es: Sequence[Edge]) -> dict:
    """Turn a descent walk into the frame shape by clearing its forks.

    The walk's DownForks (a nonempty prefix, by primitivity) are dropped
    below each other until only the lowest remains on the walk, and its
    UpForks are climbed over each other likewise; the two survivors become
    the split and the merge, joined by the single strand left between
    them.  Returns the frame roles.
    """
    forks = list(vs[1:])
    k = len(forks)
    a = 0
    while a < k and degree_profile(cur.g, forks[a]) == (1, 2):
        a += 1
    assert 1 <= a < k, "the walk must rise through a split before its merges"

    anchor = forks[0]
    for i in range(a - 1):
        cur.do(_drop(cur.g, anchor, forks[i + 1], es[i + 2].id))
        anchor = forks[i + 1]

    anchor = forks[k - 1]
    for j in range(k - 1, a, -1):
        cur.do(_climb(cur.g, forks[j - 1], anchor, es[j - 1].id))
        anchor = forks[j - 1]

    split, merge = forks[a - 1], forks[a]
    joint = es[a].id
    out_strand = next(e.id for e in cur.g.out_edges(split) if e.id != joint)
    in_strand = next(e.id for e in cur.g.in_edges(merge) if e.id != joint)
    return {
        "split": split,
        "merge": merge,
        "pocket_in": joint,
        "pocket_out": joint,
        "out_strand": out_strand,
        "in_strand": in_strand,
    }


def _absorb_round(
    cur: _Cursor,
    roles: dict,
    path: Sequence[Edge],
    splits: Sequence[str],
    merges: Sequence[str],
) -> None:
    """One pocket-growing round along a mixed connector path.

    The path's DownForks collapse onto its last one and the UpForks onto
    its first one; those two survivors are then exchanged past the frame
    forks, which swallows the old frame pair into the pocket and leaves
    the survivors as the new split and merge.
    """
    a, b = len(splits), len(merges)
    g = cur.g
    if a == 1 and b == 1:
        doubled = [e for e in g.out_edges(splits[0]) if e.dst == merges[0]]
        if len(doubled) == 2:
            raise NoConfiguration(
                "the last two route forks are joined by a parallel pair; "
                "no exchange round can separate them"
            )

    anchor = splits[0]
    for i in range(a - 1):
        cur.do(_drop(cur.g, anchor, splits[i + 1], path[i + 1].id))
        anchor = splits[i + 1]

    joint = path[a - 1]
    anchor = merges[b - 1]
    for j in range(b - 1, 0, -1):
        cur.do(_climb(cur.g, merges[j - 1], anchor, path[a + j - 2].id))
        anchor = merges[j - 1]

    low, high = splits[-1], merges[0]
    inward = next(e for e in cur.g.in_edges(high) if e.id != joint.id)
    outward = next(e for e in cur.g.out_edges(low) if e.id != joint.id)
    assert inward.id != outward.id

    cur.do(_climb(cur.g, high, roles["merge"], inward.id))
    cur.do(_drop(cur.g, roles["split"], low, outward.id))

    roles.update(
        pocket_in=roles["out_strand"],
        pocket_out=roles["in_strand"],
        out_strand=outward.id,
        in_strand=inward.id,
        split=low,
        merge=high,
    )


def _run_rounds(cur: _Cursor, roles: dict) -> Optional[list[Edge]]:
    """Grow the pocket until the outer strands are separated.

    Returns None once no increasing route joins them any more, or the
    leftover connector path when it consists of a single fork kind, which
    rounds alone cannot clear.
    """
    while True:
        g = cur.g
        foot = g.edge(roles["out_strand"]).dst
        head = g.edge(roles["in_strand"]).src
        path = _connector_path(g, foot, head)
        if path is None:
            return None
        verts = [foot] + [e.dst for e in path]
        splits = [u for u in verts if degree_profile(g, u) == (1, 2)]
        merges = [u for u in verts if degree_profile(g, u) == (2, 1)]
        assert len(splits) + len(merges) == len(verts)
        assert verts == splits + merges, "route forks must split before they merge"
        if not splits or not merges:
            return path
        before = _count_increasing_paths(g, foot, head)
        _absorb_round(cur, roles, path, splits, merges)
        g = cur.g
        after = _count_increasing_paths(
            g, g.edge(roles["out_strand"]).dst, g.edge(roles["in_strand"]).src
        )
        assert after < before


def _sink_splits(cur: _Cursor, roles: dict, path: Sequence[Edge], splits: Sequence[str]) -> str:
    """Collapse an all-DownFork connector below the frame's split.

    The path's forks drop onto its last one, which is then pushed below
    the split itself, next to the frame's low end.  Returns that fork; it
    sits on a three-way cut afterwards.
    """
    a = len(splits)
    anchor = splits[0]
    for i in range(a - 1):
        carry = path[i + 1].id if i + 1 <= a - 2 else roles["in_strand"]
        cur.do(_drop(cur.g, anchor, splits[i + 1], carry))
        anchor = splits[i + 1]
    last = splits[-1]
    side = next(e for e in cur.g.out_edges(last) if e.id != roles["in_strand"])
    cur.do(_drop(cur.g, roles["split"], last, side.id))
    return last


def _raise_merges(cur: _Cursor, roles: dict, path: Sequence[Edge], merges: Sequence[str]) -> str:
    """Mirror of :func:`_sink_splits` for an all-UpFork connector."""
    b = len(merges)
    anchor = merges[b - 1]
    for j in range(b - 1, 0, -1):
        carry = path[j - 2].id if j >= 2 else roles["out_strand"]
        cur.do(_climb(cur.g, merges[j - 1], anchor, carry))
        anchor = merges[j - 1]
    first = merges[0]
    side = next(e for e in cur.g.in_edges(first) if e.id != roles["out_strand"])
    cur.do(_climb(cur.g, first, roles["merge"], side.id))
    return first


# -- public operations --------------------------------------------------------------------


def classify_leaf(g: ReebGraph, v: str) -> CaseTag:
    """Which removal case applies to the degree-1 vertex v.

    The graph's smooth core must be primitive (WrongCase otherwise, as for
    a vertex that is not degree 1).  NeighborDegreeOne flags the two-vertex
    graph, where v's neighbor is itself a leaf and no case fits.
    """
    _require_vertices(g, [v])
    require_good_orientation(g)
    if g.degree(v) != 1:
        raise WrongCase(f"vertex {v!r} has degree {g.degree(v)}, not 1")
    core = smooth(g)
    if g.outdeg(v) == 1:
        pendant = core.out_edges(v)[0]
        w = pendant.dst
    else:
        pendant = core.in_edges(v)[0]
        w = pendant.src
    if core.degree(w) == 1:
        raise NeighborDegreeOne(f"the neighbor {w!r} of {v!r} is also a leaf")
    if not is_primitive(core):
        raise WrongCase("the smooth core is not primitive")

    mins_up = degree_profile(core, v) == (0, 1) and degree_profile(core, w) == (2, 1)
    maxes_down = degree_profile(core, v) == (1, 0) and degree_profile(core, w) == (1, 2)
    if mins_up or maxes_down:
        return CaseTag.A
    if _components_without(core, w) == 3:
        return CaseTag.B1

    # Distinguish the two remaining cases by simulating the frame setup on
    # a scratch copy, upside down when v is a minimum.
    sim = core if degree_profile(core, v) == (1, 0) else _reflected(core)
    top = sim.in_edges(v)[0].src
    vs, es = _descend_to_min(sim, top)
    forks = vs[1:]
    lead = 0
    while lead < len(forks) and degree_profile(sim, forks[lead]) == (1, 2):
        lead += 1
    if lead == 0:
        return CaseTag.B2_II
    cur = _Cursor(sim)
    roles = _straighten_descent(cur, vs, es)
    foot = cur.g.edge(roles["out_strand"]).dst
    head = cur.g.edge(roles["in_strand"]).src
    path = _connector_path(cur.g, foot, head)
    if path is None:
        return CaseTag.B2_II
    profiles = {degree_profile(cur.g, u) for u in [foot] + [e.dst for e in path]}
    return CaseTag.B2_I if {(1, 2), (2, 1)} <= profiles else CaseTag.B2_II


def eliminate_increasing_paths(g: ReebGraph, x: str, y: str) -> ReductionResult:
    """Clear every increasing route from x to y using moves only.

    x and y must be the two marked regular points of the frame shape: x
    just above a DownFork fed by a minimum, y just below an UpFork feeding
    a maximum, the two forks joined by a sealed pocket, and no other
    regular vertex anywhere (NotSmoothed).  NoConfiguration covers every
    other malformed input, and also the inputs whose leftover routes are
    one-sided: those need surgery, which moves cannot express.

    Returns the reworked graph and the trace that produced it; the trace
    is empty when there was nothing to clear.
    """
    _require_vertices(g, [x, y])
    require_good_orientation(g)
    if x == y:
        raise NoConfiguration("the two marked points must be distinct")
    for u in (x, y):
        if degree_profile(g, u) != (1, 1):
            raise NoConfiguration(f"marked point {u!r} is not a regular vertex")

    stem_low = g.in_edges(x)[0]
    split = stem_low.src
    if degree_profile(g, split) != (1, 2):
        raise NoConfiguration("x must sit directly above a DownFork")
    stem_high = g.out_edges(y)[0]
    merge = stem_high.dst
    if degree_profile(g, merge) != (2, 1):
        raise NoConfiguration("y must sit directly below an UpFork")
    top = g.out_edges(merge)[0]
    if degree_profile(g, top.dst) != (1, 0):
        raise NoConfiguration("the UpFork above y must feed a maximum")
    bottom = g.in_edges(split)[0]
    if degree_profile(g, bottom.src) != (0, 1):
        raise NoConfiguration("the DownFork below x must be fed by a minimum")
    for u in g.vertices:
        if u not in (x, y) and degree_profile(g, u) == (1, 1):
            raise NotSmoothed(f"unexpected regular vertex {u!r}")

    out_x = g.out_edges(x)[0]
    in_y = g.in_edges(y)[0]
    if out_x.id == in_y.id:
        raise NoConfiguration("x and y share a strand; moves cannot part them")

    pocket_in = next(e for e in g.out_edges(split) if e.id != stem_low.id)
    pocket_out = next(e for e in g.in_edges(merge) if e.id != stem_high.id)
    if pocket_in.dst == merge or pocket_out.src == split:
        if pocket_in.id != pocket_out.id:
            raise NoConfiguration("the pocket between the forks is not sealed")
    else:
        inside = _undirected_component(g, pocket_in.dst, {split, merge})
        boundary = {e.id for e in g.edges if (e.src in inside) != (e.dst in inside)}
        if pocket_out.src not in inside or boundary != {pocket_in.id, pocket_out.id}:
            raise NoConfiguration("the pocket between the forks is not sealed")
    if not is_primitive(g):
        raise NoConfiguration("the graph is not primitive")

    if not path_set_IP(g, x, y):
        return ReductionResult(g, ())

    cur = _Cursor(g)
    # Park the marked points out of the frame's way: y rides above the
    # merge, x slips below the split.  Their former strands attach to the
    # forks directly and become the frame's outer strands.
    cur.do(MoveInstance.make("M2", fork=merge, regular=y))
    cur.do(MoveInstance.make("M3", fork=split, regular=x))
    roles = {
        "split": split,
        "merge": merge,
        "pocket_in": pocket_in.id,
        "pocket_out": pocket_out.id,
        "out_strand": out_x.id,
        "in_strand": in_y.id,
    }
    leftover = _run_rounds(cur, roles)
    if leftover is not None:
        raise NoConfiguration(
            "the remaining routes pass forks of a single kind only; "
            "they cannot be cleared by moves"
        )
    cur.do(MoveInstance.make("M2p", fork=roles["merge"], regular=y, land=roles["in_strand"]))
    cur.do(MoveInstance.make("M3p", fork=roles["split"], regular=x, land=roles["out_strand"]))
    assert not path_set_IP(cur.g, x, y)
    return ReductionResult(cur.g, tuple(cur.steps))


def relevel_below(g: ReebGraph, y_prime: str, x: str) -> ReebGraph:
    """Reassign levels so that y_prime ends up strictly below x.

    Only levels change; the graph is untouched.  A graph without levels
    gets the synthesized ones first.  PathExists signals the one true
    obstruction: a directed path from x to y_prime (or x == y_prime)
    forces the opposite order.
    """
    _require_vertices(g, [y_prime, x])
    require_good_orientation(g)
    if x == y_prime or x in g.ancestors(y_prime):
        raise PathExists(f"an increasing path forces {x!r} below {y_prime!r}")
    work = g if g.levels is not None else synthesize_levels(g)
    if work.level(y_prime) < work.level(x):
        return work
    region = set(work.ancestors(y_prime)) | {y_prime}
    bounds = [work.level(x)]
    for e in work.edges:
        if e.src in region and e.dst not in region:
            bounds.append(work.level(e.dst))
    ceiling = min(bounds)
    old = sorted({work.level(u) for u in region})
    squeeze = {
        lv: ceiling - 1 + Fraction(i + 1, len(old) + 1) for i, lv in enumerate(old)
    }
    levels = {
        u: squeeze[work.level(u)] if u in region else work.level(u)
        for u in work.vertices
    }
    return work.with_levels(levels)


def splice_b1(g: ReebGraph, v: str, w: str) -> tuple[ReebGraph, SpliceB1Record]:
    """Remove a leaf whose fork is a three-way cut point.

    v must be a leaf, w its fork neighbor (a DownFork over a minimum, an
    UpFork under a maximum), and deleting w must leave exactly three
    pieces (WrongCase otherwise).  The two arm stumps are bridged by a
    fresh edge; one arm's piece is flipped upside down so the bridge can
    be oriented, which is what the returned record's ``reversed_edges``
    lists.  Cycle count is preserved, the leaf count drops by one.
    """
    _require_vertices(g, [v, w])
    require_good_orientation(g)
    if g.degree(v) != 1:
        raise WrongCase(f"vertex {v!r} has degree {g.degree(v)}, not 1")
    if degree_profile(g, v) == (0, 1):
        variant = "min"
        pendant = g.out_edges(v)[0]
        if pendant.dst != w:
            raise WrongCase(f"{w!r} is not the neighbor of {v!r}")
        if degree_profile(g, w) != (1, 2):
            raise WrongCase("a minimum's fork must be a DownFork")
        arms = sorted(g.out_edges(w), key=lambda e: e.id)
        tips = [arms[0].dst, arms[1].dst]
    else:
        variant = "max"
        pendant = g.in_edges(v)[0]
        if pendant.src != w:
            raise WrongCase(f"{w!r} is not the neighbor of {v!r}")
        if degree_profile(g, w) != (2, 1):
            raise WrongCase("a maximum's fork must be an UpFork")
        arms = sorted(g.in_edges(w), key=lambda e: e.id)
        tips = [arms[0].src, arms[1].src]
    if _components_without(g, w) != 3:
        raise WrongCase("removing the fork must leave exactly three pieces")

    side = _undirected_component(g, tips[0], {w})
    reversed_ids = tuple(sorted(e.id for e in g.edges if e.src in side and e.dst in side))
    bridge = fresh_ids(g, 1, prefix="b")[0]
    bridge_edge = (bridge, tips[0], tips[1]) if variant == "min" else (bridge, tips[1], tips[0])
    out = g.modified(
        remove_vertices=[v, w],
        remove_edges=[pendant.id, arms[0].id, arms[1].id],
        add_edges=[bridge_edge],
        reattach={eid: (g.edge(eid).dst, g.edge(eid).src) for eid in reversed_ids},
    )
    record = SpliceB1Record(
        variant=variant,
        vertex=v,
        fork=w,
        pendant=(pendant.id, pendant.src, pendant.dst),
        arm1=(arms[0].id, arms[0].src, arms[0].dst),
        arm2=(arms[1].id, arms[1].src, arms[1].dst),
        bridge=bridge,
        reversed_edges=reversed_ids,
    )
    return out, record


def splice_b2(
    g: ReebGraph, v: str, w: str, v_prime: str, w_prime: str
) -> tuple[ReebGraph, SpliceB2Record]:
    """Remove a separated frame: both extremes, both forks, one cut each.

    The shape required (WrongCase otherwise): v a maximum on the UpFork w,
    v_prime a minimum under the DownFork w_prime, all four distinct.  The
    forks must be joined either by a single direct strand or through a
    sealed region entered and left exactly once, and no increasing route
    may join the outer strands (PreconditionNotEstablished otherwise; use
    :func:`eliminate_increasing_paths` or rounds of exchanges to get
    there).  The outer strands are cross-connected by fresh edges, the
    sealed region is flipped upside down, and the four frame vertices
    disappear.  Cycle count is preserved, the leaf count drops by two.
    """
    _require_vertices(g, [v, w, v_prime, w_prime])
    require_good_orientation(g)
    if len({v, w, v_prime, w_prime}) != 4:
        raise WrongCase("the four frame vertices must be distinct")
    if degree_profile(g, v) != (1, 0):
        raise WrongCase("v must be a maximum; flip the graph for the mirror shape")
    top = g.in_edges(v)[0]
    if top.src != w or degree_profile(g, w) != (2, 1):
        raise WrongCase("w must be the UpFork feeding v")
    if degree_profile(g, v_prime) != (0, 1):
        raise WrongCase("v_prime must be a minimum")
    bottom = g.out_edges(v_prime)[0]
    if bottom.dst != w_prime or degree_profile(g, w_prime) != (1, 2):
        raise WrongCase("w_prime must be the DownFork fed by v_prime")

    direct = [e for e in g.out_edges(w_prime) if e.dst == w]
    between = set(g.descendants(w_prime) & g.ancestors(w))
    if len(direct) >= 2:
        raise PreconditionNotEstablished("the forks are joined by a parallel pair")

    if len(direct) == 1:
        if between:
            raise PreconditionNotEstablished(
                "both a direct strand and a longer route join the forks"
            )
        joint = direct[0]
        out_strand = next(e for e in g.out_edges(w_prime) if e.id != joint.id)
        in_strand = next(e for e in g.in_edges(w) if e.id != joint.id)
        removed = (top, bottom, joint, out_strand, in_strand)
        reversed_ids: tuple[str, ...] = ()
    else:
        if not between:
            raise PreconditionNotEstablished("no route joins the forks at all")
        entries = [e for e in g.out_edges(w_prime) if e.dst in between]
        exits = [e for e in g.in_edges(w) if e.src in between]
        if len(entries) != 1 or len(exits) != 1:
            raise PreconditionNotEstablished(
                "the region between the forks must be entered and left exactly once"
            )
        pocket_in, pocket_out = entries[0], exits[0]
        out_strand = next(e for e in g.out_edges(w_prime) if e.id != pocket_in.id)
        in_strand = next(e for e in g.in_edges(w) if e.id != pocket_out.id)
        fence = between | {w, w_prime}
        for e in g.edges:
            if (e.src in between or e.dst in between) and not (
                e.src in fence and e.dst in fence
            ):
                raise PreconditionNotEstablished("the region between the forks leaks")
        reached = {pocket_in.dst}
        queue = deque(reached)
        while queue:
            u = queue.popleft()
            for e in g.out_edges(u):
                if e.dst in between and e.dst not in reached:
                    reached.add(e.dst)
                    queue.append(e.dst)
            for e in g.in_edges(u):
                if e.src in between and e.src not in reached:
                    reached.add(e.src)
                    queue.append(e.src)
        if reached != between:
            raise PreconditionNotEstablished("the region between the forks is split")
        removed = (top, bottom, pocket_in, pocket_out, out_strand, in_strand)
        reversed_ids = tuple(
            sorted(e.id for e in g.edges if e.src in between and e.dst in between)
        )

    foot, head = out_strand.dst, in_strand.src
    if head == foot or head in g.descendants(foot):
        raise PreconditionNotEstablished(
            "an increasing route still joins the outer strands"
        )

    if len(direct) == 1:
        name = fresh_ids(g, 1, prefix="n")[0]
        added: tuple[tuple[str, str, str], ...] = ((name, head, foot),)
        out = g.modified(
            remove_vertices=[v, w, v_prime, w_prime],
            remove_edges=[e.id for e in removed],
            add_edges=list(added),
        )
    else:
        lo, hi = fresh_ids(g, 2, prefix="n")
        added = ((lo, head, pocket_out.src), (hi, pocket_in.dst, foot))
        out = g.modified(
            remove_vertices=[v, w, v_prime, w_prime],
            remove_edges=[e.id for e in removed],
            add_edges=list(added),
            reattach={eid: (g.edge(eid).dst, g.edge(eid).src) for eid in reversed_ids},
        )
    record = SpliceB2Record(
        variant="max",
        vertices=(v, w, v_prime, w_prime),
        edges=tuple((e.id, e.src, e.dst) for e in removed),
        added=added,
        reversed_edges=reversed_ids,
    )
    return out, record


# -- plan assembly ------------------------------------------------------------------------


def _splice_b1_drafts(rec: SpliceB1Record) -> list[tuple[str, dict]]:
    drafts: list[tuple[str, dict]] = [
        (
            "splice_b1",
            {
                "variant": rec.variant,
                "vertex": rec.vertex,
                "fork": rec.fork,
                "pendant": list(rec.pendant),
                "arm1": list(rec.arm1),
                "arm2": list(rec.arm2),
                "bridge": rec.bridge,
            },
        )
    ]
    if rec.reversed_edges:
        drafts.append(("reflect", {"edges": list(rec.reversed_edges)}))
    return drafts


def _splice_b2_drafts(rec: SpliceB2Record) -> list[tuple[str, dict]]:
    drafts: list[tuple[str, dict]] = [
        (
            "splice_b2",
            {
                "variant": rec.variant,
                "vertices": list(rec.vertices),
                "edges": [list(t) for t in rec.edges],
                "added": [list(t) for t in rec.added],
            },
        )
    ]
    if rec.reversed_edges:
        drafts.append(("reflect", {"edges": list(rec.reversed_edges)}))
    return drafts


def _apply_extra_op(g: ReebGraph, op: ExtraOp) -> ReebGraph:
    """Replay one structural step of a plan."""
    p = op.payload
    if op.kind == "reflect":
        return g.modified(
            reattach={eid: (g.edge(eid).dst, g.edge(eid).src) for eid in p["edges"]}
        )
    if op.kind == "splice_b1":
        return g.modified(
            remove_edges=[p["bridge"]],
            add_vertices=[p["vertex"], p["fork"]],
            add_edges=[tuple(p["pendant"]), tuple(p["arm1"]), tuple(p["arm2"])],
        )
    if op.kind == "splice_b2":
        return g.modified(
            remove_edges=[t[0] for t in p["added"]],
            add_vertices=list(p["vertices"]),
            add_edges=[tuple(t) for t in p["edges"]],
        )
    if op.kind == "collapse":
        gadget = GadgetRecord(
            p["vertex"], tuple(p["spine"]), tuple(p["chain"]), p["entry"], p["exit"]
        )
        return contract_gadgets(g, ExpansionRecord((gadget,)))
    raise ValueError(f"unknown extra operation kind {op.kind!r}")


class _PlanBuilder:
    """Records a deconstruction and emits it backwards as a plan.

    Moves are inverted segment by segment (a surgery starts a new segment,
    since move inversion cannot cross it); each surgery's undo drafts are
    emitted at the position the replay will reach its segment boundary.
    """

    def __init__(self, g: ReebGraph):
        self.g = g
        self._segments: list[tuple[ReebGraph, list[MoveInstance]]] = [(g, [])]
        self._drafts: list[tuple[int, list[tuple[str, dict]]]] = []
        self._count = 0

    def do(self, m: MoveInstance) -> None:
        self.g = apply_move(self.g, m)
        self._segments[-1][1].append(m)
        self._count += 1

    def do_all(self, steps: Iterable[MoveInstance]) -> None:
        for m in steps:
            self.do(m)

    def record(self, drafts: list[tuple[str, dict]]) -> None:
        if drafts:
            self._drafts.append((self._count, drafts))

    def surgery(self, drafts: list[tuple[str, dict]], result: ReebGraph) -> None:
        self.record(drafts)
        self.g = result
        self._segments.append((result, []))

    def finish(self, target: ReebGraph) -> Plan:
        steps: list[MoveInstance] = []
        for start, moves in reversed(self._segments):
            steps.extend(invert(start, tuple(moves)))
        ops: list[ExtraOp] = []
        for position, drafts in reversed(self._drafts):
            for kind, payload in drafts:
                ops.append(ExtraOp(kind=kind, at=self._count - position, payload=payload))
        return Plan(start=self.g, steps=tuple(steps), extra_ops=tuple(ops), target=target)


def _cancel_leaf(builder: _PlanBuilder, leaf: str) -> bool:
    """Cancel a leaf against its fork with a single move, if the fork
    opens toward the leaf."""
    g = builder.g
    if g.outdeg(leaf) == 1:
        pendant = g.out_edges(leaf)[0]
        fork = pendant.dst
        if degree_profile(g, fork) != (2, 1):
            return False
        other = next(e for e in g.in_edges(fork) if e.id != pendant.id)
        builder.do(
            MoveInstance.make(
                "M8",
                min=leaf,
                fork=fork,
                stem=pendant.id,
                context_in=other.id,
                out=g.out_edges(fork)[0].id,
            )
        )
    else:
        pendant = g.in_edges(leaf)[0]
        fork = pendant.src
        if degree_profile(g, fork) != (1, 2):
            return False
        other = next(e for e in g.out_edges(fork) if e.id != pendant.id)
        builder.do(
            MoveInstance.make(
                "M9",
                max=leaf,
                fork=fork,
                stem=pendant.id,
                context_out=other.id,
                **{"in": g.in_edges(fork)[0].id},
            )
        )
    return True


def _reduce_one_leaf(builder: _PlanBuilder, leaves: Sequence[str]) -> None:
    """Remove one leaf, preferring the cheapest applicable case."""
    g = builder.g
    for leaf in leaves:
        if _cancel_leaf(builder, leaf):
            return
    for leaf in leaves:
        edge = g.out_edges(leaf)[0] if g.outdeg(leaf) == 1 else g.in_edges(leaf)[0]
        fork = edge.dst if g.outdeg(leaf) == 1 else edge.src
        if _components_without(g, fork) == 3:
            spliced, rec = splice_b1(g, leaf, fork)
            builder.surgery(_splice_b1_drafts(rec), spliced)
            builder.do_all(primitivize(builder.g).steps)
            return

    # Every leaf needs the full frame.  Work above a maximum: descend from
    # its fork to a minimum, straighten the walk into the frame, and run
    # exchange rounds until the outer strands part or a one-sided route
    # remains.
    peak = next(u for u in leaves if g.indeg(u) == 1)
    vs, es = _descend_to_min(g, g.in_edges(peak)[0].src)
    low = vs[0]
    roles = _straighten_descent(builder, vs, es)
    leftover = _run_rounds(builder, roles)
    g = builder.g
    if leftover is None:
        foot = g.edge(roles["out_strand"]).dst
        head = g.edge(roles["in_strand"]).src
        # The separated frame admits a leveling with its high side entirely
        # below its low side; exercised here on synthesized levels even
        # though the surgery below never reads them.
        relevel_below(synthesize_levels(g), head, foot)
        spliced, rec2 = splice_b2(g, peak, roles["merge"], low, roles["split"])
        builder.surgery(_splice_b2_drafts(rec2), spliced)
    else:
        foot = g.edge(roles["out_strand"]).dst
        verts = [foot] + [e.dst for e in leftover]
        if all(degree_profile(g, u) == (1, 2) for u in verts):
            fork = _sink_splits(builder, roles, leftover, verts)
            spliced, rec1 = splice_b1(builder.g, low, fork)
        else:
            fork = _raise_merges(builder, roles, leftover, verts)
            spliced, rec1 = splice_b1(builder.g, peak, fork)
        builder.surgery(_splice_b1_drafts(rec1), spliced)
    builder.do_all(primitivize(builder.g).steps)


def _down_chain(g: ReebGraph) -> list[str]:
    """The DownForks in their chain order above the unique minimum."""
    root = next(u for u in g.vertices if degree_profile(g, u) == (0, 1))
    chain: list[str] = []
    cur = g.out_edges(root)[0].dst
    while degree_profile(g, cur) == (1, 2):
        chain.append(cur)
        nxt = [e.dst for e in g.out_edges(cur) if degree_profile(g, e.dst) == (1, 2)]
        if not nxt:
            break
        cur = nxt[0]
    return chain


def _comb(builder: _PlanBuilder) -> None:
    """Reshape a two-leaf primitive graph into the initial staircase.

    Three passes of fork exchanges: make the DownForks a chain, make the
    UpForks a chain, then sort the DownForks so each one's chord lands on
    its own UpFork and the top pair closes the lobe.
    """

    def split_parent(g: ReebGraph, u: str) -> str:
        return g.in_edges(u)[0].src

    def merge_parent(g: ReebGraph, u: str) -> str:
        return g.out_edges(u)[0].dst

    def depth(g: ReebGraph, u: str, parent, kind) -> int:
        d = 0
        while degree_profile(g, u) == kind:
            u = parent(g, u)
            d += 1
        return d

    while True:
        g = builder.g
        branches = [
            u
            for u in g.vertices
            if degree_profile(g, u) == (1, 2)
            and all(degree_profile(g, e.dst) == (1, 2) for e in g.out_edges(u))
        ]
        if not branches:
            break
        gauge = (len(branches), -max(depth(g, u, split_parent, (1, 2)) for u in branches))
        pick = sorted(branches, key=lambda u: (-depth(g, u, split_parent, (1, 2)), u))[0]
        kid = min(e.dst for e in g.out_edges(pick))
        carry = min(
            e.id for e in g.out_edges(kid) if degree_profile(g, e.dst) != (1, 2)
        )
        builder.do(_drop(g, pick, kid, carry))
        g = builder.g
        after = [
            u
            for u in g.vertices
            if degree_profile(g, u) == (1, 2)
            and all(degree_profile(g, e.dst) == (1, 2) for e in g.out_edges(u))
        ]
        assert not after or (
            len(after),
            -max(depth(g, u, split_parent, (1, 2)) for u in after),
        ) < gauge

    while True:
        g = builder.g
        branches = [
            u
            for u in g.vertices
            if degree_profile(g, u) == (2, 1)
            and all(degree_profile(g, e.src) == (2, 1) for e in g.in_edges(u))
        ]
        if not branches:
            break
        gauge = (len(branches), -max(depth(g, u, merge_parent, (2, 1)) for u in branches))
        pick = sorted(branches, key=lambda u: (-depth(g, u, merge_parent, (2, 1)), u))[0]
        kid = min(e.src for e in g.in_edges(pick))
        carry = min(
            e.id for e in g.in_edges(kid) if degree_profile(g, e.src) != (2, 1)
        )
        builder.do(_climb(g, kid, pick, carry))
        g = builder.g
        after = [
            u
            for u in g.vertices
            if degree_profile(g, u) == (2, 1)
            and all(degree_profile(g, e.src) == (2, 1) for e in g.in_edges(u))
        ]
        assert not after or (
            len(after),
            -max(depth(g, u, merge_parent, (2, 1)) for u in after),
        ) < gauge

    g = builder.g
    cycles = betti(g)
    if cycles >= 1:
        peak = next(u for u in g.vertices if degree_profile(g, u) == (1, 0))
        rails: list[str] = [g.in_edges(peak)[0].src]
        while True:
            ups = [
                e.src
                for e in g.in_edges(rails[-1])
                if degree_profile(g, e.src) == (2, 1)
            ]
            if not ups:
                break
            rails.append(ups[0])
        assert len(rails) == cycles
        for i in range(cycles - 1):
            while True:
                g = builder.g
                chain = _down_chain(g)
                assert len(chain) == cycles
                spot = next(
                    j
                    for j in range(i, cycles)
                    for e in g.out_edges(chain[j])
                    if e.dst == rails[i]
                )
                if spot == i:
                    break
                chord = next(
                    e for e in g.out_edges(chain[spot]) if e.dst == rails[i]
                )
                builder.do(_drop(g, chain[spot - 1], chain[spot], chord.id))


def realize(target: ReebGraph, budget: int) -> Plan:
    """Produce a plan that builds the target from the initial staircase.

    Raises BudgetExceeded when the target's cycle count is above budget
    and NotGoodOrientation for an unusable target.  The plan starts at an
    initial-form graph with the same cycle count, its moves are all legal
    in the stated direction, and replaying it (see :func:`check_plan`)
    lands on the target up to smooth isomorphism.
    """
    require_good_orientation(target)
    cycles = betti(target)
    if cycles > budget:
        raise BudgetExceeded(
            f"target closes {cycles} cycles, the budget allows {budget}"
        )
    expansion = expand_high_degree(target.without_levels())
    builder = _PlanBuilder(smooth(expansion.graph))
    if expansion.record.gadgets:
        builder.record(
            [
                (
                    "collapse",
                    {
                        "vertex": gd.vertex,
                        "spine": list(gd.spine),
                        "chain": list(gd.chain),
                        "entry": gd.entry,
                        "exit": gd.exit,
                    },
                )
                for gd in expansion.record.gadgets
            ]
        )
    builder.do_all(primitivize(builder.g).steps)

    while True:
        g = builder.g
        leveled = synthesize_levels(g)
        leaves = sorted(
            (u for u in g.vertices if g.degree(u) == 1),
            key=lambda u: (leveled.level(u), 0 if g.outdeg(u) == 1 else 1, u),
        )
        if len(leaves) <= 2:
            break
        gauge = (len(leaves), g.n_vertices)
        _reduce_one_leaf(builder, leaves)
        g = builder.g
        assert (sum(1 for u in g.vertices if g.degree(u) == 1), g.n_vertices) < gauge

    _comb(builder)
    assert is_initial_form(builder.g)
    plan = builder.finish(target)
    assert check_plan(plan) is None
    return plan


def check_plan(plan: Plan) -> Optional[str]:
    """Replay a plan and describe the first defect, or None when it holds.

    A sound plan starts at an initial-form graph of the target's cycle
    count, all its moves apply in stated, legal directions, its extra
    operations replay cleanly at their positions, and the result is
    smooth-isomorphic to the target.
    """
    if not is_initial_form(plan.start):
        return "the start graph is not in initial form"
    if betti(plan.start) != betti(plan.target):
        return (
            f"cycle count mismatch: start closes {betti(plan.start)}, "
            f"target closes {betti(plan.target)}"
        )
    n = len(plan.steps)
    for op in plan.extra_ops:
        if not isinstance(op.at, int) or not 0 <= op.at <= n:
            return f"extra operation position {op.at!r} lies outside 0..{n}"
    g = plan.start
    for i in range(n + 1):
        for op in plan.extra_ops:
            if op.at != i:
                continue
            try:
                g = _apply_extra_op(g, op)
            except (ReebError, KeyError, ValueError, TypeError) as exc:
                return f"extra operation {op.kind!r} at {i}: {exc}"
        if i == n:
            break
        step = plan.steps[i]
        if step.direction == REVERSE and step.kind not in TWO_SIDED:
            return f"step {i}: {step.kind} cannot be taken in reverse"
        try:
            g = apply_move(g, step)
        except ReebError as exc:
            return f"step {i}: {exc}"
    if iso_oriented(smooth(g), smooth(plan.target)) is None:
        return "the replayed graph is not isomorphic to the target"
    return None


def verify_plan(plan: Plan) -> bool:
    """True exactly when :func:`check_plan` finds nothing wrong."""
    return check_plan(plan) is None
