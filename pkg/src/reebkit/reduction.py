"""Normal-form pipelines: one extremum of each kind, canonical loop vine,
cycle dropping, and fork reordering.

Every function returns the rewritten graph together with the full move
trace that produced it, so callers can replay or audit the reduction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import BadVertex, GadgetBroken, NotSmoothed, SiteStale, TargetTooLarge
from .graph import (
    ReebGraph,
    betti,
    degree_profile,
    fresh_ids,
    is_canonical_form,
    is_primitive,
)
from .moves import REVERSE, MoveInstance, Trace, apply_move

__all__ = [
    "ExpansionRecord",
    "ExpansionResult",
    "GadgetRecord",
    "ReductionResult",
    "canonicalize",
    "contract_gadgets",
    "drop_cycles",
    "expand_high_degree",
    "primitivize",
    "to_one_min_max",
]


@dataclass(frozen=True)
class ReductionResult:
    graph: ReebGraph
    steps: Trace


class _Runner:
    """Accumulates moves while keeping the current graph on hand."""

    def __init__(self, g: ReebGraph):
        self.g = g
        self.steps: list[MoveInstance] = []

    def do(self, m: MoveInstance) -> None:
        self.g = apply_move(self.g, m)
        self.steps.append(m)

    def result(self) -> ReductionResult:
        return ReductionResult(self.g, tuple(self.steps))


# ---------------------------------------------------------------------------
# two vertex-disjoint extremum paths (node-split max flow, tiny scale)
# ---------------------------------------------------------------------------

_S = ("#source", "")
_T = ("#sink", "")


def _two_disjoint_paths(g: ReebGraph, v: str, to_minima: bool) -> list[list[str]] | None:
    """Two vertex-disjoint descending paths from v's in-neighbourhood to
    distinct minima (or ascending to distinct maxima when to_minima is
    False).

    Each path is the vertex sequence [neighbour of v, ..., extremum].
    Returns None when no disjoint pair exists.
    """
    prof = (0, 1) if to_minima else (1, 0)
    targets = [x for x in g.vertices if degree_profile(g, x) == prof]
    if len(targets) < 2:
        return None

    # arcs carry flow from the extrema toward v; unit node capacities via
    # the usual in/out splitting, so paths share no vertex but v
    residual: dict[tuple, dict[tuple, int]] = {}

    def arc(a: tuple, b: tuple) -> None:
        residual.setdefault(a, {})
        residual.setdefault(b, {})
        residual[a][b] = residual[a].get(b, 0) + 1
        residual[b].setdefault(a, 0)

    for t in targets:
        arc(_S, (t, "i"))
    for x in g.vertices:
        if x != v:
            arc((x, "i"), (x, "o"))
    for e in g.edges:
        near, far = (e.src, e.dst) if to_minima else (e.dst, e.src)
        # "near" is the endpoint closer to v in walking order
        if near == v:
            continue
        if far == v:
            arc((near, "o"), _T)
        else:
            arc((near, "o"), (far, "i"))

    flow: dict[tuple[tuple, tuple], int] = {}
    pushed = 0
    while pushed < 2:
        prev: dict[tuple, tuple] = {_S: _S}
        q = deque([_S])
        while q and _T not in prev:
            a = q.popleft()
            for b, c in residual[a].items():
                if c > 0 and b not in prev:
                    prev[b] = a
                    q.append(b)
        if _T not in prev:
            return None
        b = _T
        while b != _S:
            a = prev[b]
            residual[a][b] -= 1
            residual[b][a] += 1
            flow[(a, b)] = flow.get((a, b), 0) + 1
            # pushing against an existing unit cancels it instead
            if flow.get((b, a), 0) > 0:
                flow[(b, a)] -= 1
                flow[(a, b)] -= 1
            b = a
        pushed += 1

    paths: list[list[str]] = []
    for _ in range(2):
        seq: list[tuple] = []
        node = _S
        while node != _T:
            nxt = next(b for (a, b), units in flow.items() if a == node and units > 0)
            flow[(node, nxt)] -= 1
            seq.append(nxt)
            node = nxt
        names = [x for x, tag in seq[:-1] if tag == "i"]
        names.reverse()  # neighbour of v first, extremum last
        paths.append(names)
    return paths


def _class_rank(g: ReebGraph, x: str, minima_side: bool) -> int:
    """Preference order for which strand to advance along: cancel an
    extremum first, then slide past regulars, like forks, unlike forks."""
    prof = degree_profile(g, x)
    if minima_side:
        order = {(0, 1): 0, (1, 1): 1, (2, 1): 2, (1, 2): 3}
    else:
        order = {(1, 0): 0, (1, 1): 1, (1, 2): 2, (2, 1): 3}
    return order[prof]


def _m4_sigma(g: ReebGraph, lower: str, upper: str, keep_edge: str,
              mid: str) -> MoveInstance:
    """M4 instance where the swapped-down upper fork keeps keep_edge plus
    its own old strand; the lower fork's other in-strand climbs."""
    s1 = next(e.id for e in g.in_edges(upper) if e.id != mid)
    s2, s3 = sorted(e.id for e in g.in_edges(lower))
    up_pos = 2 if s2 != keep_edge else 3
    kept = sorted(x for x in (1, 2, 3) if x != up_pos)
    return MoveInstance.make("M4", sigma=(up_pos, kept[0], kept[1]),
                             lower=lower, upper=upper, s1=s1, s2=s2, s3=s3)


def _m5_sigma(g: ReebGraph, lower: str, upper: str, keep_edge: str,
              mid: str) -> MoveInstance:
    s1 = next(e.id for e in g.out_edges(lower) if e.id != mid)
    s2, s3 = sorted(e.id for e in g.out_edges(upper))
    down_pos = 2 if s2 != keep_edge else 3
    kept = sorted(x for x in (1, 2, 3) if x != down_pos)
    return MoveInstance.make("M5", sigma=(down_pos, kept[0], kept[1]),
                             lower=lower, upper=upper, s1=s1, s2=s2, s3=s3)


def _merge_one_minimum(run: _Runner) -> None:
    """One cancellation round: pick an UpFork fed by two disjoint flows
    from distinct minima and walk it down one of them until M8 fires."""
    g = run.g
    v = next(u for u in g.vertices if degree_profile(g, u) == (2, 1)
             and _two_disjoint_paths(g, u, to_minima=True))
    paths = _two_disjoint_paths(g, v, to_minima=True)
    assert paths is not None
    # match each path to the in-edge it starts under
    e_of = {}
    for p in paths:
        e_of[id(p)] = next(e.id for e in g.in_edges(v)
                           if e.src == p[0] and e.id not in e_of.values())

    while True:
        g = run.g
        order = sorted(paths, key=lambda p: (_class_rank(g, p[0], True), p[0]))
        stepped = False
        for path in order:
            p = path[0]
            e_mine = e_of[id(path)]
            other = paths[0] if path is paths[1] else paths[1]
            e_other = e_of[id(other)]
            prof = degree_profile(g, p)
            if prof == (0, 1):
                run.do(MoveInstance.make(
                    "M8", min=p, fork=v, stem=e_mine, context_in=e_other,
                    out=g.out_edges(v)[0].id))
                return
            if prof == (1, 1):
                new_port = g.in_edges(p)[0].id
                run.do(MoveInstance.make("M2", fork=v, regular=p))
            elif prof == (2, 1):
                cont = min(e.id for e in g.in_edges(p) if e.src == path[1])
                new_port = cont
                run.do(_m4_sigma(g, p, v, keep_edge=cont, mid=e_mine))
            else:
                new_port = g.in_edges(p)[0].id
                try:
                    run.do(MoveInstance.make("M6", down=p, up=v))
                except SiteStale:
                    continue  # alternative climb exists; the other strand works
            e_of[id(path)] = new_port
            path.pop(0)
            stepped = True
            break
        assert stepped, "descent invariant broken: no strand admits a move"


def _merge_one_maximum(run: _Runner) -> None:
    g = run.g
    w = next(d for d in g.vertices if degree_profile(g, d) == (1, 2)
             and _two_disjoint_paths(g, d, to_minima=False))
    paths = _two_disjoint_paths(g, w, to_minima=False)
    assert paths is not None
    e_of = {}
    for p in paths:
        e_of[id(p)] = next(e.id for e in g.out_edges(w)
                           if e.dst == p[0] and e.id not in e_of.values())

    while True:
        g = run.g
        order = sorted(paths, key=lambda p: (_class_rank(g, p[0], False), p[0]))
        stepped = False
        for path in order:
            t = path[0]
            e_mine = e_of[id(path)]
            other = paths[0] if path is paths[1] else paths[1]
            e_other = e_of[id(other)]
            prof = degree_profile(g, t)
            if prof == (1, 0):
                run.do(MoveInstance.make(
                    "M9", max=t, fork=w, stem=e_mine, context_out=e_other,
                    **{"in": g.in_edges(w)[0].id}))
                return
            if prof == (1, 1):
                new_port = g.out_edges(t)[0].id
                run.do(MoveInstance.make("M3", fork=w, regular=t))
            elif prof == (1, 2):
                cont = min(e.id for e in g.out_edges(t) if e.dst == path[1])
                new_port = cont
                run.do(_m5_sigma(g, w, t, keep_edge=cont, mid=e_mine))
            else:
                new_port = g.out_edges(t)[0].id
                try:
                    run.do(MoveInstance.make("M6", down=w, up=t))
                except SiteStale:
                    continue
            e_of[id(path)] = new_port
            path.pop(0)
            stepped = True
            break
        assert stepped, "ascent invariant broken: no strand admits a move"


def to_one_min_max(g: ReebGraph) -> ReductionResult:
    """Cancel extrema pairwise until exactly one minimum and one maximum
    remain.  Pure forward moves; the first Betti number is untouched."""
    run = _Runner(g)
    while sum(1 for x in run.g.vertices
              if degree_profile(run.g, x) == (0, 1)) > 1:
        _merge_one_minimum(run)
    while sum(1 for x in run.g.vertices
              if degree_profile(run.g, x) == (1, 0)) > 1:
        _merge_one_maximum(run)
    return run.result()


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


def _the_minimum(g: ReebGraph) -> str:
    return next(x for x in g.vertices if degree_profile(g, x) == (0, 1))


def _trunk_pack(g: ReebGraph) -> set[str]:
    """The maximal regular chain sitting directly above the minimum."""
    pack: set[str] = set()
    cur = g.out_edges(_the_minimum(g))[0].dst
    while degree_profile(g, cur) == (1, 1):
        pack.add(cur)
        cur = g.out_edges(cur)[0].dst
    return pack


def _pack_regulars(run: _Runner) -> None:
    """Walk every regular vertex down fork by fork until it joins the
    chain above the single minimum."""
    while True:
        g = run.g
        pack = _trunk_pack(g)
        loose = [x for x in g.vertices
                 if degree_profile(g, x) == (1, 1) and x not in pack]
        if not loose:
            return
        # lowest first so nothing ever needs to squeeze past another regular
        anc_counts = {x: len(g.ancestors(x)) for x in loose}
        r = min(loose, key=lambda x: (anc_counts[x], x))
        q = g.in_edges(r)[0].src
        qprof = degree_profile(g, q)
        if qprof == (2, 1):
            land = min(e.id for e in g.in_edges(q))
            run.do(MoveInstance.make("M2p", fork=q, regular=r, land=land))
        elif qprof == (1, 2):
            run.do(MoveInstance.make("M3", fork=q, regular=r))
        else:
            raise AssertionError(
                f"loose regular {r!r} sits above {qprof}, which packing "
                "should have made impossible")


def _is_below(g: ReebGraph, a: str, b: str) -> bool:
    return b in g.descendants(a)


def _tighten_to_bigon(run: _Runner, v: str) -> str:
    """Slide UpFork v down its two in-chains until both in-edges leave a
    single DownFork; returns that bigon partner."""
    while True:
        g = run.g
        srcs = sorted({e.src for e in g.in_edges(v)})
        if len(srcs) == 1:
            return srcs[0]
        p1, p2 = srcs
        if _is_below(g, p1, p2):
            pick = p2      # past the higher one; the lower one blocks it
        elif _is_below(g, p2, p1):
            pick = p1
        else:
            pick = p1
        run.do(MoveInstance.make("M6", down=pick, up=v))


def _hoist_until_home(run: _Runner, w: str, v: str) -> None:
    """Move the w=>v bigon down past every DownFork under it, by opening
    the bigon one rung (M5) and closing it again one level lower (M6)."""
    while True:
        g = run.g
        u = g.in_edges(w)[0].src
        if degree_profile(g, u) != (1, 2):
            return
        bigon1, bigon2 = sorted(e.id for e in g.in_edges(v))
        mid = next(e.id for e in g.out_edges(u) if e.dst == w)
        # open the pair: u rises holding bigon2, w keeps bigon1 below it
        run.do(_m5_sigma(g, u, w, keep_edge=bigon2, mid=mid))
        # then close it one rung lower by sliding u above the UpFork
        run.do(MoveInstance.make("M6", down=u, up=v))


def canonicalize(g: ReebGraph) -> ReductionResult:
    """Rewrite to the reference shape: one minimum, one maximum, all
    regular vertices stacked above the minimum, and every independent
    cycle realized as a parallel pair in a single vertical vine."""
    run = _Runner(g)
    first = to_one_min_max(g)
    run.g = first.graph
    run.steps = list(first.steps)
    _pack_regulars(run)

    done: set[str] = set()
    while True:
        g2 = run.g
        todo = [x for x in g2.vertices
                if degree_profile(g2, x) == (2, 1) and x not in done]
        if not todo:
            break
        v = min((x for x in todo
                 if not any(y != x and _is_below(g2, y, x) for y in todo)),
                default=None, key=str)
        assert v is not None
        w = _tighten_to_bigon(run, v)
        _hoist_until_home(run, w, v)
        done.add(v)
    assert is_canonical_form(run.g), "vine construction left a non-canonical shape"
    return run.result()


# ---------------------------------------------------------------------------
# cycle dropping
# ---------------------------------------------------------------------------


def drop_cycles(g: ReebGraph, target_betti: int) -> ReductionResult:
    """Canonicalize, then collapse parallel pairs top-down until the first
    Betti number reaches the target."""
    if target_betti < 0 or target_betti > betti(g):
        raise TargetTooLarge(
            f"cannot reach betti {target_betti} from {betti(g)}: moves only "
            "ever remove cycles")
    run = _Runner(g)
    base = canonicalize(g)
    run.g = base.graph
    run.steps = list(base.steps)
    while betti(run.g) > target_betti:
        cur = run.g
        bigons = [
            (d, outs[0].dst)
            for d in cur.vertices
            if degree_profile(cur, d) == (1, 2)
            and (outs := cur.out_edges(d))[0].dst == outs[1].dst
        ]
        d, u = max(bigons, key=lambda du: (len(cur.ancestors(du[0])), du[0]))
        keep, drop = sorted(e.id for e in cur.out_edges(d))
        run.do(MoveInstance.make("M7", down=d, up=u, keep=keep, drop=drop))
    assert is_canonical_form(run.g)
    return run.result()


# ---------------------------------------------------------------------------
# primitive reordering
# ---------------------------------------------------------------------------


def _violating_upforks(g: ReebGraph) -> list[str]:
    out = []
    for x in g.vertices:
        if degree_profile(g, x) != (2, 1):
            continue
        if any(degree_profile(g, y) == (1, 2) for y in g.descendants(x)):
            out.append(x)
    return out


def primitivize(g: ReebGraph) -> ReductionResult:
    """Raise every UpFork above every DownFork (planner-context M6 only).

    The graph must already be smooth: a regular vertex sitting between
    the forks has no move that clears it here.
    """
    run = _Runner(g)
    guard = 0
    while True:
        bad = _violating_upforks(run.g)
        if not bad:
            break
        guard += 1
        assert guard <= g.n_vertices * g.n_vertices, "campaign count exploded"
        g2 = run.g
        u = max((x for x in bad
                 if not any(y != x and _is_below(g2, x, y) for y in bad)),
                key=str)
        while True:
            g2 = run.g
            t = g2.out_edges(u)[0].dst
            tprof = degree_profile(g2, t)
            if tprof == (1, 1):
                raise NotSmoothed(
                    f"regular vertex {t!r} blocks the fork reordering; "
                    "smooth the graph first")
            if tprof != (1, 2):
                break
            drop_in = min(e.id for e in g2.in_edges(u))
            keep_out = min(e.id for e in g2.out_edges(t))
            run.do(MoveInstance.make("M6", REVERSE, planner_ctx=True, up=u,
                                     down=t, drop_in=drop_in, keep_out=keep_out))
    assert is_primitive(run.g)
    return run.result()


# ---------------------------------------------------------------------------
# high-degree vertex expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GadgetRecord:
    """One expanded vertex: the chain that stands in for it.

    ``spine`` lists the substitute vertices bottom to top and ``chain`` the
    edges joining consecutive spine vertices.  ``entry``/``exit`` are the
    pre-existing edges that feed the bottom and leave the top.
    """

    vertex: str
    spine: tuple[str, ...]
    chain: tuple[str, ...]
    entry: str
    exit: str


@dataclass(frozen=True)
class ExpansionRecord:
    gadgets: tuple[GadgetRecord, ...]


@dataclass(frozen=True)
class ExpansionResult:
    graph: ReebGraph
    record: ExpansionRecord


def expand_high_degree(g: ReebGraph) -> ExpansionResult:
    """Replace every vertex of degree >= 4 by a fork chain of equal degree.

    A vertex with i in-edges and o out-edges becomes a monotone chain: the
    entry in-edge at the bottom, o - 1 DownForks each shedding one of the
    remaining out-edges, then i - 1 UpForks each absorbing one of the
    remaining in-edges, then the exit out-edge.  The chain is a tree, so
    the cycle count is untouched, and contracting it recovers the original
    vertex.  Edges keep their ids throughout; the record lists each chain
    so :func:`contract_gadgets` can undo the surgery.

    Raises BadVertex for a vertex of degree >= 2 with no in-edges or no
    out-edges; no orientation-respecting chain exists for it.
    """
    for v in g.vertices:
        ins, outs = len(g.in_edges(v)), len(g.out_edges(v))
        if ins + outs >= 2 and (ins == 0 or outs == 0):
            raise BadVertex(
                f"vertex {v!r} has degree {ins + outs} but only "
                f"{'out' if ins == 0 else 'in'}-edges; it cannot be expanded"
            )
    work = g
    gadgets: list[GadgetRecord] = []
    for v in sorted(x for x in g.vertices if len(g.in_edges(x)) + len(g.out_edges(x)) >= 4):
        ins = sorted(e.id for e in work.in_edges(v))
        outs = sorted(e.id for e in work.out_edges(v))
        entry, absorbed = ins[0], ins[1:]
        exit_, shed = outs[0], outs[1:]
        m = len(absorbed) + len(shed)
        names = fresh_ids(work, 2 * m - 1)
        spine, chain = names[:m], names[m:]
        reattach: dict[str, tuple[str, str]] = {}
        reattach[entry] = (work.edge(entry).src, spine[0])
        reattach[exit_] = (spine[-1], work.edge(exit_).dst)
        for j, eid in enumerate(shed):
            reattach[eid] = (spine[j], work.edge(eid).dst)
        for j, eid in enumerate(absorbed):
            reattach[eid] = (work.edge(eid).src, spine[len(shed) + j])
        work = work.modified(
            remove_vertices=[v],
            add_vertices=spine,
            add_edges=[(chain[j], spine[j], spine[j + 1]) for j in range(m - 1)],
            reattach=reattach,
        )
        gadgets.append(GadgetRecord(vertex=v, spine=tuple(spine),
                                    chain=tuple(chain), entry=entry, exit=exit_))
    return ExpansionResult(work, ExpansionRecord(tuple(gadgets)))


def _contract_one(g: ReebGraph, gadget: GadgetRecord) -> ReebGraph:
    spine = set(gadget.spine)
    for x in gadget.spine:
        if not g.has_vertex(x):
            raise GadgetBroken(f"spine vertex {x!r} is gone")
    for j, eid in enumerate(gadget.chain):
        if not g.has_edge(eid):
            raise GadgetBroken(f"chain edge {eid!r} is gone")
        e = g.edge(eid)
        if (e.src, e.dst) != (gadget.spine[j], gadget.spine[j + 1]):
            raise GadgetBroken(
                f"chain edge {eid!r} runs {e.src!r}->{e.dst!r}, expected "
                f"{gadget.spine[j]!r}->{gadget.spine[j + 1]!r}")
    if g.has_vertex(gadget.vertex):
        raise GadgetBroken(f"vertex id {gadget.vertex!r} is already taken")
    chain = set(gadget.chain)
    reattach: dict[str, tuple[str, str]] = {}
    for e in g.edges:
        if e.id in chain:
            continue
        if e.src in spine and e.dst in spine:
            raise GadgetBroken(f"edge {e.id!r} re-enters the chain; "
                               "contracting it would make a loop")
        if e.src in spine:
            reattach[e.id] = (gadget.vertex, e.dst)
        elif e.dst in spine:
            reattach[e.id] = (e.src, gadget.vertex)
    return g.modified(
        remove_vertices=gadget.spine,
        remove_edges=gadget.chain,
        add_vertices=[gadget.vertex],
        reattach=reattach,
    )


def contract_gadgets(g: ReebGraph, record: ExpansionRecord) -> ReebGraph:
    """Collapse each recorded chain back to its original vertex.

    The inverse of :func:`expand_high_degree`: every spine and its chain
    edges must still be present and intact; the boundary edges may have
    been moved around, they are simply reattached to the restored vertex.
    Raises GadgetBroken when a record no longer matches the graph.
    """
    work = g
    for gadget in record.gadgets:
        work = _contract_one(work, gadget)
    return work
