"""Core data model: connected directed multigraphs with a good orientation.

The central type is :class:`ReebGraph`, an immutable connected directed
multigraph whose vertices may carry exact rational levels and marker flags.
A *good orientation* means: no self-loops, no directed cycles, and every
vertex either has total degree one or has at least one incoming and one
outgoing edge.  Vertices of such graphs fall into five classes (minima,
maxima, regular points, and the two fork shapes), and the whole package is
about rewriting these graphs while preserving that structure.

Everything here is deterministic: vertex and edge tuples are kept sorted by
id, and every algorithm breaks ties by string comparison on ids.
"""

from __future__ import annotations

import enum
import heapq
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import (
    DanglingReference,
    Disconnected,
    NotGoodOrientation,
    NotSmoothed,
    UnsupportedDegree,
)

__all__ = [
    "Edge",
    "ReebGraph",
    "SubgraphView",
    "VertexClass",
    "betti",
    "canonical_graph",
    "classify",
    "counting_identities",
    "degree_profile",
    "fresh_ids",
    "initial_graph",
    "is_below",
    "is_branching",
    "is_canonical_form",
    "is_good_orientation",
    "is_initial_form",
    "is_primitive",
    "iso_oriented",
    "ordered_implies_tree_check",
    "path_set_DP",
    "path_set_DP_from",
    "path_set_IP",
    "path_set_IP_from",
    "require_good_orientation",
    "smooth",
    "synthesize_levels",
]


class Edge(NamedTuple):
    id: str
    src: str
    dst: str


class VertexClass(enum.Enum):
    """The five vertex shapes a good orientation allows."""

    Minimum = "Minimum"      # no in, one out
    Maximum = "Maximum"      # one in, no out
    Regular = "Regular"      # one in, one out
    UpFork = "UpFork"        # two in, one out
    DownFork = "DownFork"    # one in, two out


@dataclass(frozen=True)
class SubgraphView:
    """A (possibly empty, possibly disconnected) piece of a graph.

    Path-set operations return these rather than ReebGraphs because the
    union of all monotone paths between two points is rarely a valid graph
    on its own.
    """

    vertices: frozenset[str]
    edges: frozenset[str]

    def __bool__(self) -> bool:
        return bool(self.vertices)


@dataclass(frozen=True)
class ReebGraph:
    """Immutable connected directed multigraph.

    Construct with :meth:`build`, which validates endpoint references,
    connectivity, and (when levels are supplied) strict monotonicity of
    levels along edges.  Self-loops and directed cycles are representable
    so that :func:`is_good_orientation` has something to reject; every
    operation in the package requires a good orientation and says so.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    levels: Optional[tuple[tuple[str, Fraction], ...]] = None
    markers: frozenset[str] = field(default_factory=frozenset)

    # -- construction --------------------------------------------------------

    @staticmethod
    def build(
        vertices: Iterable[str],
        edges: Iterable[tuple[str, str, str]],
        levels: Optional[Mapping[str, Fraction | int]] = None,
        markers: Iterable[str] = (),
    ) -> "ReebGraph":
        vs = tuple(sorted(str(v) for v in vertices))
        if not vs:
            raise ValueError("a graph needs at least one vertex")
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate vertex id")
        vset = set(vs)
        es = tuple(sorted((Edge(str(i), str(s), str(d)) for i, s, d in edges),
                          key=lambda e: e.id))
        if len({e.id for e in es}) != len(es):
            raise ValueError("duplicate edge id")
        for e in es:
            if e.src not in vset:
                raise DanglingReference(f"edge {e.id!r}: unknown source {e.src!r}")
            if e.dst not in vset:
                raise DanglingReference(f"edge {e.id!r}: unknown target {e.dst!r}")

        lv: Optional[tuple[tuple[str, Fraction], ...]] = None
        if levels is not None:
            lmap = {str(k): Fraction(v) for k, v in levels.items()}
            missing = vset - lmap.keys()
            extra = lmap.keys() - vset
            if missing or extra:
                raise ValueError("levels must cover exactly the vertex set")
            for e in es:
                if not lmap[e.src] < lmap[e.dst]:
                    raise ValueError(
                        f"edge {e.id!r}: level({e.src!r}) must be below level({e.dst!r})"
                    )
            lv = tuple(sorted(lmap.items()))

        mk = frozenset(str(m) for m in markers)
        if not mk <= vset:
            raise DanglingReference(f"marker refers to unknown vertex: {sorted(mk - vset)}")

        g = ReebGraph(vs, es, lv, mk)
        g._check_connected()
        return g

    def __post_init__(self) -> None:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        inn: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append(e)
            inn[e.dst].append(e)
        object.__setattr__(self, "_out", {v: tuple(b) for v, b in out.items()})
        object.__setattr__(self, "_in", {v: tuple(b) for v, b in inn.items()})
        object.__setattr__(self, "_by_id", {e.id: e for e in self.edges})
        object.__setattr__(self, "_lvl", dict(self.levels) if self.levels else None)

    def _check_connected(self) -> None:
        seen = {self.vertices[0]}
        queue = deque(seen)
        while queue:
            v = queue.popleft()
            for e in self.out_edges(v):
                if e.dst not in seen:
                    seen.add(e.dst)
                    queue.append(e.dst)
            for e in self.in_edges(v):
                if e.src not in seen:
                    seen.add(e.src)
                    queue.append(e.src)
        if len(seen) != len(self.vertices):
            raise Disconnected(
                f"{len(self.vertices) - len(seen)} vertices unreachable from "
                f"{self.vertices[0]!r}"
            )

    # -- basic queries --------------------------------------------------------

    def out_edges(self, v: str) -> tuple[Edge, ...]:
        return self._out[v]  # type: ignore[attr-defined]

    def in_edges(self, v: str) -> tuple[Edge, ...]:
        return self._in[v]  # type: ignore[attr-defined]

    def edge(self, eid: str) -> Edge:
        try:
            return self._by_id[eid]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"no edge {eid!r}") from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._by_id  # type: ignore[attr-defined]

    def has_vertex(self, v: str) -> bool:
        return v in self._out  # type: ignore[attr-defined]

    def indeg(self, v: str) -> int:
        return len(self.in_edges(v))

    def outdeg(self, v: str) -> int:
        return len(self.out_edges(v))

    def degree(self, v: str) -> int:
        return self.indeg(v) + self.outdeg(v)

    def level(self, v: str) -> Optional[Fraction]:
        lvl = self._lvl  # type: ignore[attr-defined]
        return None if lvl is None else lvl[v]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    # -- derived graphs --------------------------------------------------------

    def modified(
        self,
        *,
        add_vertices: Iterable[str] = (),
        remove_vertices: Iterable[str] = (),
        add_edges: Iterable[tuple[str, str, str]] = (),
        remove_edges: Iterable[str] = (),
        reattach: Optional[Mapping[str, tuple[str, str]]] = None,
        add_markers: Iterable[str] = (),
        remove_markers: Iterable[str] = (),
    ) -> "ReebGraph":
        """Build a new graph from this one. Levels are dropped (surgery does
        not try to preserve them; re-synthesize if needed)."""
        rv = set(remove_vertices)
        re_ = set(remove_edges)
        vs = [v for v in self.vertices if v not in rv]
        vs.extend(add_vertices)
        ra = dict(reattach or {})
        es: list[tuple[str, str, str]] = []
        for e in self.edges:
            if e.id in re_:
                continue
            if e.id in ra:
                s, d = ra.pop(e.id)
                es.append((e.id, s, d))
            else:
                es.append((e.id, e.src, e.dst))
        if ra:
            raise KeyError(f"reattach refers to missing edges: {sorted(ra)}")
        es.extend(add_edges)
        mk = (set(self.markers) - rv - set(remove_markers)) | set(add_markers)
        return ReebGraph.build(vs, es, levels=None, markers=mk)

    def with_levels(self, levels: Mapping[str, Fraction | int]) -> "ReebGraph":
        return ReebGraph.build(self.vertices, self.edges, levels=levels,
                               markers=self.markers)

    def without_levels(self) -> "ReebGraph":
        if self.levels is None:
            return self
        return ReebGraph.build(self.vertices, self.edges, markers=self.markers)

    # -- reachability ----------------------------------------------------------

    def descendants(self, v: str) -> frozenset[str]:
        """All vertices reachable from v by a nonempty directed path.
        On an acyclic graph this never contains v itself."""
        seen: set[str] = set()
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for e in self.out_edges(u):
                if e.dst not in seen:
                    seen.add(e.dst)
                    queue.append(e.dst)
        return frozenset(seen)

    def ancestors(self, v: str) -> frozenset[str]:
        """All vertices strictly below v."""
        seen: set[str] = set()
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for e in self.in_edges(u):
                if e.src not in seen:
                    seen.add(e.src)
                    queue.append(e.src)
        return frozenset(seen)


# -- classification ------------------------------------------------------------


def degree_profile(g: ReebGraph, v: str) -> tuple[int, int]:
    """(indegree, outdegree) of v."""
    return g.indeg(v), g.outdeg(v)


_PROFILES = {
    (0, 1): VertexClass.Minimum,
    (1, 0): VertexClass.Maximum,
    (1, 1): VertexClass.Regular,
    (2, 1): VertexClass.UpFork,
    (1, 2): VertexClass.DownFork,
}


def classify(g: ReebGraph, v: str) -> VertexClass:
    """Class of a vertex in a good orientation.

    Raises UnsupportedDegree for total degree >= 4 and NotGoodOrientation
    for degree patterns no good orientation allows (e.g. two in, no out).
    """
    prof = degree_profile(g, v)
    if sum(prof) >= 4:
        raise UnsupportedDegree(f"vertex {v!r} has degree {sum(prof)}")
    try:
        return _PROFILES[prof]
    except KeyError:
        raise NotGoodOrientation(
            f"vertex {v!r} has in/out profile {prof}, which no good orientation allows"
        ) from None


def _first_bad_vertex(g: ReebGraph) -> Optional[str]:
    for v in g.vertices:
        i, o = g.indeg(v), g.outdeg(v)
        if i + o != 1 and (i == 0 or o == 0):
            return v
    return None


def _topo_order(g: ReebGraph) -> Optional[list[str]]:
    """Deterministic topological order, or None if there is a directed cycle."""
    pending = {v: g.indeg(v) for v in g.vertices}
    ready = [v for v, d in pending.items() if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for e in g.out_edges(v):
            pending[e.dst] -= 1
            if pending[e.dst] == 0:
                heapq.heappush(ready, e.dst)
    return order if len(order) == len(g.vertices) else None


def is_good_orientation(g: ReebGraph) -> bool:
    """True iff g is loop-free, acyclic, and every vertex is a leaf or has
    both an incoming and an outgoing edge.  Connectivity is part of the
    ReebGraph type itself."""
    if any(e.src == e.dst for e in g.edges):
        return False
    if _first_bad_vertex(g) is not None:
        return False
    return _topo_order(g) is not None


def require_good_orientation(g: ReebGraph) -> None:
    if any(e.src == e.dst for e in g.edges):
        loop = next(e for e in g.edges if e.src == e.dst)
        raise NotGoodOrientation(f"edge {loop.id!r} is a self-loop")
    bad = _first_bad_vertex(g)
    if bad is not None:
        raise NotGoodOrientation(
            f"vertex {bad!r} has degree >= 2 but lacks an incoming or outgoing edge"
        )
    if _topo_order(g) is None:
        raise NotGoodOrientation("graph contains a directed cycle")


# -- counting -------------------------------------------------------------------


def betti(g: ReebGraph) -> int:
    """First Betti number of a connected graph: E - V + 1."""
    require_good_orientation(g)
    return g.n_edges - g.n_vertices + 1


def counting_identities(g: ReebGraph) -> dict[str, int]:
    """Degree-profile bookkeeping, computed without touching E - V + 1.

    Returns the number of minima (k0), maxima (kn), UpForks (delta3_in),
    DownForks (delta3_out), their total (delta3), and three independently
    derived values for the first Betti number that must agree with each
    other and with :func:`betti` on every good orientation:

        beta_from_in    = delta3_in  - k0 + 1
        beta_from_out   = delta3_out - kn + 1
        beta_from_total = (delta3 - k0 - kn) / 2 + 1  (total is even)
    """
    require_good_orientation(g)
    k0 = kn = d3i = d3o = 0
    for v in g.vertices:
        c = classify(g, v)
        if c is VertexClass.Minimum:
            k0 += 1
        elif c is VertexClass.Maximum:
            kn += 1
        elif c is VertexClass.UpFork:
            d3i += 1
        elif c is VertexClass.DownFork:
            d3o += 1
    total = d3i + d3o
    # Counting in- and out-degrees separately forces d3i - d3o == k0 - kn,
    # so this difference is always even on a good orientation.
    twice = total - k0 - kn + 2
    assert twice % 2 == 0, "degree bookkeeping violated"
    return {
        "k0": k0,
        "kn": kn,
        "delta3_in": d3i,
        "delta3_out": d3o,
        "delta3": total,
        "beta_from_in": d3i - k0 + 1,
        "beta_from_out": d3o - kn + 1,
        "beta_from_total": twice // 2,
    }


# -- levels -----------------------------------------------------------------------


def synthesize_levels(g: ReebGraph) -> ReebGraph:
    """Attach distinct rational levels respecting the orientation.

    Deterministic: the level of a vertex is its position in the
    smallest-id-first topological order.
    """
    require_good_orientation(g)
    order = _topo_order(g)
    assert order is not None
    return g.with_levels({v: Fraction(i) for i, v in enumerate(order)})


# -- order and path sets ------------------------------------------------------------


def is_below(g: ReebGraph, a: str, b: str) -> bool:
    """True iff there is a directed path from a to b (a strictly below b)."""
    if a == b:
        return False
    return b in g.descendants(a)


def path_set_IP(g: ReebGraph, p: str, q: str) -> SubgraphView:
    """Union of all increasing (directed) paths from p to q.

    Empty when q is not reachable from p; the single vertex p when p == q.
    """
    if p == q:
        return SubgraphView(frozenset({p}), frozenset())
    up = g.descendants(p) | {p}
    down = g.ancestors(q) | {q}
    if q not in up:
        return SubgraphView(frozenset(), frozenset())
    mid = up & down
    eids = frozenset(
        e.id for e in g.edges if e.src in mid and e.dst in mid
    )
    return SubgraphView(frozenset(mid), eids)


def path_set_DP(g: ReebGraph, p: str, q: str) -> SubgraphView:
    """Union of all decreasing paths from p to q (walks against the edges)."""
    return path_set_IP(g, q, p)


def path_set_IP_from(g: ReebGraph, p: str) -> SubgraphView:
    """Everything reachable from p by increasing paths, p included."""
    vs = g.descendants(p) | {p}
    return SubgraphView(frozenset(vs),
                        frozenset(e.id for e in g.edges if e.src in vs and e.dst in vs))


def path_set_DP_from(g: ReebGraph, p: str) -> SubgraphView:
    """Everything reaching p by increasing paths, i.e. p's downward cone."""
    vs = g.ancestors(p) | {p}
    return SubgraphView(frozenset(vs),
                        frozenset(e.id for e in g.edges if e.src in vs and e.dst in vs))


# -- branching ------------------------------------------------------------------------


def is_branching(g: ReebGraph, v: str) -> bool:
    """Whether a fork admits two monotone paths to two distinct leaves that
    share no vertex except v (decreasing paths to minima for an UpFork,
    increasing paths to maxima for a DownFork). Non-forks are never
    branching."""
    require_good_orientation(g)
    cls = classify(g, v)
    if cls is VertexClass.UpFork:
        forward = False
    elif cls is VertexClass.DownFork:
        forward = True
    else:
        return False
    sinks = [u for u in g.vertices
             if classify(g, u) is (VertexClass.Maximum if forward else VertexClass.Minimum)]
    return _vertex_disjoint_flow(g, v, sinks, forward) >= 2


def _vertex_disjoint_flow(g: ReebGraph, src: str, sinks: list[str], forward: bool) -> int:
    """Max number of monotone paths from src to distinct sinks, pairwise
    vertex-disjoint outside src.  Standard node-splitting: every vertex
    except src becomes (v_in -> v_out) with capacity one.  Unit-capacity
    BFS augmentation; at most two augmentations are ever requested."""
    sink_set = set(sinks)
    cap: dict[tuple[str, str], int] = {}

    def add(a: str, b: str) -> None:
        cap[(a, b)] = cap.get((a, b), 0) + 1
        cap.setdefault((b, a), 0)

    SRC, SNK = ("@src", "@snk")
    for v in g.vertices:
        if v != src:
            add(f"{v}:i", f"{v}:o")
    for e in g.edges:
        a, b = (e.src, e.dst) if forward else (e.dst, e.src)
        ta = SRC if a == src else f"{a}:o"
        tb = f"{b}:i"
        if b == src:
            continue
        add(ta, tb)
    for s in sink_set:
        if s != src:
            add(f"{s}:o", SNK)

    adj: dict[str, list[str]] = {}
    for (a, b) in cap:
        adj.setdefault(a, []).append(b)
    for nbrs in adj.values():
        nbrs.sort()

    flow = 0
    while flow < 2:
        parent: dict[str, str] = {SRC: SRC}
        queue = deque([SRC])
        while queue and SNK not in parent:
            x = queue.popleft()
            for y in adj.get(x, ()):
                if y not in parent and cap[(x, y)] > 0:
                    parent[y] = x
                    queue.append(y)
        if SNK not in parent:
            break
        y = SNK
        while y != SRC:
            x = parent[y]
            cap[(x, y)] -= 1
            cap[(y, x)] += 1
            y = x
        flow += 1
    return flow


# -- structural predicates ---------------------------------------------------------------


def is_primitive(g: ReebGraph) -> bool:
    """No UpFork lies strictly below any DownFork."""
    require_good_orientation(g)
    ups = [v for v in g.vertices if degree_profile(g, v) == (2, 1)]
    downs = {v for v in g.vertices if degree_profile(g, v) == (1, 2)}
    for u in ups:
        if g.descendants(u) & downs:
            return False
    return True


def ordered_implies_tree_check(g: ReebGraph) -> bool:
    """Check the implication "ordered => cycle-free" on one graph.

    Ordered means no DownFork lies strictly below any UpFork.  On a good
    orientation the implication always holds, so a False return would
    witness a bug; the acceptance suite sweeps this over whole corpora.
    """
    require_good_orientation(g)
    downs = [v for v in g.vertices if degree_profile(g, v) == (1, 2)]
    ups = {v for v in g.vertices if degree_profile(g, v) == (2, 1)}
    ordered = True
    for d in downs:
        if g.descendants(d) & ups:
            ordered = False
            break
    if not ordered:
        return True
    return betti(g) == 0


# -- smoothing -----------------------------------------------------------------------------


def _smooth_with_map(g: ReebGraph) -> tuple[ReebGraph, dict[str, str]]:
    """Suppress every degree-2 vertex (markers included).

    Returns the smoothed graph plus a map from each suppressed vertex to the
    id of the smoothed edge that swallowed it.  Each maximal chain of
    regular vertices keeps the id of its first edge (the one leaving the
    non-regular tail), so smoothing is idempotent and deterministic.
    """
    require_good_orientation(g)
    regular = {v for v in g.vertices if degree_profile(g, v) == (1, 1)}
    if not regular:
        return g, {}
    host: dict[str, str] = {}
    edges: list[tuple[str, str, str]] = []
    for e in g.edges:
        if e.src in regular or e.dst in regular:
            continue
        edges.append((e.id, e.src, e.dst))
    for v in g.vertices:
        if v in regular:
            continue
        for e in g.out_edges(v):
            if e.dst not in regular:
                continue
            chain = []
            cur = e
            while cur.dst in regular:
                chain.append(cur.dst)
                cur = g.out_edges(cur.dst)[0]
            edges.append((e.id, v, cur.dst))
            for r in chain:
                host[r] = e.id
    vs = [v for v in g.vertices if v not in regular]
    smoothed = ReebGraph.build(vs, edges)
    return smoothed, host


def smooth(g: ReebGraph) -> ReebGraph:
    """Remove all degree-2 vertices, merging their edge chains."""
    return _smooth_with_map(g)[0]


# -- isomorphism ------------------------------------------------------------------------------


def _wl_colors(g: ReebGraph, rounds: int) -> dict[str, int]:
    color = {v: hash(degree_profile(g, v)) & 0xFFFFFFFF for v in g.vertices}
    for _ in range(rounds):
        nxt = {}
        for v in g.vertices:
            ins = tuple(sorted(color[e.src] for e in g.in_edges(v)))
            outs = tuple(sorted(color[e.dst] for e in g.out_edges(v)))
            nxt[v] = hash((color[v], ins, outs)) & 0xFFFFFFFF
        if len(set(nxt.values())) == len(set(color.values())):
            color = nxt
            break
        color = nxt
    return color


def iso_oriented(g1: ReebGraph, g2: ReebGraph) -> Optional[dict[str, str]]:
    """Orientation-preserving isomorphism between two smooth graphs.

    Returns a vertex mapping or None.  Both inputs must be free of
    degree-2 vertices (NotSmoothed otherwise); smooth first if needed.
    """
    for g in (g1, g2):
        bad = next((v for v in g.vertices if degree_profile(g, v) == (1, 1)), None)
        if bad is not None:
            raise NotSmoothed(f"vertex {bad!r} has degree 2; smooth the graph first")
    if g1.n_vertices != g2.n_vertices or g1.n_edges != g2.n_edges:
        return None
    prof1 = sorted(degree_profile(g1, v) for v in g1.vertices)
    prof2 = sorted(degree_profile(g2, v) for v in g2.vertices)
    if prof1 != prof2:
        return None
    rounds = max(2, g1.n_vertices)
    c1 = _wl_colors(g1, rounds)
    c2 = _wl_colors(g2, rounds)
    if sorted(c1.values()) != sorted(c2.values()):
        return None

    # Order g1's vertices rarest color first so the search fails fast.
    hist: dict[int, int] = {}
    for c in c1.values():
        hist[c] = hist.get(c, 0) + 1
    order = sorted(g1.vertices, key=lambda v: (hist[c1[v]], c1[v], v))
    by_color: dict[int, list[str]] = {}
    for v in sorted(g2.vertices):
        by_color.setdefault(c2[v], []).append(v)

    def multi(g: ReebGraph, a: str, b: str) -> int:
        return sum(1 for e in g.out_edges(a) if e.dst == b)

    mapping: dict[str, str] = {}
    used: set[str] = set()

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in by_color.get(c1[v], ()):
            if w in used:
                continue
            ok = True
            for u, x in mapping.items():
                if multi(g1, v, u) != multi(g2, w, x) or multi(g1, u, v) != multi(g2, x, w):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if extend(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    if not extend(0):
        return None
    return dict(mapping)


# -- reference shapes ----------------------------------------------------------------------------


def canonical_graph(cycles: int) -> ReebGraph:
    """A minimum, a chain of `cycles` two-edge lobes, and a maximum.

    The fully reduced shape every graph with this many cycles collapses to:
    2*cycles + 2 vertices resp. 3*cycles + 1 edges, with each lobe a
    DownFork feeding an UpFork twice.
    """
    if cycles < 0:
        raise ValueError("cycle count must be >= 0")
    vs = ["min", "max"] + [f"b{i}" for i in range(1, cycles + 1)] \
         + [f"t{i}" for i in range(1, cycles + 1)]
    es: list[tuple[str, str, str]] = []
    prev = "min"
    for i in range(1, cycles + 1):
        es.append((f"c{i}", prev, f"b{i}"))
        es.append((f"l{i}a", f"b{i}", f"t{i}"))
        es.append((f"l{i}b", f"b{i}", f"t{i}"))
        prev = f"t{i}"
    es.append((f"c{cycles + 1}", prev, "max"))
    return ReebGraph.build(vs, es)


def initial_graph(cycles: int) -> ReebGraph:
    """The staircase shape the planner reduces everything to.

    A chain of DownForks rises from the minimum, the topmost one closes a
    two-edge lobe with the first UpFork, and each remaining DownFork shoots
    a chord to its own UpFork on the way up to the maximum.  Same vertex
    and edge counts as :func:`canonical_graph`, but for two or more cycles
    the shapes differ (here the top DownFork sits on two cycles).
    """
    if cycles < 0:
        raise ValueError("cycle count must be >= 0")
    if cycles == 0:
        return ReebGraph.build(["min", "max"], [("c1", "min", "max")])
    vs = ["min", "max"] + [f"d{i}" for i in range(1, cycles + 1)] \
         + [f"u{i}" for i in range(1, cycles + 1)]
    es: list[tuple[str, str, str]] = [("c1", "min", "d1")]
    for i in range(1, cycles):
        es.append((f"s{i}", f"d{i}", f"d{i + 1}"))
    es.append((f"ba", f"d{cycles}", f"u{cycles}"))
    es.append((f"bb", f"d{cycles}", f"u{cycles}"))
    for i in range(cycles, 1, -1):
        es.append((f"r{i}", f"u{i}", f"u{i - 1}"))
    es.append(("c2", "u1", "max"))
    for i in range(1, cycles):
        es.append((f"x{i}", f"d{i}", f"u{i}"))
    return ReebGraph.build(vs, es)


def _bridges(g: ReebGraph) -> frozenset[str]:
    """Edges whose removal disconnects the underlying undirected graph.
    Parallel edges are never bridges.  Brute force; graphs here are small."""
    out: set[str] = set()
    pair_count: dict[tuple[str, str], int] = {}
    for e in g.edges:
        key = (min(e.src, e.dst), max(e.src, e.dst))
        pair_count[key] = pair_count.get(key, 0) + 1
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in g.vertices}
    for e in g.edges:
        adj[e.src].append((e.dst, e.id))
        adj[e.dst].append((e.src, e.id))
    for e in g.edges:
        key = (min(e.src, e.dst), max(e.src, e.dst))
        if pair_count[key] > 1:
            continue
        seen = {e.src}
        queue = deque([e.src])
        while queue:
            v = queue.popleft()
            for w, eid in adj[v]:
                if eid != e.id and w not in seen:
                    seen.add(w)
                    queue.append(w)
        if e.dst not in seen:
            out.add(e.id)
    return frozenset(out)


def is_canonical_form(g: ReebGraph) -> bool:
    """Smooth core is the canonical shape and every degree-2 vertex sits on
    an edge that lies on no cycle."""
    if not is_good_orientation(g):
        return False
    b = betti(g)
    core, host = _smooth_with_map(g)
    if iso_oriented(core, canonical_graph(b)) is None:
        return False
    bridges = _bridges(core)
    return all(host[r] in bridges for r in host)


def is_initial_form(g: ReebGraph) -> bool:
    """Smooth core is the initial staircase and every degree-2 vertex sits
    on one of the two extremal edges (the minimum's outgoing chain or the
    maximum's incoming chain)."""
    if not is_good_orientation(g):
        return False
    b = betti(g)
    core, host = _smooth_with_map(g)
    if iso_oriented(core, initial_graph(b)) is None:
        return False
    if not host:
        return True
    minv = next(v for v in core.vertices if degree_profile(core, v) == (0, 1))
    maxv = next(v for v in core.vertices if degree_profile(core, v) == (1, 0))
    allowed = {core.out_edges(minv)[0].id, core.in_edges(maxv)[0].id}
    return all(host[r] in allowed for r in host)


# -- id helpers --------------------------------------------------------------------------------------


_FRESH = re.compile(r"^t(\d+)$")


def fresh_ids(g: ReebGraph, n: int, prefix: str = "t") -> list[str]:
    """n ids not present in g (vertex or edge namespace), deterministic."""
    taken = set(g.vertices) | {e.id for e in g.edges}
    pat = re.compile(rf"^{re.escape(prefix)}(\d+)$")
    mx = -1
    for s in taken:
        m = pat.match(s)
        if m:
            mx = max(mx, int(m.group(1)))
    return [f"{prefix}{mx + 1 + i}" for i in range(n)]
