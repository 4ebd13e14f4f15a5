"""Exhaustive enumeration of small good-oriented graphs up to isomorphism.

Two layers:

* smooth *cores* (no degree-2 vertices) are generated by topological
  augmentation: vertices are placed one at a time in topological order,
  each consuming some of the currently open out-stubs and emitting its own.
  Partial states are deduplicated with an exact canonical certificate
  (colour refinement plus individualization, minimal-code style), which is
  what makes the search exhaustive *and* finite-sized in practice;
* arbitrary graphs are cores with regular vertices spread over their edges,
  enumerated as compositions (every isomorphism class appears at least
  once; symmetric edge choices may repeat a class unless `dedup` is set).

The certificate is exact, not a hash: two graphs receive the same
certificate iff they are isomorphic as vertex-coloured directed multigraphs.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Hashable, Iterable, Iterator, NamedTuple, Sequence

from .graph import ReebGraph

__all__ = [
    "certificate",
    "enumerate_cores",
    "enumerate_good_graphs",
    "spread_regulars",
]

_PROFILES_3 = ((0, 1), (1, 0), (2, 1), (1, 2))
_PROFILES_4 = _PROFILES_3 + ((2, 2), (1, 3), (3, 1))


# -- exact canonical certificate ---------------------------------------------


def _refine(colors: list[int], outs: list[list[int]], ins: list[list[int]]) -> list[int]:
    """Stable colour refinement; colour ids are renumbered canonically
    (sorted by signature) on every pass."""
    n = len(colors)
    n_classes = len(set(colors))
    while True:
        sigs = []
        for v in range(n):
            sigs.append((
                colors[v],
                tuple(sorted(colors[w] for w in outs[v])),
                tuple(sorted(colors[w] for w in ins[v])),
            ))
        order = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [order[s] for s in sigs]
        if len(order) == n or len(order) == n_classes:
            return new
        n_classes = len(order)
        colors = new


def _canon(init: list[int], colors: list[int],
           outs: list[list[int]], ins: list[list[int]],
           arcs: list[tuple[int, int]]) -> tuple:
    n = len(colors)
    colors = _refine(colors, outs, ins)
    classes: dict[int, list[int]] = {}
    for v, c in enumerate(colors):
        classes.setdefault(c, []).append(v)
    target = None
    for c in sorted(classes):
        if len(classes[c]) > 1:
            target = classes[c]
            break
    if target is None:
        rank = {v: colors[v] for v in range(n)}
        return (
            tuple(init[v] for v in sorted(range(n), key=lambda v: rank[v])),
            tuple(sorted((rank[s], rank[d]) for s, d in arcs)),
        )
    best: tuple | None = None
    for v in target:
        # individualize v: split it off its class, keeping the order stable
        split = [(c, 0 if w == v else 1) for w, c in enumerate(colors)]
        order = {s: i for i, s in enumerate(sorted(set(split)))}
        cand = _canon(init, [order[s] for s in split], outs, ins, arcs)
        if best is None or cand < best:
            best = cand
    return best


def _certify(colors: Sequence[Hashable], arcs: Sequence[tuple[int, int]]) -> tuple:
    """Canonical form of a coloured directed multigraph on 0..n-1."""
    n = len(colors)
    palette = {c: i for i, c in enumerate(sorted(set(colors), key=repr))}
    init = [palette[c] for c in colors]
    outs: list[list[int]] = [[] for _ in range(n)]
    ins: list[list[int]] = [[] for _ in range(n)]
    for s, d in arcs:
        outs[s].append(d)
        ins[d].append(s)
    code = _canon(init, list(init), outs, ins, list(arcs))
    return (tuple(sorted(repr(c) for c in colors)), code)


def certificate(g: ReebGraph) -> tuple:
    """Exact isomorphism certificate of a graph's shape.  Two graphs get
    equal certificates precisely when iso_oriented relates them, so like
    that check it ignores markers and ids."""
    index = {v: i for i, v in enumerate(g.vertices)}
    colors = [("v", g.indeg(v), g.outdeg(v)) for v in g.vertices]
    arcs = [(index[e.src], index[e.dst]) for e in g.edges]
    return _certify(colors, arcs)


# -- smooth core enumeration ----------------------------------------------------


class _Partial(NamedTuple):
    profiles: tuple[tuple[int, int], ...]
    arcs: tuple[tuple[int, int], ...]
    stubs: tuple[int, ...]        # sorted source vertices of open out-edges


def _partial_cert(p: _Partial) -> tuple:
    n = len(p.profiles)
    colors: list[Hashable] = [("v",) + prof for prof in p.profiles]
    arcs = list(p.arcs)
    for i, src in enumerate(p.stubs):
        colors.append(("stub",))
        arcs.append((src, n + i))
    return _certify(colors, arcs)


def _connected(n: int, arcs: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    parts = n
    for s, d in arcs:
        a, b = find(s), find(d)
        if a != b:
            parent[a] = b
            parts -= 1
    return parts == 1


def _materialize(p: _Partial) -> ReebGraph:
    n = len(p.profiles)
    vs = [f"v{i:02d}" for i in range(n)]
    es = [(f"e{j:03d}", vs[s], vs[d]) for j, (s, d) in enumerate(sorted(p.arcs))]
    return ReebGraph.build(vs, es)


@lru_cache(maxsize=None)
def enumerate_cores(n_vertices: int, max_degree: int = 3) -> tuple[ReebGraph, ...]:
    """All connected good-oriented graphs on exactly `n_vertices` vertices
    with no degree-2 vertex, one representative per isomorphism class."""
    if max_degree not in (3, 4):
        raise ValueError("max_degree must be 3 or 4")
    profiles = _PROFILES_3 if max_degree == 3 else _PROFILES_4
    max_net = max(i - o for i, o in profiles)
    if n_vertices < 2:
        return ()

    level: dict[tuple, _Partial] = {}
    for prof in profiles:
        if prof[0] == 0:  # a topological order must start at a minimum
            start = _Partial((prof,), (), tuple([0] * prof[1]))
            level[_partial_cert(start)] = start

    for placed in range(1, n_vertices):
        nxt: dict[tuple, _Partial] = {}
        remaining_after = n_vertices - placed - 1
        for state in level.values():
            stubs = state.stubs
            for i, o in profiles:
                if i > len(stubs):
                    continue
                after = len(stubs) - i + o
                if after > remaining_after * max_net:
                    continue
                if remaining_after == 0 and after != 0:
                    continue
                if max_degree == 3 and (after - remaining_after) % 2 != 0:
                    continue
                seen_choice: set[tuple[int, ...]] = set()
                for pick in itertools.combinations(range(len(stubs)), i):
                    srcs = tuple(stubs[k] for k in pick)
                    if srcs in seen_choice:
                        continue
                    seen_choice.add(srcs)
                    rest = list(stubs)
                    for k in reversed(pick):
                        del rest[k]
                    new = _Partial(
                        state.profiles + ((i, o),),
                        tuple(sorted(state.arcs + tuple((s, placed) for s in srcs))),
                        tuple(sorted(rest + [placed] * o)),
                    )
                    key = _partial_cert(new)
                    if key not in nxt:
                        nxt[key] = new
        level = nxt

    out: dict[tuple, ReebGraph] = {}
    for state in level.values():
        if state.stubs:
            continue
        if not _connected(n_vertices, state.arcs):
            continue
        g = _materialize(state)
        out.setdefault(certificate(g), g)
    return tuple(out[k] for k in sorted(out))


# -- regular decoration -----------------------------------------------------------


def spread_regulars(core: ReebGraph, counts: Sequence[int]) -> ReebGraph:
    """Subdivide core edges: counts[i] regular vertices on the i-th edge
    (edges in id order)."""
    if len(counts) != core.n_edges:
        raise ValueError("one count per edge")
    vs = list(core.vertices)
    es: list[tuple[str, str, str]] = []
    for e, c in zip(core.edges, counts):
        if c == 0:
            es.append((e.id, e.src, e.dst))
            continue
        chain = [f"{e.id}r{j}" for j in range(1, c + 1)]
        vs.extend(chain)
        stops = [e.src] + chain + [e.dst]
        es.append((e.id, stops[0], stops[1]))
        for j in range(1, len(stops) - 1):
            es.append((f"{e.id}.{j}", stops[j], stops[j + 1]))
    return ReebGraph.build(vs, es)


def _compositions(total: int, slots: int) -> Iterator[tuple[int, ...]]:
    if slots == 0:
        if total == 0:
            yield ()
        return
    if slots == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def enumerate_good_graphs(
    max_vertices: int,
    max_degree: int = 3,
    with_regulars: bool = True,
    dedup: bool = False,
) -> Iterator[ReebGraph]:
    """Every connected good-oriented graph with at most `max_vertices`
    vertices (vertex degrees bounded by `max_degree`).

    Cores are exact isomorphism-class representatives.  With
    `with_regulars`, degree-2 decorations enumerate every class at least
    once; set `dedup` to pay for certificate-based uniqueness of the
    decorated graphs too.
    """
    seen: set[tuple] = set()
    for n_core in range(2, max_vertices + 1):
        for core in enumerate_cores(n_core, max_degree):
            if not with_regulars:
                yield core
                continue
            budget = max_vertices - n_core
            for extra in range(budget + 1):
                for counts in _compositions(extra, core.n_edges):
                    g = spread_regulars(core, counts)
                    if dedup:
                        key = certificate(g)
                        if key in seen:
                            continue
                        seen.add(key)
                    yield g
