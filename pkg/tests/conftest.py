"""Shared helpers for the test suite."""

from __future__ import annotations

from reebkit.graph import ReebGraph


def mk(edges: list[tuple[str, str, str]], extra_vertices: tuple[str, ...] = (),
       levels=None, markers=()) -> ReebGraph:
    """Build a graph from an edge list; vertices are inferred."""
    vs = set(extra_vertices)
    for _, s, d in edges:
        vs.add(s)
        vs.add(d)
    return ReebGraph.build(sorted(vs), edges, levels=levels, markers=markers)


def cycle_rank_oracle(g: ReebGraph) -> int:
    """Independent first-Betti oracle: E - V + (number of undirected
    components), computed with union-find rather than the E - V + 1
    shortcut the library uses for connected graphs."""
    parent = {v: v for v in g.vertices}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = len(g.vertices)
    for e in g.edges:
        a, b = find(e.src), find(e.dst)
        if a != b:
            parent[a] = b
            components -= 1
    return g.n_edges - g.n_vertices + components
