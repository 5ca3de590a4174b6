"""Tracing critical cells between adjacent slices and assembling bifurcation diagrams.

A critical cell of slice i is matched into the prism below it by the
extension; following V-paths from there, restricted to slices i-1, i and the
prism between them, leads to critical cells of slice i-1. A path stops at the
first cell that has a critical cell of slice i-1 as a face. Running the same
procedure on the time-reversed sequence gives the backward edges; an edge
present in both directions is a strong connection.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Sequence

from .gradient_build import VertexField, cell_values
from .morse import DEFAULT_PATH_CAP, PathFlow, critical_cells
from .spacetime import ExtensionReport, SliceSequence

NodeKey = tuple[int, int]  # (slice, cell id in that slice)


@dataclass(frozen=True)
class DiagramNode:
    slice: int
    cell: int
    dim: int
    value: float | None = None
    anchor: tuple[float, ...] | None = None

    @property
    def key(self) -> NodeKey:
        return (self.slice, self.cell)


@dataclass(frozen=True)
class DiagramEdge:
    source: NodeKey
    target: NodeKey
    dim: int
    direction: str  # "forward" or "backward"
    witness: tuple[int, ...] = ()
    multiplicity: int = 1


@dataclass(frozen=True)
class Marker:
    slice: int
    cell: int
    kind: str  # "birth" or "death"


@dataclass
class BifurcationDiagram:
    times: list[float]
    nodes: list[DiagramNode] = field(default_factory=list)
    forward: list[DiagramEdge] = field(default_factory=list)
    backward: list[DiagramEdge] = field(default_factory=list)
    strong: list[DiagramEdge] = field(default_factory=list)
    births: list[Marker] = field(default_factory=list)
    deaths: list[Marker] = field(default_factory=list)

    def nodes_at(self, i: int, dim: int | None = None) -> list[DiagramNode]:
        return [n for n in self.nodes if n.slice == i and (dim is None or n.dim == dim)]

    def tracks(self, dim: int | None = None) -> list[list[NodeKey]]:
        return strong_tracks(self, dim)


class _Tracer:
    """V-path flows out of slice i into slice i-1, shared by all cells of one dimension."""

    def __init__(self, ext: ExtensionReport, i: int, p: int, cap):
        X = ext.spacetime
        self.ext = ext
        self.i = i
        cx = X.complex
        off = X.slice_cell(i - 1, 0)
        n_prev = len(X.slices[i - 1])
        crit = critical_cells(X.slices[i - 1], ext.slice_fields[i - 1], p)
        self.off = off

        def is_target(a):
            return off <= a < off + n_prev and (a - off) in crit

        self.flow = PathFlow(cx, ext.field, is_target=is_target, allow=X.in_window(i),
                             truncate=True, cap=cap)

    def edges(self, sigma: int, direction: str = "forward") -> list[DiagramEdge]:
        X = self.ext.spacetime
        g = X.slice_cell(self.i, sigma)
        p = X.complex.dim(g)
        counts = self.flow.counts(g)
        return [DiagramEdge((self.i, sigma), (self.i - 1, t - self.off), p, direction,
                            self.flow.witness(g, t), n)
                for t, n in sorted(counts.items())]


def trace_vertex(ext: ExtensionReport, i: int, v: int, *,
                 cap: int = DEFAULT_PATH_CAP) -> DiagramEdge:
    """The unique critical vertex of slice i-1 reached from critical vertex ``v`` of slice i."""
    if i < 1:
        raise ValueError("tracing needs a slice index >= 1")
    M = ext.spacetime.slices[i]
    if M.dim(v) != 0 or not ext.slice_fields[i].is_critical(v):
        raise ValueError(f"cell {v} is not a critical vertex of slice {i}")
    out = _Tracer(ext, i, 0, cap).edges(v)
    if len(out) != 1 or out[0].multiplicity != 1:
        raise RuntimeError(f"vertex {v} of slice {i} traced to {len(out)} targets")
    return out[0]


def trace_cell(ext: ExtensionReport, i: int, sigma: int, *,
               cap: int = DEFAULT_PATH_CAP) -> list[DiagramEdge]:
    """Edges from critical cell ``sigma`` of slice i to critical cells of slice i-1.

    An empty result means no path passes by a critical cell: a birth.
    """
    if i < 1:
        raise ValueError("tracing needs a slice index >= 1")
    M = ext.spacetime.slices[i]
    if not ext.slice_fields[i].is_critical(sigma):
        raise ValueError(f"cell {sigma} is not critical in slice {i}")
    return _Tracer(ext, i, M.dim(sigma), cap).edges(sigma)


def _trace_all(ext: ExtensionReport, cap) -> list[DiagramEdge]:
    out = []
    X = ext.spacetime
    for i in range(1, len(X.slices)):
        M = X.slices[i]
        tracers = {}
        for c in sorted(critical_cells(M, ext.slice_fields[i]), key=lambda c: (M.dim(c), c)):
            p = M.dim(c)
            if p not in tracers:
                tracers[p] = _Tracer(ext, i, p, cap)
            out.extend(tracers[p].edges(c))
    return out


def strong_connections(forward: Sequence[DiagramEdge],
                       backward: Sequence[DiagramEdge]) -> list[DiagramEdge]:
    """Forward edges whose reversal is a backward edge; cells of dimension >= 1
    also need a single witnessing path in each direction."""
    back = {(e.source, e.target): e for e in backward}
    out = []
    for e in forward:
        b = back.get((e.target, e.source))
        if b is None:
            continue
        if e.dim >= 1 and (e.multiplicity != 1 or b.multiplicity != 1):
            continue
        out.append(e)
    return out


def build_diagram(S: SliceSequence, forward: ExtensionReport | None,
                  backward: ExtensionReport | None = None, *,
                  cap: int = DEFAULT_PATH_CAP) -> BifurcationDiagram:
    """Nodes, forward/backward/strong edges and birth/death markers.

    ``backward`` must be the extension of ``S.reversed()`` built from the same
    slice fields.
    """
    ref = forward if forward is not None else backward
    r = S.r
    fields = ref.slice_fields if forward is not None else list(reversed(ref.slice_fields))
    diagram = BifurcationDiagram(list(S.times))
    for i, (M, V) in enumerate(zip(S.complexes, fields)):
        vals = cell_values(M, S.vertex_fields[i]) if S.vertex_fields is not None else None
        for c in sorted(critical_cells(M, V), key=lambda c: (M.dim(c), c)):
            diagram.nodes.append(DiagramNode(i, c, M.dim(c),
                                             vals[c] if vals is not None else None,
                                             M.anchor(c)))
    if forward is not None:
        diagram.forward = _trace_all(forward, cap)
    if backward is not None:
        for e in _trace_all(backward, cap):
            diagram.backward.append(DiagramEdge(
                (r - e.source[0], e.source[1]), (r - e.target[0], e.target[1]),
                e.dim, "backward", e.witness, e.multiplicity))
        diagram.backward.sort(key=lambda e: (e.source, e.target))
    diagram.strong = strong_connections(diagram.forward, diagram.backward)
    _mark_events(diagram)
    return diagram


def _mark_events(d: BifurcationDiagram) -> None:
    """Birth and death markers.

    Births: a node of slice i >= 1 with no forward edge, or one sharing its
    forward target with another node while having no strong edge itself.
    Deaths: a node of slice i-1 that no forward edge reaches, or one of
    several targets of a single source that is not strongly connected.
    """
    r = len(d.times) - 1
    out_edges: dict[NodeKey, list[DiagramEdge]] = {}
    in_edges: dict[NodeKey, list[DiagramEdge]] = {}
    for e in d.forward:
        out_edges.setdefault(e.source, []).append(e)
        in_edges.setdefault(e.target, []).append(e)
    strong_src = {e.source for e in d.strong}
    strong_tgt = {e.target for e in d.strong}
    births, deaths = set(), set()
    for n in d.nodes:
        k = n.key
        if n.slice >= 1:
            outs = out_edges.get(k, [])
            if not outs:
                births.add(k)
            elif k not in strong_src and any(len(in_edges[e.target]) > 1 for e in outs):
                births.add(k)
        if n.slice < r:
            ins = in_edges.get(k, [])
            if not ins:
                deaths.add(k)
            elif k not in strong_tgt and any(len(out_edges[e.source]) > 1 for e in ins):
                deaths.add(k)
    d.births = [Marker(s, c, "birth") for s, c in sorted(births)]
    d.deaths = [Marker(s, c, "death") for s, c in sorted(deaths)]


def strong_tracks(d: BifurcationDiagram, dim: int | None = None) -> list[list[NodeKey]]:
    """Connected chains of strong edges, each sorted by slice; ordered by first node."""
    parent: dict[NodeKey, NodeKey] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in d.strong:
        if dim is None or e.dim == dim:
            parent[find(e.source)] = find(e.target)
    groups: dict[NodeKey, list[NodeKey]] = {}
    for x in list(parent):
        groups.setdefault(find(x), []).append(x)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def track_labels(d: BifurcationDiagram, dim: int | None = 0) -> dict[NodeKey, str]:
    """Letter labels A, B, ..., Z, AA, ... shared by the nodes of each strong track."""
    out = {}
    for k, track in enumerate(strong_tracks(d, dim)):
        label = ""
        n = k
        while True:
            label = string.ascii_uppercase[n % 26] + label
            n = n // 26 - 1
            if n < 0:
                break
        for key in track:
            out[key] = label
    return out
