"""Gradient fields from vertex samples, and their simplification by cancellation."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .complex import CellComplex, CellId
from .errors import CancellationError, ComplexError
from .morse import DEFAULT_PATH_CAP, DiscreteVectorField, PathFlow


@dataclass(frozen=True, eq=False)
class VertexField:
    """Per-vertex samples; ties are broken by vertex index."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("vertex values must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("vertex values must be finite")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)

    @cached_property
    def rank(self) -> list[int]:
        """Position of each vertex in the (value, index) order."""
        order = np.lexsort((np.arange(len(self.values)), self.values))
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank.tolist()

    def key(self, v: int) -> tuple[float, int]:
        return (float(self.values[v]), v)

    def negated(self) -> VertexField:
        return VertexField(-self.values)


class CellValue(NamedTuple):
    value: float
    key: tuple[int, ...]  # vertex ranks, descending


def cell_value(cx: CellComplex, vf: VertexField, c: CellId) -> CellValue:
    rank = vf.rank
    verts = cx.vertices(c)
    key = tuple(sorted((rank[v] for v in verts), reverse=True))
    return CellValue(max(float(vf.values[v]) for v in verts), key)


def cell_values(cx: CellComplex, vf: VertexField) -> list[float]:
    """Max vertex value of every cell, indexed by cell id."""
    vals = vf.values.tolist()
    out = [0.0] * len(cx)
    for c in cx.cells():
        if cx.dim(c) == 0:
            out[c] = vals[c]
        else:
            out[c] = max(out[f] for f in cx.faces(c))
    return out


def _check_vertex_field(cx, vf):
    if len(vf) != len(cx.cells(0)):
        raise ComplexError(f"{len(vf)} vertex values for {len(cx.cells(0))} vertices")


def lower_star_field(cx: CellComplex, vf: VertexField) -> DiscreteVectorField:
    """Gradient field built one lower star at a time.

    Each vertex's lower star (cells whose highest vertex, in tie-broken
    order, is that vertex) is matched with the priority-queue sweep of
    Robins, Wood and Sheppard: the vertex takes its lowest edge, then cells
    with exactly one unmatched face in the star are paired with it, lowest
    first, and anything left with no unmatched face becomes critical.
    """
    _check_vertex_field(cx, vf)
    if not cx.is_simplicial():
        raise ComplexError("lower_star_field needs a simplicial complex")
    rank = vf.rank
    n = len(cx)
    faces = cx._faces
    cofaces = cx._cofaces
    maxv = [0] * n
    key: list[tuple[int, ...]] = [()] * n
    stars: list[list[int]] = [[] for _ in range(n)]
    for c in range(n):
        if cx.dim(c) == 0:
            maxv[c] = c
            key[c] = (rank[c],)
        else:
            m = max((maxv[f] for f in faces[c]), key=rank.__getitem__)
            maxv[c] = m
            key[c] = tuple(sorted((rank[v] for v in cx.vertices(c)), reverse=True))
            stars[m].append(c)

    V = DiscreteVectorField(n)
    done = bytearray(n)

    for v in cx.cells(0):
        star = stars[v]
        done[v] = 1
        if not star:
            continue

        def unpaired(c):
            return [f for f in faces[c] if maxv[f] == v and not done[f]]

        def push_cofaces(c, pq1):
            for co in cofaces[c]:
                if maxv[co] == v and not done[co] and len(unpaired(co)) == 1:
                    heapq.heappush(pq1, (key[co], co))

        edges = [c for c in star if cx.dim(c) == 1]
        delta = min(edges, key=key.__getitem__)
        V._pair(v, delta)
        done[delta] = 1
        pq0 = [(key[e], e) for e in edges if e != delta]
        heapq.heapify(pq0)
        pq1: list = []
        push_cofaces(delta, pq1)
        while pq0 or pq1:
            while pq1:
                _, a = heapq.heappop(pq1)
                if done[a]:
                    continue
                free = unpaired(a)
                if not free:
                    heapq.heappush(pq0, (key[a], a))
                    continue
                if len(free) > 1:
                    continue
                pf = free[0]
                V._pair(pf, a)
                done[a] = done[pf] = 1
                push_cofaces(a, pq1)
                push_cofaces(pf, pq1)
            while pq0:
                _, g = heapq.heappop(pq0)
                if done[g]:
                    continue
                done[g] = 1  # critical
                push_cofaces(g, pq1)
                break
    return V


# -- connections and cancellation ---------------------------------------

@dataclass(frozen=True)
class PersistencePair:
    alpha: int
    beta: int
    persistence: float


def gradient_paths_between(cx: CellComplex, V: DiscreteVectorField, beta: CellId,
                           alpha: CellId, *, cap: int = DEFAULT_PATH_CAP) -> int:
    """Number of V-paths from a face of ``beta`` that end at ``alpha``."""
    if cx.dim(beta) != cx.dim(alpha) + 1:
        raise ValueError("beta must have dimension dim(alpha) + 1")
    flow = PathFlow(cx, V, is_target=lambda a: a == alpha, cap=cap)
    return flow.counts_from(cx.faces(beta)).get(alpha, 0)


def _reverse_path(V: DiscreteVectorField, beta: int, cells: tuple[int, ...]) -> None:
    alphas = cells[0::2]
    betas = cells[1::2]
    for a in alphas[:-1]:
        V._unpair(a)
    V._pair(alphas[0], beta)
    for j in range(1, len(alphas)):
        V._pair(alphas[j], betas[j - 1])


def _connecting_path(cx, V, beta, alpha, flow):
    for a0 in cx.faces(beta):
        if alpha in flow.counts(a0):
            return flow.witness(a0, alpha)
    raise CancellationError(f"no V-path from {beta} to {alpha}")


def cancel_pair(cx: CellComplex, V: DiscreteVectorField, alpha: CellId, beta: CellId, *,
                cap: int = DEFAULT_PATH_CAP) -> DiscreteVectorField:
    """Cancel critical ``alpha`` < ``beta`` by reversing their unique connecting V-path."""
    if not (V.is_critical(alpha) and V.is_critical(beta)):
        raise CancellationError("both cells must be critical")
    if cx.dim(beta) != cx.dim(alpha) + 1:
        raise CancellationError("beta must have dimension dim(alpha) + 1")
    flow = PathFlow(cx, V, is_target=lambda a: a == alpha, cap=cap)
    n = flow.counts_from(cx.faces(beta)).get(alpha, 0)
    if n != 1:
        raise CancellationError(f"{n} V-paths join {beta} to {alpha}; need exactly one")
    out = V.copy()
    _reverse_path(out, beta, _connecting_path(cx, V, beta, alpha, flow))
    return out


def persistence_simplify(cx: CellComplex, V: DiscreteVectorField, vf: VertexField,
                         p: float, *, log: list[PersistencePair] | None = None
                         ) -> DiscreteVectorField:
    """Cancel critical pairs of persistence below ``p``, least persistent first.

    A pair (a, b) is eligible when exactly one V-path joins b to a. After a
    cancellation only the critical cells whose paths used to reach ``a``
    can change their candidate sets, so only those are recomputed.
    """
    if p < 0:
        raise ValueError("persistence level must be >= 0")
    if p == 0:
        return V
    _check_vertex_field(cx, vf)
    value = cell_values(cx, vf)
    W = V.copy()
    targets: dict[int, dict[int, int]] = {}
    reached_by: dict[int, set[int]] = {}
    heap: list[tuple[float, int, int, int]] = []

    def refresh(b):
        for a in targets.pop(b, ()):
            reached_by[a].discard(b)
        if not W.is_critical(b):
            return
        q = cx.dim(b) - 1
        flow = PathFlow(cx, W, is_target=lambda a: cx.dim(a) == q and W.is_critical(a),
                        cap=None, clip=2)
        t = flow.counts_from(cx.faces(b))
        targets[b] = t
        for a, k in t.items():
            reached_by.setdefault(a, set()).add(b)
            if k == 1:
                pers = value[b] - value[a]
                if pers < p:
                    heapq.heappush(heap, (pers, q, b, a))

    for b in cx.cells():
        if cx.dim(b) > 0 and W.is_critical(b):
            refresh(b)

    while heap:
        pers, _, b, a = heapq.heappop(heap)
        if not (W.is_critical(a) and W.is_critical(b)):
            continue
        if targets.get(b, {}).get(a) != 1:
            continue
        flow = PathFlow(cx, W, is_target=lambda x: x == a, cap=None, clip=2)
        flow.counts_from(cx.faces(b))
        _reverse_path(W, b, _connecting_path(cx, W, b, a, flow))
        if log is not None:
            log.append(PersistencePair(a, b, pers))
        affected = sorted(reached_by.get(a, ()))
        refresh(b)
        refresh(a)
        for g in affected:
            refresh(g)
    return W
