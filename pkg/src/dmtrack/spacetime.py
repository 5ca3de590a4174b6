"""Spacetime complexes over M x [0, 1] and the extension of slice gradients across them.

Two constructions are provided. With one triangulation shared by all slices
the spacetime is a regular cell complex of slices plus product cells
sigma x [t_{i-1}, t_i]; the extension pairs every slice-critical cell with
its product cell and copies the slice field onto the product layer. When
triangulations differ (closed curves only) consecutive slices are joined by a
triangulated annulus; slice-critical cells are matched into cone cells and
the rest of the layer is completed by free-face collapses.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .complex import CellComplex, CellKind
from .errors import CancellationError, NotACurveError, NotGradientError, SliceMismatchError
from .gradient_build import VertexField, cancel_pair, lower_star_field, persistence_simplify
from .morse import (DEFAULT_PATH_CAP, DiscreteVectorField, PathFlow, critical_cells,
                    is_gradient)


@dataclass
class SliceSequence:
    """Slices t_0 < ... < t_r, each a complex with vertex samples and/or a gradient field."""

    complexes: list[CellComplex]
    times: list[float] | None = None
    vertex_fields: list[VertexField] | None = None
    fields: list[DiscreteVectorField] | None = None
    sources: list[str] | None = None

    def __post_init__(self):
        n = len(self.complexes)
        if n == 0:
            raise ValueError("a slice sequence needs at least one slice")
        if self.times is None:
            self.times = [i / (n - 1) if n > 1 else 0.0 for i in range(n)]
        self.times = [float(t) for t in self.times]
        for name in ("times", "vertex_fields", "fields", "sources"):
            val = getattr(self, name)
            if val is not None and len(val) != n:
                raise ValueError(f"{name} has {len(val)} entries for {n} slices")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("slice times must be strictly increasing")
        if self.vertex_fields is None and self.fields is None:
            raise ValueError("slices need vertex values or gradient fields")

    def __len__(self) -> int:
        return len(self.complexes)

    @property
    def r(self) -> int:
        return len(self.complexes) - 1

    def same_triangulation(self) -> bool:
        first = self.complexes[0]
        return all(first.same_structure(c) for c in self.complexes[1:])

    def gradient_fields(self, persistence: float = 0.0) -> list[DiscreteVectorField]:
        """Given fields, or lower-star fields simplified at ``persistence``."""
        if self.fields is not None:
            return self.fields
        out = []
        for cx, vf in zip(self.complexes, self.vertex_fields):
            V = lower_star_field(cx, vf)
            out.append(persistence_simplify(cx, V, vf, persistence) if persistence > 0 else V)
        return out

    def with_fields(self, fields: list[DiscreteVectorField]) -> SliceSequence:
        return SliceSequence(self.complexes, self.times, self.vertex_fields, fields, self.sources)

    def reversed(self) -> SliceSequence:
        t0, tr = self.times[0], self.times[-1]

        def rev(x):
            return None if x is None else list(reversed(x))

        return SliceSequence(rev(self.complexes), [t0 + tr - t for t in reversed(self.times)],
                             rev(self.vertex_fields), rev(self.fields), rev(self.sources))


class SpacetimeComplex:
    """A CellComplex whose cells are slice cells, product cells or cone cells.

    Slice i's cells occupy a contiguous id range in the order of the input
    slice complex, so slice-local ids translate by an offset. Prism cells
    between slices i-1 and i carry ``layer == i``.
    """

    def __init__(self):
        self.complex = CellComplex()
        self.slices: list[CellComplex] = []
        self._offset: list[int] = []
        self._layer_cells: dict[int, list[int]] = {}
        self._product_offset: dict[int, int] = {}
        self._cone: dict[int, tuple[int, int]] = {}

    def __len__(self) -> int:
        return len(self.complex)

    @property
    def r(self) -> int:
        return len(self.slices) - 1

    def add_slice(self, M: CellComplex) -> int:
        i = len(self.slices)
        X = self.complex
        off = len(X)
        for c in M.cells():
            X.add_cell(M.dim(c), [off + f for f in M.faces(c)], kind=CellKind.SLICE,
                       layer=i, anchor=M._anchor.get(c))
        self.slices.append(M)
        self._offset.append(off)
        return i

    def slice_cell(self, i: int, c: int) -> int:
        return self._offset[i] + c

    def to_local(self, g: int) -> tuple[int, int] | None:
        X = self.complex
        if X.kind(g) is not CellKind.SLICE:
            return None
        i = X.layer(g)
        return i, g - self._offset[i]

    def layer_cells(self, i: int) -> list[int]:
        return self._layer_cells.get(i, [])

    def product_cell(self, i: int, c: int) -> int:
        return self._product_offset[i] + c

    def cone_parts(self, g: int) -> tuple[int, int] | None:
        """(apex vertex, base cell) of a cone cell, both as global ids."""
        return self._cone.get(g)

    def in_window(self, i: int) -> Callable[[int], bool]:
        """Cells of slices i-1, i and the prism layer between them."""
        X = self.complex

        def ok(g):
            k = X._layer[g]
            return k == i or (k == i - 1 and X._kind[g] is CellKind.SLICE)
        return ok

    def add_product_layer(self, i: int) -> None:
        M = self.slices[i]
        if not M.same_structure(self.slices[i - 1]):
            raise SliceMismatchError(f"slices {i - 1} and {i} are not identical")
        X = self.complex
        lo, hi = self._offset[i - 1], self._offset[i]
        base = len(X)
        self._product_offset[i] = base
        cells = []
        for c in M.cells():
            faces = [lo + c, hi + c] + [base + f for f in M.faces(c)]
            cells.append(X.add_cell(M.dim(c) + 1, faces, kind=CellKind.PRODUCT, layer=i))
        self._layer_cells[i] = cells

    def add_prism_layer_1d(self, i: int) -> None:
        """Triangulated annulus between closed curves i-1 and i (angular zipper)."""
        X = self.complex
        prev, nxt = self.slices[i - 1], self.slices[i]
        a_verts, a_ang, a_edges = _cycle_order(prev)
        b_verts, b_ang, b_edges = _cycle_order(nxt)
        n, m = len(a_verts), len(b_verts)
        pa = lambda k: self.slice_cell(i - 1, a_verts[k % n])
        pb = lambda j: self.slice_cell(i, b_verts[j % m])
        ea = lambda k: self.slice_cell(i - 1, a_edges[k % n])
        eb = lambda j: self.slice_cell(i, b_edges[j % m])
        a_ang = a_ang + [a_ang[0] + 2 * math.pi]
        b_ang = b_ang + [b_ang[0] + 2 * math.pi]
        cells = []
        vertical: dict[tuple[int, int], int] = {}

        def vedge(k, j):
            key = (k % n, j % m)
            g = vertical.get(key)
            if g is None:
                a, b = pa(k), pb(j)
                g = X.add_cell(1, (a, b), kind=CellKind.CONE, layer=i)
                self._cone[g] = (a, b)
                vertical[key] = g
                cells.append(g)
            return g

        k = j = 0
        vedge(0, 0)
        while k < n or j < m:
            if k < n and (j == m or a_ang[k + 1] <= b_ang[j + 1]):
                faces = (ea(k), vedge(k, j), vedge(k + 1, j))
                g = X.add_cell(2, faces, kind=CellKind.CONE, layer=i)
                self._cone[g] = (pb(j), ea(k))
                k += 1
            else:
                faces = (eb(j), vedge(k, j), vedge(k, j + 1))
                g = X.add_cell(2, faces, kind=CellKind.CONE, layer=i)
                self._cone[g] = (pa(k), eb(j))
                j += 1
            cells.append(g)
        self._layer_cells[i] = cells


def _angle(anchor):
    if anchor is None:
        raise NotACurveError("closed-curve slices need anchors on every vertex")
    if len(anchor) == 1:
        return anchor[0] % (2 * math.pi)
    return math.atan2(anchor[1], anchor[0]) % (2 * math.pi)


def _cycle_order(M: CellComplex):
    """Vertices of a closed curve in increasing angle, unwrapped angles, and the joining edges."""
    if M.dimension != 1:
        raise NotACurveError(f"slice has dimension {M.dimension}, expected a closed curve")
    verts = M.cells(0)
    for v in verts:
        if len(M.cofaces(v)) != 2:
            raise NotACurveError(f"vertex {v} has degree {len(M.cofaces(v))}")
    ang = {v: _angle(M.anchor(v)) for v in verts}
    start = min(verts, key=lambda v: (ang[v], v))
    nb = M.neighbors(start)
    step = lambda w: (ang[w] - ang[start]) % (2 * math.pi)
    nxt = min(nb, key=lambda w: (step(w), w))
    order, edges, unwrapped = [start], [M.edge_between(start, nxt)], [ang[start]]
    prev, cur = start, nxt
    while cur != start:
        unwrapped.append(unwrapped[-1] + (ang[cur] - ang[prev]) % (2 * math.pi))
        order.append(cur)
        a, b = M.neighbors(cur)
        prev, cur = cur, (b if a == prev else a)
        edges.append(M.edge_between(prev, cur))
    if len(order) != len(verts):
        raise NotACurveError("slice is not a single closed curve")
    total = unwrapped[-1] + (ang[start] - ang[order[-1]]) % (2 * math.pi) - unwrapped[0]
    if abs(total - 2 * math.pi) > 1e-9:
        raise NotACurveError("closed curve must wind once around the origin")
    return order, unwrapped, edges


# -- constructions -------------------------------------------------------

def build_product_complex(S: SliceSequence | Sequence[CellComplex]) -> SpacetimeComplex:
    complexes = S.complexes if isinstance(S, SliceSequence) else list(S)
    first = complexes[0]
    if not all(first.same_structure(c) for c in complexes[1:]):
        raise SliceMismatchError("product construction needs identical slice triangulations")
    X = SpacetimeComplex()
    for i, M in enumerate(complexes):
        X.add_slice(M)
        if i > 0:
            X.add_product_layer(i)
    return X


def build_prism_complex_1d(M_prev: CellComplex, M_next: CellComplex) -> SpacetimeComplex:
    X = SpacetimeComplex()
    X.add_slice(M_prev)
    X.add_slice(M_next)
    X.add_prism_layer_1d(1)
    return X


@dataclass
class ExtensionReport:
    spacetime: SpacetimeComplex
    field: DiscreteVectorField
    slice_fields: list[DiscreteVectorField]
    algorithm: str
    extras: list[int] = field(default_factory=list)
    cancellations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def surviving_extras(self) -> list[int]:
        return [c for c in self.extras if self.field.is_critical(c)]

    def critical_slice_cells(self) -> set[tuple[int, int]]:
        """Critical cells of the extension that lie in a slice, as (slice, local id)."""
        X = self.spacetime
        out = set()
        for g in critical_cells(X.complex, self.field):
            loc = X.to_local(g)
            if loc is not None:
                out.add(loc)
        return out


def _require_gradients(complexes, fields):
    for i, (M, V) in enumerate(zip(complexes, fields)):
        if V.size != len(M):
            raise ValueError(f"slice {i}: field size {V.size} != {len(M)} cells")
        if not is_gradient(M, V):
            raise NotGradientError(f"slice {i} field has a closed V-path")


def extend_same_triangulation(S: SliceSequence) -> ExtensionReport:
    """Algorithm I: critical slice cells pair with their product cells, the rest copy V_i."""
    fields = S.gradient_fields()
    _require_gradients(S.complexes, fields)
    X = build_product_complex(S)
    W = DiscreteVectorField(len(X))
    M = S.complexes[0]
    for a, b in fields[0].pairs():
        W._pair(X.slice_cell(0, a), X.slice_cell(0, b))
    for i in range(1, len(S)):
        Vi = fields[i]
        for c in M.cells():
            b = Vi.up(c)
            if b is not None:
                W._pair(X.slice_cell(i, c), X.slice_cell(i, b))
                W._pair(X.product_cell(i, c), X.product_cell(i, b))
            elif Vi.down(c) is None:
                W._pair(X.slice_cell(i, c), X.product_cell(i, c))
    return ExtensionReport(X, W, list(fields), "same")


def acyclic_completion(X: SpacetimeComplex | CellComplex, partial: DiscreteVectorField,
                       scope: Sequence[int] | None = None) -> DiscreteVectorField:
    """Extend ``partial`` by free-face collapses inside ``scope`` (default: every cell).

    An unmatched cell with exactly one unmatched coface is paired with it,
    sweeping cells in (dimension, id) order until nothing changes. A pairing
    that would close a V-path is skipped. Cells left unmatched are critical.
    """
    cx = X.complex if isinstance(X, SpacetimeComplex) else X
    V = partial.copy()
    cells = sorted(scope if scope is not None else cx.cells(), key=lambda c: (cx.dim(c), c))
    in_scope = set(cells)
    changed = True
    while changed:
        changed = False
        for c in cells:
            if not V.is_critical(c):
                continue
            free = [t for t in cx.cofaces(c) if V.is_critical(t)]
            if len(free) != 1 or free[0] not in in_scope:
                continue
            t = free[0]
            flow = PathFlow(cx, V, is_target=lambda x: x == c, cap=None, clip=1)
            if flow.counts_from(x for x in cx.faces(t) if x != c):
                continue
            V._pair(c, t)
            changed = True
    return V


def _cell_distance_fn(M_prev: CellComplex, targets: list[int], metric: str):
    """Distance from a vertex of M_prev to the nearest of ``targets``."""
    if not targets:
        return lambda v: math.inf
    if metric == "euclidean":
        pts = [M_prev.anchor(t) for t in targets]
        if any(p is None for p in pts):
            raise NotACurveError("euclidean distance needs anchors")

        def dist(v):
            a = M_prev.anchor(v)
            return min(math.dist(a, p) for p in pts)
        return dist
    if metric == "graph":
        # multi-source BFS over the 1-skeleton from every vertex of a target cell
        d = {}
        q = deque()
        for t in targets:
            for v in M_prev.vertices(t):
                if v not in d:
                    d[v] = 0
                    q.append(v)
        while q:
            v = q.popleft()
            for w in M_prev.neighbors(v):
                if w not in d:
                    d[w] = d[v] + 1
                    q.append(w)
        return lambda v: d.get(v, math.inf)
    raise ValueError(f"unknown distance metric {metric!r}")


def extend_general(S: SliceSequence, *, distance: str = "euclidean",
                   cap: int = DEFAULT_PATH_CAP) -> ExtensionReport:
    """Algorithm II for closed-curve slices with (possibly) different triangulations."""
    fields = S.gradient_fields()
    _require_gradients(S.complexes, fields)
    X = SpacetimeComplex()
    for i, M in enumerate(S.complexes):
        X.add_slice(M)
        if i > 0:
            X.add_prism_layer_1d(i)
    cx = X.complex
    W = DiscreteVectorField(len(X))
    for a, b in fields[0].pairs():
        W._pair(X.slice_cell(0, a), X.slice_cell(0, b))
    extras: list[int] = []
    cancellations: list[tuple[int, int]] = []
    for i in range(1, len(S)):
        M, M_prev = S.complexes[i], S.complexes[i - 1]
        Vi, V_prev = fields[i], fields[i - 1]
        for a, b in Vi.pairs():
            W._pair(X.slice_cell(i, a), X.slice_cell(i, b))
        prev_off = X.slice_cell(i - 1, 0)
        crit = sorted(critical_cells(M, Vi), key=lambda c: (M.dim(c), c))
        dist_cache: dict[int, Callable] = {}
        for sigma in crit:
            p = M.dim(sigma)
            if p not in dist_cache:
                dist_cache[p] = _cell_distance_fn(
                    M_prev, sorted(critical_cells(M_prev, V_prev, p)), distance)
            dist = dist_cache[p]
            g = X.slice_cell(i, sigma)
            options = []
            for tau in cx.cofaces(g):
                parts = X.cone_parts(tau)
                if parts is None or parts[1] != g or cx.layer(tau) != i:
                    continue
                apex = parts[0] - prev_off
                options.append((dist(apex), apex, tau))
            options.sort()
            for _, _, tau in options:
                if W.is_critical(tau):
                    W._pair(g, tau)
                    break
            else:
                raise SliceMismatchError(
                    f"slice {i}: no free cone cell for critical cell {sigma}")
        layer = X.layer_cells(i)
        W = acyclic_completion(cx, W, layer)
        new = sorted((c for c in layer if W.is_critical(c)), key=lambda c: (cx.dim(c), c))
        extras.extend(new)
        W = _cleanup(cx, W, extras, cancellations, cap)
    return ExtensionReport(X, W, list(fields), "general", extras, cancellations)


def _cleanup(cx, W, extras, cancellations, cap):
    """Cancel prism extras against each other where a unique V-path joins them."""
    order = sorted(extras, key=lambda c: (cx.dim(c), extras.index(c)))
    for c in order:
        if not W.is_critical(c):
            continue
        alive = [x for x in order if x != c and W.is_critical(x)]
        for other in alive:
            if cx.dim(other) == cx.dim(c) + 1:
                alpha, beta = c, other
            elif cx.dim(other) == cx.dim(c) - 1:
                alpha, beta = other, c
            else:
                continue
            try:
                W = cancel_pair(cx, W, alpha, beta, cap=cap)
            except CancellationError:
                continue
            cancellations.append((alpha, beta))
            break
    return W
