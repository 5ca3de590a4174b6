"""Regular cell complexes stored as an explicit Hasse diagram.

Cells are dense integer ids. Each cell keeps its codimension-one faces as an
ordered tuple and the coface index is maintained as the exact transpose of the
face relation. Simplicial complexes, product (prism) cells and cone cells all
live in the same structure; the ``kind``/``layer`` tags say where a cell came
from when the complex is a spacetime complex.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ComplexError, InputError

CellId = int


class CellKind(enum.Enum):
    SLICE = "slice"
    PRODUCT = "product"
    CONE = "cone"


@dataclass(frozen=True)
class Cell:
    id: CellId
    dim: int
    faces: tuple[CellId, ...]
    kind: CellKind = CellKind.SLICE
    layer: int = 0
    anchor: tuple[float, ...] | None = None


class CellComplex:
    """Cells grouped by dimension with a face and coface index.

    Construction is single-writer through :meth:`add_cell`; once built a
    complex is treated as immutable and may be shared between readers.
    """

    def __init__(self):
        self._dim: list[int] = []
        self._faces: list[tuple[int, ...]] = []
        self._cofaces: list[list[int]] = []
        self._kind: list[CellKind] = []
        self._layer: list[int] = []
        self._anchor: dict[int, tuple[float, ...]] = {}
        self._by_dim: list[list[int]] = []
        self._verts: dict[int, tuple[int, ...]] = {}

    def add_cell(self, dim: int, faces: Sequence[CellId] = (), *,
                 kind: CellKind = CellKind.SLICE, layer: int = 0,
                 anchor: Sequence[float] | None = None) -> CellId:
        if dim < 0:
            raise ComplexError(f"negative dimension {dim}")
        faces = tuple(faces)
        n = len(self._dim)
        if dim == 0:
            if faces:
                raise ComplexError("a vertex has no faces")
        else:
            if len(faces) < 2:
                raise ComplexError(f"a {dim}-cell needs at least two faces, got {len(faces)}")
            if len(set(faces)) != len(faces):
                raise ComplexError(f"duplicate face in {faces}")
            for f in faces:
                if not 0 <= f < n:
                    raise ComplexError(f"unknown face id {f}")
                if self._dim[f] != dim - 1:
                    raise ComplexError(
                        f"face {f} has dimension {self._dim[f]}, expected {dim - 1}")
        self._dim.append(dim)
        self._faces.append(faces)
        self._cofaces.append([])
        self._kind.append(kind)
        self._layer.append(layer)
        if anchor is not None:
            self._anchor[n] = tuple(float(a) for a in anchor)
        while len(self._by_dim) <= dim:
            self._by_dim.append([])
        self._by_dim[dim].append(n)
        for f in faces:
            self._cofaces[f].append(n)
        return n

    # -- queries ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._dim)

    @property
    def dimension(self) -> int:
        return len(self._by_dim) - 1

    def dim(self, c: CellId) -> int:
        return self._dim[c]

    def faces(self, c: CellId) -> tuple[int, ...]:
        return self._faces[c]

    def cofaces(self, c: CellId) -> list[int]:
        return self._cofaces[c]

    def kind(self, c: CellId) -> CellKind:
        return self._kind[c]

    def layer(self, c: CellId) -> int:
        return self._layer[c]

    def cells(self, dim: int | None = None) -> list[int]:
        if dim is None:
            return list(range(len(self._dim)))
        if dim < 0 or dim >= len(self._by_dim):
            return []
        return self._by_dim[dim]

    def counts(self) -> list[int]:
        return [len(c) for c in self._by_dim]

    def cell(self, c: CellId) -> Cell:
        return Cell(c, self._dim[c], self._faces[c], self._kind[c], self._layer[c],
                    self.anchor(c))

    def vertices(self, c: CellId) -> tuple[int, ...]:
        """Sorted vertex ids of the closure of ``c``."""
        if self._dim[c] == 0:
            return (c,)
        v = self._verts.get(c)
        if v is None:
            acc: set[int] = set()
            for f in self._faces[c]:
                acc.update(self.vertices(f))
            v = tuple(sorted(acc))
            self._verts[c] = v
        return v

    def anchor(self, c: CellId) -> tuple[float, ...] | None:
        """Explicit anchor, or the centroid of the vertex anchors."""
        a = self._anchor.get(c)
        if a is not None or self._dim[c] == 0:
            return a
        pts = [self._anchor.get(v) for v in self.vertices(c)]
        if any(p is None for p in pts):
            return None
        k = len(pts)
        return tuple(sum(p[j] for p in pts) / k for j in range(len(pts[0])))

    def has_anchors(self) -> bool:
        return all(v in self._anchor for v in self.cells(0))

    def edge_between(self, u: CellId, v: CellId) -> CellId | None:
        for e in self._cofaces[u]:
            if v in self._faces[e]:
                return e
        return None

    def neighbors(self, v: CellId) -> list[int]:
        out = []
        for e in self._cofaces[v]:
            a, b = self._faces[e]
            out.append(b if a == v else a)
        return out

    def same_structure(self, other: CellComplex) -> bool:
        """True when both complexes have identical cells and incidence."""
        return self is other or (self._dim == other._dim and self._faces == other._faces)

    def is_simplicial(self) -> bool:
        return all(len(self._faces[c]) == self._dim[c] + 1 for c in range(len(self._dim))
                   if self._dim[c] > 0)

    def check(self) -> None:
        """Re-verify the incidence invariants; raises ComplexError on failure."""
        for c, fs in enumerate(self._faces):
            if len(set(fs)) != len(fs):
                raise ComplexError(f"cell {c} repeats a face")
            for f in fs:
                if self._dim[f] != self._dim[c] - 1:
                    raise ComplexError(f"cell {c}: face {f} has wrong dimension")
                if c not in self._cofaces[f]:
                    raise ComplexError(f"coface index misses {c} over {f}")
        for f, cos in enumerate(self._cofaces):
            for c in cos:
                if f not in self._faces[c]:
                    raise ComplexError(f"coface index has spurious {c} over {f}")


# -- builders ------------------------------------------------------------

def path_complex(n: int, *, xs: Sequence[float] | None = None) -> CellComplex:
    """``n`` vertices in a row joined by ``n - 1`` edges; edge i is (v_i, v_{i+1})."""
    if n < 2:
        raise ComplexError("path_complex needs n >= 2")
    if xs is None:
        xs = range(n)
    cx = CellComplex()
    for i in range(n):
        cx.add_cell(0, anchor=(float(xs[i]), 0.0))
    for i in range(n - 1):
        cx.add_cell(1, (i, i + 1))
    return cx


def circle_complex(n: int, *, radius: float = 1.0, phase: float = 0.0) -> CellComplex:
    """Polygon with ``n`` vertices on a circle; edge ``n + i`` joins v_i and v_{i+1 mod n}."""
    if n < 3:
        raise ComplexError("circle_complex needs n >= 3")
    cx = CellComplex()
    for i in range(n):
        th = phase + 2 * math.pi * i / n
        cx.add_cell(0, anchor=(radius * math.cos(th), radius * math.sin(th)))
    for i in range(n):
        cx.add_cell(1, (i, (i + 1) % n))
    return cx


def freudenthal_grid(w: int, h: int, *, spacing: float = 1.0,
                     origin: tuple[float, float] = (0.0, 0.0)) -> CellComplex:
    """``w`` x ``h`` lattice, each unit square cut along its (x, y)-(x+1, y+1) diagonal.

    Vertex (x, y) has id ``y * w + x`` and anchor ``origin + spacing * (x, y)``.
    """
    if w < 2 or h < 2:
        raise ComplexError("freudenthal_grid needs w, h >= 2")
    return _lattice(w, h, spacing, origin, periodic=False)


def torus_grid(w: int, h: int) -> CellComplex:
    """Periodic Freudenthal lattice: a triangulated torus (w, h >= 3)."""
    if w < 3 or h < 3:
        raise ComplexError("torus_grid needs w, h >= 3")
    return _lattice(w, h, 1.0, (0.0, 0.0), periodic=True)


def _lattice(w, h, spacing, origin, periodic):
    cx = CellComplex()
    ox, oy = origin
    for y in range(h):
        for x in range(w):
            cx.add_cell(0, anchor=(ox + spacing * x, oy + spacing * y))
    mx = w if periodic else w - 1
    my = h if periodic else h - 1

    def vid(x, y):
        return (y % h) * w + (x % w)

    edges: dict[tuple[int, int], int] = {}

    def edge(a, b):
        key = (a, b) if a < b else (b, a)
        e = edges.get(key)
        if e is None:
            e = cx.add_cell(1, key)
            edges[key] = e
        return e

    for y in range(h):
        for x in range(w):
            if x < mx:
                edge(vid(x, y), vid(x + 1, y))
            if y < my:
                edge(vid(x, y), vid(x, y + 1))
            if x < mx and y < my:
                edge(vid(x, y), vid(x + 1, y + 1))
    for y in range(my):
        for x in range(mx):
            a, b, c, d = vid(x, y), vid(x + 1, y), vid(x, y + 1), vid(x + 1, y + 1)
            cx.add_cell(2, (edge(a, b), edge(b, d), edge(a, d)))
            cx.add_cell(2, (edge(a, c), edge(c, d), edge(a, d)))
    return cx


def simplicial_complex(vertices: Sequence[Sequence[float]] | int,
                       simplices: Iterable[Sequence[int]]) -> CellComplex:
    """Build the closure of a list of top simplices (dimension <= 2).

    ``vertices`` is either a vertex count or a list of coordinates.
    """
    cx = CellComplex()
    if isinstance(vertices, int):
        for _ in range(vertices):
            cx.add_cell(0)
        nv = vertices
    else:
        for p in vertices:
            cx.add_cell(0, anchor=p)
        nv = len(vertices)
    edges: dict[tuple[int, int], int] = {}
    tris: set[tuple[int, ...]] = set()

    def edge(a, b):
        key = (min(a, b), max(a, b))
        if key[0] == key[1]:
            raise ComplexError(f"degenerate edge {key}")
        e = edges.get(key)
        if e is None:
            e = cx.add_cell(1, key)
            edges[key] = e
        return e

    pending = []
    for s in simplices:
        s = tuple(int(v) for v in s)
        if any(not 0 <= v < nv for v in s):
            raise ComplexError(f"simplex {s} references a missing vertex")
        if len(s) == 2:
            edge(*s)
        elif len(s) == 3:
            a, b, c = s
            pending.append((edge(a, b), edge(b, c), edge(a, c)))
        elif len(s) != 1:
            raise ComplexError(f"only simplices of dimension <= 2 are supported, got {s}")
    for fs in pending:
        key = tuple(sorted(fs))
        if key not in tris:
            tris.add(key)
            cx.add_cell(2, fs)
    return cx


# -- invariants ----------------------------------------------------------

def euler_characteristic(cx: CellComplex) -> int:
    return sum((-1) ** p * n for p, n in enumerate(cx.counts()))


def _rank_mod2(rows: list[int]) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            low = r & -r
            p = pivots.get(low)
            if p is None:
                pivots[low] = r
                rank += 1
                break
            r ^= p
    return rank


def betti_mod2(cx: CellComplex) -> list[int]:
    """Betti numbers over GF(2), one per dimension 0..dim."""
    top = cx.dimension
    if top < 0:
        return []
    index = [0] * len(cx)
    for p in range(top + 1):
        for i, c in enumerate(cx.cells(p)):
            index[c] = i
    ranks = [0] * (top + 2)
    for p in range(1, top + 1):
        rows = []
        for c in cx.cells(p):
            r = 0
            for f in cx.faces(c):
                r ^= 1 << index[f]
            rows.append(r)
        ranks[p] = _rank_mod2(rows)
    counts = cx.counts()
    return [counts[p] - ranks[p] - ranks[p + 1] for p in range(top + 1)]


# -- OFF meshes ----------------------------------------------------------

def read_off(path) -> CellComplex:
    """Read an ASCII OFF mesh. Faces with 2 vertices are edges, 3 are triangles."""
    with open(path, encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or not tokens[0].endswith("OFF"):
        raise InputError(f"{path}: not an OFF file")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4
        verts = []
        for _ in range(nv):
            verts.append(tuple(float(t) for t in tokens[pos:pos + 3]))
            pos += 3
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            faces.append(tuple(int(t) for t in tokens[pos + 1:pos + 1 + k]))
            pos += 1 + k
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: truncated or malformed OFF body") from exc
    if len(verts) != nv or any(len(v) != 3 for v in verts):
        raise InputError(f"{path}: truncated vertex list")
    for f in faces:
        if len(f) not in (2, 3):
            raise InputError(f"{path}: face {f} is not an edge or triangle")
    try:
        return simplicial_complex(verts, faces)
    except ComplexError as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_off(cx: CellComplex, path) -> None:
    """Write vertices and top cells (edges not covered by triangles included)."""
    if not cx.is_simplicial() or cx.dimension > 2:
        raise ComplexError("only simplicial complexes of dimension <= 2 can be written")
    covered = set()
    for t in cx.cells(2):
        covered.update(cx.faces(t))
    faces = [cx.faces(e) for e in cx.cells(1) if e not in covered]
    faces += [_triangle_vertices(cx, t) for t in cx.cells(2)]
    lines = ["OFF", f"{len(cx.cells(0))} {len(faces)} 0"]
    for v in cx.cells(0):
        a = cx.anchor(v) or (0.0, 0.0)
        a = tuple(a) + (0.0,) * (3 - len(a))
        lines.append(" ".join(repr(float(x)) for x in a[:3]))
    for f in faces:
        lines.append(" ".join([str(len(f))] + [str(v) for v in f]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _triangle_vertices(cx, t):
    e0, e1, _ = cx.faces(t)
    a, b = cx.faces(e0)
    c = next(v for v in cx.faces(e1) if v not in (a, b))
    return (a, b, c)
