"""Discrete vector fields, V-paths and Morse-function checks."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .complex import CellComplex, CellId
from .errors import ComplexError, InvalidMorseFunction, NotGradientError, PathCapExceeded

DEFAULT_PATH_CAP = 10 ** 6

MorseValues = Union[Sequence[float], Mapping[int, float]]


class CellClass(enum.Enum):
    CRITICAL = "critical"
    ARROW_TAIL = "tail"
    ARROW_HEAD = "head"


class DiscreteVectorField:
    """A partial matching of p-cells with (p+1)-cofaces.

    ``up[a] == b`` means V(a) = b and then ``down[b] == a``; unmatched
    entries are -1. Instances are not mutated once handed out; the
    underscore methods are for builders that own a fresh field.
    """

    __slots__ = ("_up", "_down")

    def __init__(self, size: int, up: list[int] | None = None,
                 down: list[int] | None = None):
        self._up = up if up is not None else [-1] * size
        self._down = down if down is not None else [-1] * size

    @classmethod
    def from_pairs(cls, cx: CellComplex, pairs: Iterable[tuple[int, int]]) -> DiscreteVectorField:
        v = cls(len(cx))
        for a, b in pairs:
            if b not in cx.cofaces(a):
                raise ComplexError(f"pair ({a}, {b}): {a} is not a face of {b}")
            if v._up[a] >= 0 or v._down[a] >= 0 or v._up[b] >= 0 or v._down[b] >= 0:
                raise ComplexError(f"pair ({a}, {b}) reuses a matched cell")
            v._pair(a, b)
        return v

    def __len__(self) -> int:
        return sum(1 for b in self._up if b >= 0)

    @property
    def size(self) -> int:
        return len(self._up)

    def up(self, a: CellId) -> CellId | None:
        b = self._up[a]
        return b if b >= 0 else None

    def down(self, b: CellId) -> CellId | None:
        a = self._down[b]
        return a if a >= 0 else None

    def is_critical(self, c: CellId) -> bool:
        return self._up[c] < 0 and self._down[c] < 0

    def pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a, b in enumerate(self._up) if b >= 0]

    def copy(self) -> DiscreteVectorField:
        return DiscreteVectorField(len(self._up), list(self._up), list(self._down))

    def __eq__(self, other) -> bool:
        return isinstance(other, DiscreteVectorField) and self._up == other._up

    def __hash__(self):
        return hash(tuple(self._up))

    def __repr__(self) -> str:
        return f"DiscreteVectorField({len(self)} pairs over {self.size} cells)"

    def _pair(self, a: int, b: int) -> None:
        self._up[a] = b
        self._down[b] = a

    def _unpair(self, a: int) -> None:
        b = self._up[a]
        if b >= 0:
            self._up[a] = -1
            self._down[b] = -1


@dataclass(frozen=True)
class VPath:
    """Alternating cells a0, b0, a1, ..., with V(a_i) = b_i and a_{i+1} < b_i."""

    cells: tuple[int, ...]

    @property
    def start(self) -> int:
        return self.cells[0]

    @property
    def end(self) -> int:
        return self.cells[-1]

    @property
    def r(self) -> int:
        return (len(self.cells) - 3) // 2

    def __len__(self) -> int:
        return len(self.cells)


def is_vpath(cx: CellComplex, V: DiscreteVectorField, cells: Sequence[int]) -> bool:
    if len(cells) % 2 == 0:
        return False
    for i in range(0, len(cells) - 1, 2):
        a, b, nxt = cells[i], cells[i + 1], cells[i + 2]
        if V.up(a) != b or nxt not in cx.faces(b) or nxt == a:
            return False
    return True


# -- Morse functions -----------------------------------------------------

@dataclass(frozen=True)
class Violation:
    cell: int
    condition: int  # 1: too many low cofaces, 2: too many high faces
    offending: tuple[int, ...]


def validate_morse_function(cx: CellComplex, f: MorseValues) -> list[Violation]:
    out = []
    for c in cx.cells():
        fc = f[c]
        low = tuple(b for b in cx.cofaces(c) if f[b] <= fc)
        if len(low) > 1:
            out.append(Violation(c, 1, low))
        high = tuple(g for g in cx.faces(c) if f[g] >= fc)
        if len(high) > 1:
            out.append(Violation(c, 2, high))
    return out


def field_from_function(cx: CellComplex, f: MorseValues) -> DiscreteVectorField:
    """Gradient field of a discrete Morse function: a -> b whenever a < b and f(b) <= f(a)."""
    bad = validate_morse_function(cx, f)
    if bad:
        raise InvalidMorseFunction(f"{len(bad)} violations, first at cell {bad[0].cell}")
    pairs = [(a, b) for a in cx.cells() for b in cx.cofaces(a) if f[b] <= f[a]]
    return DiscreteVectorField.from_pairs(cx, pairs)


# -- classification ------------------------------------------------------

def classify(cx: CellComplex, V: DiscreteVectorField, c: CellId) -> CellClass:
    if V.up(c) is not None:
        return CellClass.ARROW_TAIL
    if V.down(c) is not None:
        return CellClass.ARROW_HEAD
    return CellClass.CRITICAL


def critical_cells(cx: CellComplex, V: DiscreteVectorField, dim: int | None = None) -> set[int]:
    return {c for c in cx.cells(dim) if V.is_critical(c)}


def critical_counts(cx: CellComplex, V: DiscreteVectorField) -> list[int]:
    return [sum(1 for c in cx.cells(p) if V.is_critical(c)) for p in range(cx.dimension + 1)]


def is_gradient(cx: CellComplex, V: DiscreteVectorField) -> bool:
    """No closed V-path, i.e. the modified Hasse diagram is acyclic.

    A directed cycle must alternate between two consecutive dimensions, so
    the search runs over p-cells with a -> a' for a' a face of V(a), a' != a.
    """
    up = V._up
    faces = cx._faces
    state = bytearray(len(up))
    for start, b0 in enumerate(up):
        if b0 < 0 or state[start]:
            continue
        state[start] = 1
        stack = [(start, iter(faces[b0]))]
        while stack:
            a, it = stack[-1]
            for nxt in it:
                if nxt == a or up[nxt] < 0:
                    continue
                s = state[nxt]
                if s == 1:
                    return False
                if s == 0:
                    state[nxt] = 1
                    stack.append((nxt, iter(faces[up[nxt]])))
                    break
            else:
                state[a] = 2
                stack.pop()
    return True


def descend_vertex(cx: CellComplex, V: DiscreteVectorField, v: CellId) -> CellId:
    """Follow v -> V(v) -> other endpoint until an unmatched vertex is reached."""
    steps = 0
    limit = len(cx.cells(0))
    while True:
        e = V.up(v)
        if e is None:
            return v
        a, b = cx.faces(e)
        v = b if a == v else a
        steps += 1
        if steps > limit:
            raise NotGradientError("closed V-path while descending")


# -- path flows ----------------------------------------------------------

class PathFlow:
    """Memoized count of V-paths from a set of start cells to target cells.

    The V-path graph of a gradient field is a DAG, so counts are computed by
    a post-order search rather than by enumerating paths. ``allow`` limits
    the (p+1)-cells a path may pass through; with ``truncate`` a path stops
    at the first (p+1)-cell that has a target among its faces.
    """

    def __init__(self, cx: CellComplex, V: DiscreteVectorField, *,
                 is_target: Callable[[int], bool],
                 allow: Callable[[int], bool] | None = None,
                 truncate: bool = False,
                 cap: int | None = DEFAULT_PATH_CAP,
                 clip: int | None = None):
        self.cx = cx
        self.V = V
        self.is_target = is_target
        self.allow = allow
        self.truncate = truncate
        self.cap = cap
        self.clip = clip
        self.memo: dict[int, dict[int, int]] = {}

    def _step(self, a):
        """('target',) | ('dead',) | ('hit', hits, b) | ('go', succ, b)"""
        if self.is_target(a):
            return ("target",)
        b = self.V._up[a]
        if b < 0 or (self.allow is not None and not self.allow(b)):
            return ("dead",)
        succ = [x for x in self.cx._faces[b] if x != a]
        if self.truncate:
            hits = [x for x in succ if self.is_target(x)]
            if hits:
                return ("hit", hits, b)
        return ("go", succ, b)

    def counts(self, a: int) -> dict[int, int]:
        memo = self.memo
        if a in memo:
            return memo[a]
        gray: set[int] = set()
        expanded: dict[int, list[int]] = {}
        stack = [a]
        while stack:
            x = stack[-1]
            if x in memo:
                stack.pop()
                continue
            kids = expanded.get(x)
            if kids is None:
                st = self._step(x)
                if st[0] == "target":
                    memo[x] = {x: 1}
                    stack.pop()
                    continue
                if st[0] == "dead":
                    memo[x] = {}
                    stack.pop()
                    continue
                if st[0] == "hit":
                    memo[x] = {h: 1 for h in st[1]}
                    stack.pop()
                    continue
                kids = st[1]
                expanded[x] = kids
                gray.add(x)
                for k in kids:
                    if k in gray:
                        raise NotGradientError(f"closed V-path through cell {k}")
                    if k not in memo:
                        stack.append(k)
                continue
            acc: dict[int, int] = {}
            for k in kids:
                for t, n in memo[k].items():
                    acc[t] = acc.get(t, 0) + n
            self._limit(acc)
            memo[x] = acc
            gray.discard(x)
            stack.pop()
        return memo[a]

    def _limit(self, acc):
        for t, n in acc.items():
            if self.clip is not None and n > self.clip:
                acc[t] = self.clip
            elif self.cap is not None and n > self.cap:
                raise PathCapExceeded(f"more than {self.cap} V-paths reach cell {t}")

    def counts_from(self, starts: Iterable[int]) -> dict[int, int]:
        acc: dict[int, int] = {}
        for s in starts:
            for t, n in self.counts(s).items():
                acc[t] = acc.get(t, 0) + n
        self._limit(acc)
        return acc

    def witness(self, start: int, target: int) -> tuple[int, ...]:
        """The first path (in face order) from ``start`` to ``target``."""
        if target not in self.counts(start):
            raise ValueError(f"cell {target} is not reachable from {start}")
        cells = [start]
        a = start
        while a != target:
            st = self._step(a)
            if st[0] == "hit":
                cells += [st[2], target]
                break
            _, succ, b = st
            a = next(x for x in succ if target in self.counts(x))
            cells += [b, a]
        return tuple(cells)


def vpaths_from(cx: CellComplex, V: DiscreteVectorField, beta: CellId, *,
                cap: int = DEFAULT_PATH_CAP) -> list[VPath]:
    """All maximal V-paths that start at a face of ``beta``."""
    up = V._up
    flow = PathFlow(cx, V, is_target=lambda a: up[a] < 0, cap=cap)
    total = sum(flow.counts_from(cx.faces(beta)).values())
    if total > cap:
        raise PathCapExceeded(f"{total} maximal V-paths from cell {beta}")
    out = []
    for a0 in cx.faces(beta):
        stack = [(a0,)]
        while stack:
            cells = stack.pop()
            a = cells[-1]
            b = up[a]
            if b < 0:
                out.append(VPath(cells))
                continue
            nxt = [x for x in cx.faces(b) if x != a]
            for x in reversed(nxt):
                stack.append(cells + (b, x))
    return out
