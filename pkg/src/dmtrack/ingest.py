"""Loading slice sequences from PGM frames or OFF meshes with CSV vertex values."""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .complex import CellComplex, freudenthal_grid, read_off
from .errors import InputError, NotACurveError
from .gradient_build import VertexField
from .spacetime import SliceSequence, _cycle_order

_WHITESPACE = b" \t\r\n\v\f"


def read_pgm(path) -> np.ndarray:
    """Binary (P5) PGM with maxval <= 255, as a (height, width) uint8 array."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    if data[:2] != b"P5":
        raise InputError(f"{path}: not a binary PGM (P5) file")
    pos = 2
    fields = []
    while len(fields) < 3:
        # skip whitespace and comments between header tokens
        while pos < len(data) and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise InputError(f"{path}: malformed PGM header")
        fields.append(int(tok))
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise InputError(f"{path}: malformed PGM header")
    pos += 1
    w, h, maxval = fields
    if w == 0 or h == 0:
        raise InputError(f"{path}: empty image")
    if not 0 < maxval <= 255:
        raise InputError(f"{path}: maxval {maxval} unsupported (must be 1..255)")
    body = data[pos:pos + w * h]
    if len(body) != w * h:
        raise InputError(f"{path}: expected {w * h} pixels, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).copy()


def write_pgm(path, img: np.ndarray, comments: Sequence[str] = ()) -> None:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("PGM images are two-dimensional")
    if img.dtype != np.uint8:
        if img.min() < 0 or img.max() > 255:
            raise ValueError("pixel values must lie in 0..255")
        img = img.astype(np.uint8)
    h, w = img.shape
    header = b"P5\n"
    for c in comments:
        header += b"# " + c.replace("\n", " ").encode("utf-8") + b"\n"
    header += f"{w} {h}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + img.tobytes())


def read_values(path) -> np.ndarray:
    """CSV of one float per line (blank lines and '#' comments ignored)."""
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    out.append(float(line.split(",")[0]))
                except ValueError as exc:
                    raise InputError(f"{path}:{n}: not a number: {line!r}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    arr = np.array(out, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: values must be finite")
    return arr


def write_values(path, values) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join(f"{float(v)!r}\n" for v in values))


def read_times(path) -> list[float]:
    return read_values(path).tolist()


def _check_mode(mode):
    if mode not in ("minima", "maxima"):
        raise InputError(f"mode must be 'minima' or 'maxima', not {mode!r}")


def load_pgm_sequence(paths: Sequence[str], *, mode: str = "minima",
                      times: Sequence[float] | None = None) -> SliceSequence:
    """One Freudenthal grid slice per frame; pixel intensities are the vertex values."""
    _check_mode(mode)
    if not paths:
        raise InputError("no input frames")
    frames = [read_pgm(p) for p in paths]
    shape = frames[0].shape
    for p, f in zip(paths, frames):
        if f.shape != shape:
            raise InputError(f"{p}: frame is {f.shape[1]}x{f.shape[0]}, "
                             f"expected {shape[1]}x{shape[0]}")
    h, w = shape
    cx = freudenthal_grid(w, h)
    sign = -1.0 if mode == "maxima" else 1.0
    vfs = [VertexField(sign * f.astype(float).ravel()) for f in frames]
    return _sequence([cx] * len(frames), vfs, times, [os.fspath(p) for p in paths])


def load_mesh_values(mesh_paths: Sequence[str], value_paths: Sequence[str], *,
                     mode: str = "minima", general: bool = False,
                     times: Sequence[float] | None = None) -> SliceSequence:
    """OFF meshes with one CSV value file each. ``general`` requires closed curves."""
    _check_mode(mode)
    if not mesh_paths:
        raise InputError("no input meshes")
    if len(mesh_paths) != len(value_paths):
        raise InputError(f"{len(mesh_paths)} meshes but {len(value_paths)} value files")
    sign = -1.0 if mode == "maxima" else 1.0
    complexes, vfs = [], []
    for mp, vp in zip(mesh_paths, value_paths):
        cx = read_off(mp)
        vals = read_values(vp)
        nv = len(cx.cells(0))
        if len(vals) != nv:
            raise InputError(f"{vp}: {len(vals)} values for {nv} vertices of {mp}")
        if general:
            try:
                _cycle_order(cx)
            except NotACurveError as exc:
                raise NotACurveError(f"{mp}: {exc}") from exc
        complexes.append(cx)
        vfs.append(VertexField(sign * vals))
    sources = [os.fspath(p) for p in mesh_paths]
    return _sequence(complexes, vfs, times, sources)


def _sequence(complexes, vfs, times, sources):
    if times is not None and len(times) != len(complexes):
        raise InputError(f"{len(times)} times for {len(complexes)} slices")
    try:
        return SliceSequence(list(complexes), None if times is None else list(times),
                             vfs, None, sources)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def bundled_circle_paths() -> tuple[list[str], list[str]]:
    """OFF and CSV files of the bundled 6-vertex / 8-vertex circle sequence."""
    here = os.path.join(os.path.dirname(__file__), "data")
    meshes = [os.path.join(here, f"circle{n}.off") for n in (6, 8)]
    values = [os.path.join(here, f"circle{n}.csv") for n in (6, 8)]
    return meshes, values
