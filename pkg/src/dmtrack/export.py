"""Renderings of a DiagramDocument: JSON, Graphviz DOT, SVG plot and annotated PGM frames."""
from __future__ import annotations

import os
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .ingest import read_pgm, write_pgm
from .pipeline import DiagramDocument

_MARKER_SHAPE = {"birth": "triangle", "death": "invtriangle"}


def export_json(doc: DiagramDocument, path=None) -> str:
    text = doc.to_json()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _dot_id(node_id: str) -> str:
    return '"' + node_id + '"'


def export_dot(doc: DiagramDocument, path=None, *, dims: Iterable[int] | None = None,
               backward: bool = False) -> str:
    """Digraph with one rank per slice; strong edges drawn thick and gray."""
    keep = None if dims is None else set(dims)
    nodes = [n for n in doc.nodes if keep is None or n["dim"] in keep]
    ids = {n["id"] for n in nodes}
    markers = {}
    for e in doc.edges:
        if e["kind"] in _MARKER_SHAPE and e["source"] in ids:
            markers.setdefault(e["source"], e["kind"])
    lines = ["digraph bifurcation {", "  rankdir=LR;", "  node [shape=circle, fontsize=10];"]
    by_slice: dict[int, list[dict]] = {}
    for n in nodes:
        by_slice.setdefault(n["slice"], []).append(n)
    for s in sorted(by_slice):
        lines.append(f"  subgraph slice_{s} {{")
        lines.append("    rank=same;")
        for n in by_slice[s]:
            label = f"{n['id']} d{n['dim']}"
            if n.get("label"):
                label += f" {n['label']}"
            attrs = [f'label="{label}"']
            if n["id"] in markers:
                attrs.append(f"shape={_MARKER_SHAPE[markers[n['id']]]}")
                attrs.append(f'xlabel="{markers[n["id"]]}"')
            lines.append(f"    {_dot_id(n['id'])} [{', '.join(attrs)}];")
        lines.append("  }")
    kinds = ("forward", "backward", "strong") if backward else ("forward", "strong")
    style = {"forward": "", "backward": " [style=dashed]",
             "strong": " [penwidth=4, color=gray, dir=none]"}
    for kind in kinds:
        for e in doc.edges_of(kind):
            if e["source"] in ids and e["target"] in ids:
                lines.append(f"  {_dot_id(e['source'])} -> {_dot_id(e['target'])}{style[kind]};")
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def export_svg(doc: DiagramDocument, path=None, *, dims: Iterable[int] | None = None,
               width: int = 640, height: int = 400) -> str:
    """Slice index on the horizontal axis, critical cells (by id) on the vertical one.

    Forward edges are thin black lines; strong connections thick gray ones.
    """
    keep = None if dims is None else set(dims)
    nodes = [n for n in doc.nodes if keep is None or n["dim"] in keep]
    n_slices = max(len(doc.slices), 1)
    cells = sorted({(n["dim"], n["cell"]) for n in nodes})
    row = {c: k for k, c in enumerate(cells)}
    margin = 40

    def x(s):
        return margin + (width - 2 * margin) * (s / (n_slices - 1) if n_slices > 1 else 0.5)

    def y(n):
        k = row[(n["dim"], n["cell"])]
        span = max(len(cells) - 1, 1)
        return height - margin - (height - 2 * margin) * (k / span if len(cells) > 1 else 0.5)

    pos = {n["id"]: (x(n["slice"]), y(n)) for n in nodes}
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    for s in range(len(doc.slices)):
        out.append(f'<text x="{x(s):.2f}" y="{height - 10}" font-size="10" '
                   f'text-anchor="middle">{s}</text>')

    def lines_for(kind, attrs):
        for e in doc.edges_of(kind):
            if e["source"] in pos and e["target"] in pos:
                (x1, y1), (x2, y2) = pos[e["source"]], pos[e["target"]]
                out.append(f'<line class="{kind}" x1="{x1:.2f}" y1="{y1:.2f}" '
                           f'x2="{x2:.2f}" y2="{y2:.2f}" {attrs}/>')

    lines_for("strong", 'stroke="gray" stroke-width="5"')
    lines_for("forward", 'stroke="black" stroke-width="1"')
    for n in nodes:
        cx, cy = pos[n["id"]]
        fill = "black" if n["dim"] == 0 else "white"
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="{fill}" stroke="black">'
                   f'<title>{escape(n["id"])}</title></circle>')
        if n.get("label"):
            out.append(f'<text x="{cx + 5:.2f}" y="{cy - 5:.2f}" font-size="9">'
                       f'{escape(n["label"])}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _draw_cross(img: np.ndarray, cx: int, cy: int, arm: int = 3) -> None:
    h, w = img.shape
    ink = 0 if img[min(max(cy, 0), h - 1), min(max(cx, 0), w - 1)] > 127 else 255
    for d in range(-arm, arm + 1):
        if 0 <= cy < h and 0 <= cx + d < w:
            img[cy, cx + d] = ink
        if 0 <= cx < w and 0 <= cy + d < h:
            img[cy + d, cx] = ink


def export_overlays(doc: DiagramDocument, frames: Sequence, out_dir, *,
                    dims: Iterable[int] = (0,), prefix: str = "overlay") -> list[str]:
    """Copy each frame with a cross on every labelled critical cell.

    ``frames`` are arrays or PGM paths. Labels and positions go into header
    comments, so the same letter marks the same strong track in every frame.
    """
    if len(frames) != len(doc.slices):
        raise ValueError(f"{len(frames)} frames for {len(doc.slices)} slices")
    keep = set(dims)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, frame in enumerate(frames):
        img = read_pgm(frame) if isinstance(frame, (str, os.PathLike)) else np.array(frame)
        img = img.astype(np.uint8).copy()
        comments = []
        for n in doc.nodes:
            if n["slice"] != i or n["dim"] not in keep or not n.get("label") or not n["anchor"]:
                continue
            px, py = int(round(n["anchor"][0])), int(round(n["anchor"][1]))
            _draw_cross(img, px, py)
            comments.append(f"label {n['label']} at {px} {py}")
        p = os.path.join(out_dir, f"{prefix}_{i:03d}.pgm")
        write_pgm(p, img, comments)
        paths.append(p)
    return paths


def read_overlay_labels(path) -> list[tuple[str, int, int]]:
    """(label, x, y) triples written into an overlay's header comments."""
    out = []
    with open(path, "rb") as fh:
        data = fh.read()
    for line in data.split(b"\n"):
        if line.startswith(b"# label "):
            _, _, lab, _, xs, ys = line.decode("utf-8").split()
            out.append((lab, int(xs), int(ys)))
        elif line and not line.startswith((b"#", b"P5")):
            break
    return out
