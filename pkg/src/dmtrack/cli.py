"""Command line entry point: ``dmtrack analyze`` and ``dmtrack export``."""
from __future__ import annotations

import argparse
import glob
import sys

from .errors import DMTError, InputError, NotACurveError
from .ingest import read_times
from .pipeline import DiagramDocument, PipelineConfig, run_pipeline

EXIT_OK, EXIT_INPUT, EXIT_PIPELINE = 0, 2, 3


def _expand(patterns):
    out = []
    for pat in patterns:
        hits = sorted(glob.glob(pat))
        if not hits:
            raise InputError(f"no files match {pat!r}")
        out.extend(hits)
    return out


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmtrack",
                                description="Track critical cells of time-varying data "
                                            "with discrete Morse theory.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="build a bifurcation diagram from frames or meshes")
    a.add_argument("--input", nargs="+", required=True,
                   help="PGM frames or OFF meshes (globs allowed, sorted by name)")
    a.add_argument("--values", nargs="+", default=[],
                   help="CSV vertex values, one file per mesh (mesh kind)")
    a.add_argument("--kind", choices=["pgm", "mesh"], default="pgm")
    a.add_argument("--mode", choices=["minima", "maxima"], default="minima")
    a.add_argument("--persistence", type=float, default=0.0)
    a.add_argument("--algorithm", choices=["same", "general", "auto"], default="auto")
    a.add_argument("--directions", choices=["forward", "backward", "both"], default="both")
    a.add_argument("--distance", choices=["euclidean", "graph"], default="euclidean",
                   help="how the general algorithm picks the nearest critical cell")
    a.add_argument("--times", help="CSV file with one time per slice")
    a.add_argument("--out", required=True, help="output JSON document")

    e = sub.add_parser("export", help="render a JSON diagram document")
    e.add_argument("document", help="JSON file written by analyze")
    e.add_argument("--format", choices=["json", "dot", "svg", "overlay"], required=True)
    e.add_argument("--out", required=True, help="output file (directory for overlay)")
    e.add_argument("--frames", nargs="+", default=[], help="PGM frames for overlay")
    e.add_argument("--dims", type=int, nargs="+", help="only cells of these dimensions")
    return p


def _analyze(args) -> None:
    inputs = _expand(args.input)
    values = _expand(args.values) if args.values else []
    times = read_times(args.times) if args.times else None
    config = PipelineConfig(inputs=inputs, kind=args.kind, values=values, mode=args.mode,
                            persistence=args.persistence, algorithm=args.algorithm,
                            directions=args.directions, times=times, distance=args.distance)
    doc = run_pipeline(config)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(doc.to_json())
    counts = {k: len(doc.edges_of(k)) for k in ("forward", "strong", "birth", "death")}
    print(f"{len(doc.slices)} slices, {len(doc.nodes)} critical cells, "
          + ", ".join(f"{v} {k}" for k, v in counts.items()))


def _export(args) -> None:
    from . import export

    try:
        with open(args.document, encoding="utf-8") as fh:
            doc = DiagramDocument.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"{args.document}: {exc.strerror}") from exc
    if args.format == "json":
        export.export_json(doc, args.out)
    elif args.format == "dot":
        export.export_dot(doc, args.out, dims=args.dims)
    elif args.format == "svg":
        export.export_svg(doc, args.out, dims=args.dims)
    else:
        frames = _expand(args.frames) if args.frames else [s["source"] for s in doc.slices]
        if any(f is None for f in frames):
            raise InputError("overlay export needs --frames")
        try:
            export.export_overlays(doc, frames, args.out, dims=args.dims or (0,))
        except ValueError as exc:
            raise InputError(str(exc)) from exc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "analyze":
            _analyze(args)
        else:
            _export(args)
    except (InputError, NotACurveError) as exc:
        print(f"dmtrack: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DMTError as exc:
        print(f"dmtrack: pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
