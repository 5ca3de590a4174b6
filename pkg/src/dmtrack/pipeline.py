"""End-to-end runs: load slices, build and simplify fields, extend, trace, serialize."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

from .errors import InputError
from .ingest import load_mesh_values, load_pgm_sequence
from .morse import DEFAULT_PATH_CAP, critical_counts
from .spacetime import ExtensionReport, SliceSequence, extend_general, extend_same_triangulation
from .tracking import BifurcationDiagram, build_diagram, track_labels

SCHEMA_VERSION = 1
EDGE_KINDS = ("forward", "backward", "strong", "birth", "death")


@dataclass
class PipelineConfig:
    inputs: list[str]
    kind: str = "pgm"  # "pgm" or "mesh"
    values: list[str] = field(default_factory=list)  # CSV files, mesh kind only
    mode: str = "minima"
    persistence: float = 0.0
    algorithm: str = "auto"  # "same", "general" or "auto"
    directions: str = "both"  # "forward", "backward" or "both"
    times: list[float] | None = None
    distance: str = "euclidean"
    cap: int = DEFAULT_PATH_CAP

    def __post_init__(self):
        self.persistence = float(self.persistence)
        if not self.persistence >= 0 or math.isinf(self.persistence):
            raise InputError("persistence must be a finite number >= 0")
        for name, allowed in (("kind", ("pgm", "mesh")), ("mode", ("minima", "maxima")),
                              ("algorithm", ("same", "general", "auto")),
                              ("directions", ("forward", "backward", "both")),
                              ("distance", ("euclidean", "graph"))):
            if getattr(self, name) not in allowed:
                raise InputError(f"{name} must be one of {', '.join(allowed)}")
        if self.kind == "mesh" and len(self.values) != len(self.inputs):
            raise InputError("mesh input needs one value file per mesh")

    def echo(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class DiagramDocument:
    """Serializable bifurcation diagram. Node ids are "slice:cell"."""

    slices: list[dict]
    nodes: list[dict]
    edges: list[dict]
    provenance: dict
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "slices": self.slices,
                "nodes": self.nodes, "edges": self.edges, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> DiagramDocument:
        try:
            doc = cls(d["slices"], d["nodes"], d["edges"], d["provenance"],
                      d["schema_version"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"not a diagram document: missing {exc}") from exc
        if doc.schema_version != SCHEMA_VERSION:
            raise InputError(f"unsupported schema version {doc.schema_version}")
        doc.check()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> DiagramDocument:
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc

    def check(self) -> None:
        """Every edge endpoint is a listed node and every kind is known."""
        ids = {n["id"] for n in self.nodes}
        for e in self.edges:
            if e["kind"] not in EDGE_KINDS:
                raise InputError(f"unknown edge kind {e['kind']!r}")
            for end in (e["source"], e["target"]):
                if end not in ids:
                    raise InputError(f"edge endpoint {end} is not a node")

    def node(self, node_id: str) -> dict:
        for n in self.nodes:
            if n["id"] == node_id:
                return n
        raise KeyError(node_id)

    def edges_of(self, kind: str) -> list[dict]:
        return [e for e in self.edges if e["kind"] == kind]


def node_id(key) -> str:
    return f"{key[0]}:{key[1]}"


def _num(x):
    # JSON has no inf/nan; values are finite by construction
    return float(x) if x is not None else None


def diagram_document(S: SliceSequence, d: BifurcationDiagram, fields,
                     provenance: dict, value_sign: float = 1.0) -> DiagramDocument:
    labels = track_labels(d, dim=None)
    slices = []
    for i, (M, V) in enumerate(zip(S.complexes, fields)):
        slices.append({"index": i, "time": _num(S.times[i]),
                       "source": S.sources[i] if S.sources else None,
                       "critical_counts": critical_counts(M, V)})
    nodes = []
    for n in d.nodes:
        nodes.append({"id": node_id(n.key), "slice": n.slice, "cell": n.cell, "dim": n.dim,
                      "value": None if n.value is None else _num(value_sign * n.value),
                      "anchor": None if n.anchor is None else [_num(a) for a in n.anchor],
                      "label": labels.get(n.key)})
    edges = []
    for kind, group in (("forward", d.forward), ("backward", d.backward), ("strong", d.strong)):
        for e in group:
            edges.append({"kind": kind, "source": node_id(e.source), "target": node_id(e.target),
                          "dim": e.dim, "multiplicity": e.multiplicity,
                          "witness": list(e.witness)})
    dims = {n.key: n.dim for n in d.nodes}
    for m in d.births + d.deaths:
        k = node_id((m.slice, m.cell))
        edges.append({"kind": m.kind, "source": k, "target": k,
                      "dim": dims[(m.slice, m.cell)], "multiplicity": 1, "witness": []})
    doc = DiagramDocument(slices, nodes, edges, provenance)
    doc.check()
    return doc


@dataclass
class Analysis:
    sequence: SliceSequence
    fields: list
    forward: ExtensionReport | None
    backward: ExtensionReport | None
    diagram: BifurcationDiagram


def analyze(S: SliceSequence, config: PipelineConfig) -> Analysis:
    """Fields at the configured persistence, extensions in the requested directions, diagram."""
    fields = S.gradient_fields(config.persistence)
    Sf = S.with_fields(fields)
    algorithm = config.algorithm
    if algorithm == "auto":
        algorithm = "same" if S.same_triangulation() else "general"

    def extend(seq):
        if algorithm == "same":
            return extend_same_triangulation(seq)
        return extend_general(seq, distance=config.distance, cap=config.cap)

    fwd = extend(Sf) if config.directions in ("forward", "both") else None
    bwd = extend(Sf.reversed()) if config.directions in ("backward", "both") else None
    diagram = build_diagram(Sf, fwd, bwd, cap=config.cap)
    return Analysis(Sf, fields, fwd, bwd, diagram)


def load_sequence(config: PipelineConfig) -> SliceSequence:
    if config.kind == "pgm":
        return load_pgm_sequence(config.inputs, mode=config.mode, times=config.times)
    general = config.algorithm == "general"
    return load_mesh_values(config.inputs, config.values, mode=config.mode,
                            general=general, times=config.times)


def run_pipeline(config: PipelineConfig) -> DiagramDocument:
    S = load_sequence(config)
    a = analyze(S, config)
    sign = -1.0 if config.mode == "maxima" else 1.0
    return diagram_document(a.sequence, a.diagram, a.fields, config.echo(), sign)
