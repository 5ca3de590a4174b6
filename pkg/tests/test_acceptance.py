"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line which the terminal summary prints.
"""
import time

import numpy as np
import pytest

from dmtrack.complex import (betti_mod2, circle_complex, euler_characteristic, freudenthal_grid,
                             path_complex, torus_grid, write_off)
from dmtrack.gradient_build import VertexField, lower_star_field
from dmtrack.ingest import (bundled_circle_paths, load_mesh_values, load_pgm_sequence, write_pgm,
                            write_values)
from dmtrack.morse import critical_cells, critical_counts, is_gradient
from dmtrack.pipeline import DiagramDocument, PipelineConfig, analyze, run_pipeline
from dmtrack.spacetime import SliceSequence, extend_general, extend_same_triangulation
from dmtrack.synthetic import (circle_with_extrema, cubic_critical_counts, cubic_slices,
                               lattice_saddle, pit_frames)
from dmtrack.tracking import build_diagram

RESULTS: dict[int, str] = {}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def random_complex(rng):
    kind = rng.integers(3)
    if kind == 0:
        return path_complex(int(rng.integers(2, 40)))
    if kind == 1:
        return circle_complex(int(rng.integers(3, 40)))
    return freudenthal_grid(int(rng.integers(2, 9)), int(rng.integers(2, 9)))


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(2024)
    out = []
    for _ in range(1000):
        cx = random_complex(rng)
        out.append((cx, VertexField(rng.permutation(len(cx.cells(0))).astype(float))))
    return out


def test_criterion_1_gradient_soundness(corpus):
    t0 = time.perf_counter()
    bad = sum(not is_gradient(cx, lower_star_field(cx, vf)) for cx, vf in corpus)
    dt = time.perf_counter() - t0
    report(1, bad == 0 and dt < 10,
           f"{len(corpus)} complexes, {bad} non-gradient, {dt:.2f}s (limit 10s)")


def test_criterion_2_euler_and_morse_inequalities(corpus):
    euler_bad = 0
    for cx, vf in corpus:
        cc = critical_counts(cx, lower_star_field(cx, vf))
        euler_bad += sum((-1) ** p * c for p, c in enumerate(cc)) != euler_characteristic(cx)
    rng = np.random.default_rng(7)
    ineq_bad = 0
    fixtures = {"circle": circle_complex(12), "disk": freudenthal_grid(6, 6),
                "torus": torus_grid(5, 5)}
    for cx in fixtures.values():
        betti = betti_mod2(cx)
        for _ in range(50):
            vf = VertexField(rng.permutation(len(cx.cells(0))).astype(float))
            cc = critical_counts(cx, lower_star_field(cx, vf))
            ineq_bad += any(c < b for c, b in zip(cc, betti))
    report(2, euler_bad == 0 and ineq_bad == 0,
           f"Euler violations {euler_bad}/{len(corpus)}, Morse-inequality violations "
           f"{ineq_bad}/150")


def test_criterion_3_algorithm_one_exact():
    rng = np.random.default_rng(11)
    failures = 0
    for _ in range(200):
        if rng.random() < 0.5:
            M = circle_complex(int(rng.integers(3, 16)))
        else:
            M = freudenthal_grid(int(rng.integers(2, 6)), int(rng.integers(2, 6)))
        n = len(M.cells(0))
        k = int(rng.integers(2, 9))
        S = SliceSequence([M] * k, None,
                          [VertexField(rng.permutation(n).astype(float)) for _ in range(k)])
        ext = extend_same_triangulation(S)
        X = ext.spacetime
        crit = critical_cells(X.complex, ext.field)
        want = {X.slice_cell(0, c) for c in critical_cells(M, ext.slice_fields[0])}
        failures += crit != want or not is_gradient(X.complex, ext.field)
    report(3, failures == 0, f"200 runs, {failures} with a critical set differing from slice 0")


def test_criterion_4_cubic_family(tmp_path):
    cx, times, values = cubic_slices()
    mesh = tmp_path / "line.off"
    write_off(cx, mesh)
    vpaths = []
    for i, v in enumerate(values):
        p = tmp_path / f"v{i:02d}.csv"
        write_values(p, v)
        vpaths.append(str(p))
    t0 = time.perf_counter()
    doc = run_pipeline(PipelineConfig([str(mesh)] * len(times), kind="mesh", values=vpaths,
                                      algorithm="same", times=times))
    dt = time.perf_counter() - t0
    spacing = 0.05
    mismatches, checked = [], 0
    for s in doc.slices:
        t = s["time"]
        if abs(t) <= spacing or abs(t - 0.125) <= spacing:
            continue
        checked += 1
        if tuple(s["critical_counts"][:2]) != cubic_critical_counts(t):
            mismatches.append((t, s["critical_counts"]))
    nodes = {n["id"]: n for n in doc.nodes}
    death_times = [doc.slices[nodes[e["source"]]["slice"]]["time"]
                   for e in doc.edges_of("death")]
    near = [t for t in death_times if abs(t - 0.125) <= spacing + 1e-9]
    report(4, not mismatches and bool(near) and dt < 5,
           f"{checked} slices checked, mismatches {mismatches}, deaths at {death_times}, "
           f"{dt:.2f}s (limit 5s)")


def test_criterion_5_lattice_counterexample():
    found = {}
    for eps in (0.5, 0.25, 0.1):
        cx, vals, origin = lattice_saddle(eps)
        V = lower_star_field(cx, VertexField(vals))
        found[eps] = V.is_critical(origin) and cx.dim(origin) == 0
    report(5, all(found.values()), f"origin critical of index 0: {found}")


def tracking_violations(S, fwd, bwd):
    d = build_diagram(S, fwd, bwd)
    bad = 0
    for i in range(1, len(S)):
        for n in d.nodes_at(i, 0):
            bad += sum(e.source == n.key for e in d.forward) != 1
    r = S.r
    for j in range(0, r):
        for n in d.nodes_at(j, 0):
            bad += sum(e.source == n.key for e in d.backward) != 1
    for dim in {e.dim for e in d.strong}:
        srcs = [e.source for e in d.strong if e.dim == dim]
        tgts = [e.target for e in d.strong if e.dim == dim]
        bad += len(srcs) != len(set(srcs)) or len(tgts) != len(set(tgts))
    return bad


def fields_sequence(complexes, values, times=None):
    S = SliceSequence(list(complexes), times, [VertexField(np.asarray(v, float)) for v in values])
    return S.with_fields(S.gradient_fields())


def test_criterion_6_vertex_tracking_uniqueness():
    cases = []
    grid = freudenthal_grid(4, 4)
    cases.append(fields_sequence([grid] * 2,
                                 [[15, 5, 8, 12, 14, 6, 1, 2, 3, 11, 9, 10, 13, 4, 0, 7],
                                  [15, 5, 8, 12, 14, 6, 13, 2, 3, 1, 9, 10, 11, 4, 0, 7]]))
    cases.append(fields_sequence([path_complex(5)] * 2, [[0, 1, 2, 3, 4], [0, 3, 4, 1, 2]]))
    cx, times, values = cubic_slices()
    cases.append(fields_sequence([cx] * len(times), values, times))
    rng = np.random.default_rng(5)
    for _ in range(100):
        M = random_complex(rng) if rng.random() < 0.5 else freudenthal_grid(4, 5)
        n = len(M.cells(0))
        base = rng.permutation(n).astype(float)
        vals = [base + rng.normal(0, 2.0, n) for _ in range(int(rng.integers(2, 6)))]
        cases.append(fields_sequence([M] * len(vals), vals))
    same_bad = sum(tracking_violations(S, extend_same_triangulation(S),
                                       extend_same_triangulation(S.reversed())) for S in cases)
    curves = []
    meshes, vpaths = bundled_circle_paths()
    B = load_mesh_values(meshes, vpaths, general=True)
    curves.append(B.with_fields(B.gradient_fields()))
    for _ in range(100):
        k = int(rng.integers(2, 5))
        sizes = rng.integers(3, 12, k)
        curves.append(fields_sequence(
            [circle_complex(int(m), phase=float(rng.uniform(0, 6.28))) for m in sizes],
            [rng.permutation(int(m)) for m in sizes]))
    general_bad = sum(tracking_violations(S, extend_general(S), extend_general(S.reversed()))
                      for S in curves)
    report(6, same_bad == 0 and general_bad == 0,
           f"{len(cases)} product-cell + {len(curves)} prism sequences (200 fuzz), "
           f"violations {same_bad + general_bad}")


def test_criterion_7_pits_persistence(tmp_path):
    frames, _ = pit_frames()
    paths = []
    for i, f in enumerate(frames):
        p = tmp_path / f"pit{i:02d}.pgm"
        write_pgm(p, f)
        paths.append(str(p))
    t0 = time.perf_counter()
    config = PipelineConfig(paths, persistence=30)
    S = load_pgm_sequence(paths)
    raw = [critical_counts(cx, lower_star_field(cx, vf))[0]
           for cx, vf in zip(S.complexes, S.vertex_fields)]
    a = analyze(S, config)
    dt = time.perf_counter() - t0
    simplified = [critical_counts(cx, V)[0] for cx, V in zip(S.complexes, a.fields)]
    tracks = a.diagram.tracks(0)
    full = [t for t in tracks if len({k[0] for k in t}) == 12]
    ok = (min(raw) > 20 and all(c == 5 for c in simplified) and len(full) == 5
          and len(tracks) == 5 and dt < 30)
    report(7, ok, f"raw minima {min(raw)}..{max(raw)}, simplified {sorted(set(simplified))}, "
                  f"{len(full)} of {len(tracks)} strong tracks span 12 frames, {dt:.2f}s "
                  f"(limit 30s)")


def test_criterion_8_algorithm_two():
    meshes, vpaths = bundled_circle_paths()
    S = load_mesh_values(meshes, vpaths, general=True)
    ext = extend_general(S)
    X = ext.spacetime
    grad = is_gradient(X.complex, ext.field)
    slice1 = critical_cells(S.complexes[1], ext.slice_fields[1])
    partners = [ext.field.up(X.slice_cell(1, c)) for c in slice1]
    matched = all(b is not None and X.complex.layer(b) == 1 for b in partners)
    survivors = ext.surviving_extras
    cx, vals = circle_with_extrema(8, 0.5, 3.6)
    T = fields_sequence([cx, cx], [vals, vals])
    a1 = extend_same_triangulation(T)
    a2 = extend_general(T)
    crit1 = a1.critical_slice_cells()
    crit2 = a2.critical_slice_cells()
    only_slices = (len(critical_cells(a1.spacetime.complex, a1.field)) == len(crit1)
                   and len(critical_cells(a2.spacetime.complex, a2.field)) == len(crit2))
    same = crit1 == crit2 and only_slices
    report(8, grad and matched and not survivors and same,
           f"gradient {grad}, slice-1 criticals matched {matched}, surviving extras "
           f"{survivors}, aligned cross-check equal {same}")


def test_criterion_9_determinism(tmp_path):
    meshes, vpaths = bundled_circle_paths()
    frames, _ = pit_frames(n_frames=3, size=32, n_pits=2, sigma=3)
    pgms = []
    for i, f in enumerate(frames):
        p = tmp_path / f"f{i}.pgm"
        write_pgm(p, f)
        pgms.append(str(p))
    configs = [PipelineConfig(meshes, kind="mesh", values=vpaths),
               PipelineConfig(pgms, persistence=10)]
    identical = round_trip = True
    for c in configs:
        a, b = run_pipeline(c).to_json(), run_pipeline(c).to_json()
        identical &= a == b
        round_trip &= DiagramDocument.from_json(a).to_json() == a
    report(9, identical and round_trip,
           f"repeat runs byte-identical {identical}, parse/re-export byte-identical {round_trip}")
