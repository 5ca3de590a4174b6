import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import E12, E23
from dmtrack.complex import (circle_complex, euler_characteristic, freudenthal_grid,
                             path_complex, torus_grid)
from dmtrack.errors import CancellationError, ComplexError
from dmtrack.gradient_build import (PersistencePair, VertexField, cancel_pair, cell_value,
                                    cell_values, gradient_paths_between, lower_star_field,
                                    persistence_simplify)
from dmtrack.morse import critical_cells, critical_counts, is_gradient, vpaths_from
from dmtrack.synthetic import lattice_saddle, pit_frames
from oracles import hasse_acyclic, lex_minima, steepest_descent_1d


def complexes():
    return st.one_of(
        st.integers(2, 15).map(path_complex),
        st.integers(3, 15).map(circle_complex),
        st.tuples(st.integers(2, 7), st.integers(2, 7)).map(lambda s: freudenthal_grid(*s)),
        st.tuples(st.integers(3, 5), st.integers(3, 5)).map(lambda s: torus_grid(*s)),
    )


@st.composite
def sampled(draw, ties=False):
    cx = draw(complexes())
    n = len(cx.cells(0))
    if ties:
        vals = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    else:
        vals = draw(st.permutations(range(n)))
    return cx, VertexField(np.array(vals, dtype=float))


# -- vertex fields ------------------------------------------------------

def test_rank_breaks_ties_by_index():
    vf = VertexField(np.array([1.0, 0.0, 1.0, 0.0]))
    assert vf.rank == [2, 0, 3, 1]
    assert vf.key(2) == (1.0, 2)


def test_vertex_field_rejects_nan():
    with pytest.raises(ValueError):
        VertexField(np.array([0.0, np.nan]))


def test_cell_value_is_monotone():
    cx = freudenthal_grid(3, 3)
    vf = VertexField(np.array([5, 1, 4, 2, 8, 0, 7, 3, 6], dtype=float))
    vals = cell_values(cx, vf)
    for c in cx.cells():
        cv = cell_value(cx, vf, c)
        assert cv.value == vals[c]
        for f in cx.faces(c):
            assert cell_value(cx, vf, f) <= cv


# -- lower star ---------------------------------------------------------

def test_lower_star_circle_fixture(circle4):
    cx, vf, V = circle4
    assert critical_cells(cx, V) == {0, 2, E12, E23}
    assert critical_cells(cx, V) == steepest_descent_1d(cx, vf.values)


@given(st.integers(2, 30), st.booleans())
def test_monotone_path_has_one_critical_vertex(n, up):
    cx = path_complex(n)
    vals = np.arange(n, dtype=float) * (1 if up else -1)
    V = lower_star_field(cx, VertexField(vals))
    assert critical_cells(cx, V) == {0 if up else n - 1}


@pytest.mark.parametrize("eps", [0.5, 0.25, 0.1, 1 / 3])
def test_lattice_saddle_origin_is_a_minimum(eps):
    cx, vals, origin = lattice_saddle(eps)
    V = lower_star_field(cx, VertexField(vals))
    assert V.is_critical(origin)
    assert origin in lex_minima(cx, vals)


@given(sampled())
def test_lower_star_is_gradient(case):
    cx, vf = case
    V = lower_star_field(cx, vf)
    assert is_gradient(cx, V) and hasse_acyclic(cx, V)


@given(sampled(ties=True))
def test_critical_vertices_are_lex_minima(case):
    cx, vf = case
    V = lower_star_field(cx, vf)
    assert critical_cells(cx, V, 0) == lex_minima(cx, vf.values)


@given(sampled())
def test_pairs_stay_in_one_lower_star(case):
    cx, vf = case
    V = lower_star_field(cx, vf)
    rank = vf.rank
    top = lambda c: max(cx.vertices(c), key=rank.__getitem__)
    for a, b in V.pairs():
        assert top(a) == top(b)


@given(st.integers(3, 15).map(circle_complex), st.data())
def test_lower_star_matches_steepest_descent_on_curves(cx, data):
    vals = np.array(data.draw(st.permutations(range(len(cx.cells(0))))), dtype=float)
    V = lower_star_field(cx, VertexField(vals))
    assert critical_cells(cx, V) == steepest_descent_1d(cx, vals)


def test_lower_star_rejects_wrong_value_count():
    cx = path_complex(3)
    with pytest.raises(ComplexError):
        lower_star_field(cx, VertexField(np.zeros(4)))


# -- paths and cancellation ---------------------------------------------

def test_paths_between_fixture(circle4):
    cx, _, V = circle4
    assert gradient_paths_between(cx, V, E12, 2) == 1
    assert gradient_paths_between(cx, V, E23, 0) == 1
    # cross-check with explicit enumeration
    for beta, alpha in ((E12, 2), (E23, 0)):
        assert sum(p.end == alpha for p in vpaths_from(cx, V, beta)) == 1


def test_paths_between_unreachable():
    cx = path_complex(5)
    V = lower_star_field(cx, VertexField(np.array([0.0, 3.0, 1.0, 4.0, 2.0])))
    e12 = 6
    assert critical_cells(cx, V) == {0, 2, 4, e12, 8}
    assert gradient_paths_between(cx, V, e12, 4) == 0
    assert gradient_paths_between(cx, V, e12, 0) == 1


def test_cancel_fixture(circle4):
    cx, _, V = circle4
    W = cancel_pair(cx, V, 2, E12)
    assert critical_cells(cx, W) == {0, E23}
    assert is_gradient(cx, W)
    cc = critical_counts(cx, W)
    assert cc[0] - cc[1] == euler_characteristic(cx) == 0
    assert critical_cells(cx, V) == {0, 2, E12, E23}  # input untouched


def test_cancel_with_two_paths_fails():
    cx = circle_complex(3)
    V = lower_star_field(cx, VertexField(np.array([0.0, 1.0, 2.0])))
    assert critical_cells(cx, V) == {0, 4}
    assert gradient_paths_between(cx, V, 4, 0) == 2
    with pytest.raises(CancellationError):
        cancel_pair(cx, V, 0, 4)


def test_cancel_needs_critical_cells(circle4):
    cx, _, V = circle4
    with pytest.raises(CancellationError):
        cancel_pair(cx, V, 1, E12)


@given(sampled())
def test_cancellation_properties(case):
    cx, vf = case
    V = lower_star_field(cx, vf)
    crit = critical_cells(cx, V)
    for b in sorted(crit):
        if cx.dim(b) == 0:
            continue
        for a in sorted(crit):
            if cx.dim(a) != cx.dim(b) - 1 or gradient_paths_between(cx, V, b, a) != 1:
                continue
            W = cancel_pair(cx, V, a, b)
            assert is_gradient(cx, W) and hasse_acyclic(cx, W)
            assert critical_cells(cx, W) == crit - {a, b}
            path = next(p for p in vpaths_from(cx, V, b) if p.end == a)
            touched = set(path.cells) | {b}
            for x, y in V.pairs():
                if x not in touched and y not in touched:
                    assert W.up(x) == y
            return


# -- persistence --------------------------------------------------------

def test_persistence_zero_is_identity(circle4):
    cx, vf, V = circle4
    assert persistence_simplify(cx, V, vf, 0) is V


def test_persistence_fixture(circle4):
    cx, vf, V = circle4
    log = []
    W = persistence_simplify(cx, V, vf, 1.5, log=log)
    assert critical_cells(cx, W) == {0, E23}
    assert log == [PersistencePair(2, E12, 1.0)]


def test_persistence_rejects_negative(circle4):
    cx, vf, V = circle4
    with pytest.raises(ValueError):
        persistence_simplify(cx, V, vf, -1)


@given(sampled(), st.floats(0.5, 20), st.floats(0.5, 20))
def test_persistence_idempotent_and_monotone(case, p1, p2):
    cx, vf = case
    p1, p2 = sorted((p1, p2))
    V = lower_star_field(cx, vf)
    W1 = persistence_simplify(cx, V, vf, p1)
    W2 = persistence_simplify(cx, V, vf, p2)
    assert is_gradient(cx, W1) and is_gradient(cx, W2)
    assert persistence_simplify(cx, W1, vf, p1) == W1
    assert critical_cells(cx, W2) <= critical_cells(cx, W1) <= critical_cells(cx, V)
    cc = critical_counts(cx, W2)
    assert sum((-1) ** p * c for p, c in enumerate(cc)) == euler_characteristic(cx)


def test_persistence_log_pairs_are_below_threshold():
    cx = freudenthal_grid(8, 8)
    vals = np.random.default_rng(3).uniform(0, 10, 64)
    vf = VertexField(vals)
    V = lower_star_field(cx, vf)
    log = []
    persistence_simplify(cx, V, vf, 4.0, log=log)
    assert log and all(0 <= p.persistence < 4.0 for p in log)


def test_pit_frame_simplifies_to_five_minima():
    frames, _ = pit_frames(n_frames=1)
    cx = freudenthal_grid(64, 64)
    vf = VertexField(frames[0].astype(float).ravel())
    V = lower_star_field(cx, vf)
    assert critical_counts(cx, V)[0] > 20
    W = persistence_simplify(cx, V, vf, 30)
    assert critical_counts(cx, W)[0] == 5
    assert is_gradient(cx, W)
