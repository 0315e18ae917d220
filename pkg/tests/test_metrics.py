import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from sscmo.grid import SolutionPoint, filter_dominated
from sscmo.metrics import (EmptyFront, IdealPoint, amid, as_array, asns, gap, gapm, r2, report,
                           simplex_weights)

finite = st.floats(-1e9, 1e9, allow_nan=False)


def cloud(seed, n=20):
    return np.random.default_rng(seed).uniform(-100, 100, size=(n, 3))


# -- gap ------------------------------------------------------------------------

def test_gap_examples():
    assert gap(5.0, 5.0) == 0.0
    assert gap(0.0, 0.0) == 0.0
    assert gap(90.0, 100.0) == pytest.approx(0.1)
    assert gap(-9226710432.092, -9263916889.431) == pytest.approx(0.004016, abs=5e-7)


@given(finite, finite)
def test_gap_symmetric_and_bounded(a, b):
    g = gap(a, b)
    assert g == gap(b, a)
    assert 0.0 <= g <= 2.0


# -- gapm, amid, asns -------------------------------------------------------------

def test_gapm_examples():
    ideal = IdealPoint(1.0, 2.0, 3.0)
    assert gapm((1.0, 2.0, 3.0), ideal) == 0.0
    # one coordinate off by 30 percent
    assert gapm((10.0, 2.0, 3.0), IdealPoint(7.0, 2.0, 3.0)) == pytest.approx(0.3)


@given(st.tuples(finite, finite, finite), st.tuples(finite, finite, finite))
def test_gapm_matches_recomputation(f, ideal):
    want = 0.0
    for a, b in zip(f, ideal):
        den = max(abs(a), abs(b))
        want += (abs(a - b) / den) ** 2 if den else 0.0
    assert gapm(f, ideal) == pytest.approx(math.sqrt(want))


def test_amid_asns_two_points():
    ideal = (10.0, 10.0, 10.0)
    front = [(8.0, 10.0, 10.0), (6.0, 10.0, 10.0)]   # gapm 0.2 and 0.4
    assert amid(front, ideal) == pytest.approx(0.3)
    assert asns(front, ideal) == pytest.approx(math.sqrt(0.02))


def test_singleton_at_ideal():
    assert amid([(1.0, 2.0, 3.0)], (1.0, 2.0, 3.0)) == 0.0
    assert asns([(4.0, 2.0, 3.0)], (1.0, 2.0, 3.0)) == 0.0


def test_empty_front_raises():
    with pytest.raises(EmptyFront):
        amid([], (0, 0, 0))
    with pytest.raises(EmptyFront):
        asns(np.zeros((0, 3)), (0, 0, 0))
    with pytest.raises(EmptyFront):
        r2([], [(1, 2, 3)])


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        as_array([(1.0, math.inf, 0.0)])


@given(st.integers(0, 2**31))
def test_amid_asns_permutation_invariant(seed):
    F = cloud(seed)
    perm = np.random.default_rng(seed + 1).permutation(len(F))
    ideal = F.min(axis=0)
    assert amid(F[perm], ideal) == pytest.approx(amid(F, ideal), rel=1e-12)
    assert asns(F[perm], ideal) == pytest.approx(asns(F, ideal), rel=1e-12)


def test_filter_can_raise_amid():
    # dropping a dominated point removes a low gapm value along with it
    ideal = (10.0, 10.0, 10.0)
    front = [(9.0, 10.0, 10.0), (8.0, 10.5, 10.0), (9.0, 10.0, 10.5)]
    kept = filter_dominated(front)
    assert len(kept) == 2
    assert amid(kept, ideal) > amid(front, ideal)


@given(st.integers(0, 2**31))
def test_filter_keeps_best_gapm(seed):
    # the point nearest the ideal survives filtering, so the minimum never worsens
    F = np.round(cloud(seed, 30))
    ideal = F.min(axis=0)
    kept = np.array(filter_dominated([tuple(r) for r in F]))
    assert min(gapm(r, ideal) for r in kept) <= min(gapm(r, ideal) for r in F) + 1e-12


# -- r2 -------------------------------------------------------------------------

def test_simplex_weights():
    W = simplex_weights(105)
    assert len(W) == 105 and np.allclose(W.sum(axis=1), 1.0) and W.min() >= 0
    assert len(simplex_weights(100)) == 105
    assert np.allclose(simplex_weights(1), [[1 / 3, 1 / 3, 1 / 3]])
    with pytest.raises(ValueError):
        simplex_weights(0)


@given(st.integers(0, 2**31), st.integers(1, 30))
def test_r2_of_front_with_itself_is_zero(seed, n):
    F = cloud(seed, n)
    assert r2(F, F) == 0.0
    assert r2(F, F, ideal=F.min(axis=0) - 5.0) == 0.0


@given(st.integers(0, 2**31), st.floats(0.5, 50.0))
def test_r2_positive_for_shifted_clone(seed, delta):
    Z = cloud(seed, 10)
    A = Z + delta
    assert r2(A, Z) > 0.0
    assert r2(Z, A) < 0.0


def test_report_shape():
    A = [(1.0, 5.0, 3.0), (2.0, 4.0, 3.0)]
    rep = report(A)
    assert set(rep) == {"amid", "asns", "r2", "n_points", "ideal"}
    assert rep["r2"] == 0.0 and rep["n_points"] == 2
    assert rep["ideal"] == {"eco": 1.0, "env": 4.0, "soc": 3.0}
    ip = IdealPoint.from_json(rep["ideal"])
    assert ip == IdealPoint.of(A)


def test_accepts_solution_points():
    pts = [SolutionPoint({}, {"eco": 1.0, "env": 2.0, "soc": 3.0})]
    assert as_array(pts).tolist() == [[1.0, 2.0, 3.0]]
