import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadic import chains as ch, spectral as sp
from dyadic.errors import ConvergenceError

from _oracles import brute_edge_matrix
from test_chains import _index_of

# [DERIVED] from dense eigvalsh (k <= 3) and Lanczos (k = 4), frozen
GAPS = {
    ("edge", 1): 0.5,
    ("edge", 2): (2 - math.sqrt(2)) / 8,
    ("edge", 3): 0.012110457910837313,
    ("edge", 4): 0.002147043395285486,
    ("block", 2): (2 - math.sqrt(2)) / 8,
    ("block", 3): 0.09198468211078326,
    ("block", 4): 0.09930421932486277,
}


@pytest.mark.parametrize("kind,k", [key for key in GAPS if key[1] <= 3])
def test_gap_small(kind, k):
    r = sp.spectral_gap(ch.build_matrix(kind, k))
    assert r.converged and abs(r.gap - GAPS[kind, k]) < 1e-10
    assert abs(r.gap - sp.dense_gap(ch.build_matrix(kind, k))) < 1e-10


def test_gap_against_independent_matrix():
    P = np.array(brute_edge_matrix(3, _index_of(3)), dtype=float)
    ev = np.linalg.eigvalsh(P)
    assert abs(sp.edge_gap(3).gap - (1 - ev[-2])) < 1e-10


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["edge", "block"])
def test_gap_k4(kind):
    P = ch.build_matrix(kind, 4)
    r = sp.spectral_gap(P)
    assert abs(r.gap - GAPS[kind, 4]) < 1e-9
    assert abs(r.gap - sp.sparse_gap(P)) < 1e-9
    assert r.residual < 1e-5


def test_report_fields():
    r = sp.edge_gap(2)
    d = r.to_dict()
    assert d["dimension"] == 7 and d["chain"] == "edge" and d["k"] == 2
    assert math.isclose(d["relaxation_time"], 1 / d["gap"])
    assert '"lambda2"' in r.to_json()


def test_thread_count_does_not_change_result():
    P = ch.build_edge_matrix(3)
    a, b = sp.spectral_gap(P, threads=1), sp.spectral_gap(P, threads=4)
    assert a.lambda2 == b.lambda2 and a.iterations == b.iterations


def test_nonconvergence_raises():
    with pytest.raises(ConvergenceError):
        sp.spectral_gap(ch.build_edge_matrix(3), max_iter=150)


def test_bad_arguments():
    with pytest.raises(ValueError):
        sp.spectral_gap(ch.build_edge_matrix(2), tol=0)


def test_disconnected_rejected():
    from scipy.sparse import csr_matrix

    counts = csr_matrix(np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))
    with pytest.raises(ValueError, match="disconnected"):
        sp.spectral_gap(ch.SparseSymmetricStochastic(counts, 2))


@settings(max_examples=25)
@given(st.lists(st.integers(-5, 5), min_size=7, max_size=7))
def test_variance_identities(vals):
    assert math.isclose(sp.variance(vals), sp.variance_pairwise(vals), abs_tol=1e-12)
    assert math.isclose(float(sp.variance_exact(vals)), sp.variance(vals), abs_tol=1e-12)
    P = ch.build_block_matrix(2)
    assert math.isclose(float(sp.dirichlet_exact(P, vals)), sp.dirichlet(P, vals), abs_tol=1e-12)


@settings(max_examples=25)
@given(st.lists(st.floats(-3, 3), min_size=82, max_size=82))
def test_rayleigh_at_least_gap(vals):
    # any non-constant function has Rayleigh quotient >= gap
    if np.ptp(vals) < 1e-3:
        return
    P = ch.build_edge_matrix(3)
    assert sp.rayleigh(P, vals) >= GAPS["edge", 3] - 1e-12


def test_rayleigh_rejects_constant():
    with pytest.raises(ValueError):
        sp.rayleigh(ch.build_edge_matrix(2), [1.0] * 7)


def test_dirichlet_by_definition():
    P = ch.build_edge_matrix(2)
    f = np.arange(7.0)
    dense = P.to_dense()
    ref = 0.5 * sum(dense[i, j] * (f[i] - f[j]) ** 2 for i in range(7) for j in range(7)) / 7
    assert math.isclose(sp.dirichlet(P, f), ref)


@pytest.mark.parametrize("k", [3, 4])
def test_gap_recursion(k):
    r = sp.verify_gap_recursion(k, samples=20)
    assert r.holds and r.comparison_holds
    assert r.gap - r.product > 0


def test_gap_recursion_guard():
    with pytest.raises(ValueError):
        sp.verify_gap_recursion(5)


def test_lower_bound_values():
    # [DERIVED] exact Rayleigh quotients of the vertical-bisector indicator
    expect = {2: Fraction(7, 48), 3: Fraction(82, 1617), 4: Fraction(541303, 29067852)}
    for k, q in expect.items():
        r = sp.lower_bound_check(k)
        assert r.rayleigh == q and r.holds and r.formula_agrees
        d = r.to_dict()
        assert d["rayleigh"] == f"{q.numerator}/{q.denominator}"


def test_formula_bounds_hold():
    rows = sp.formula_rayleigh_bounds(12)
    assert [r["k"] for r in rows] == list(range(2, 13))
    assert all(r["holds"] for r in rows)


def test_asymptotic_variance_matches_series():
    P = ch.build_edge_matrix(2)
    f = np.zeros(7)
    f[0] = 1
    f0 = f - f.mean()
    dense = P.to_dense()
    total, v = f0 @ f0 / 7, f0.copy()
    for _ in range(5000):
        v = dense @ v
        total += 2 * (f0 @ v) / 7
    assert math.isclose(sp.asymptotic_variance(P, f), total, rel_tol=1e-8)
