from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from dyadic import coupling as cp
from dyadic.combinatorics import half_bisector_fraction
from dyadic.enumeration import enumerate_tilings
from dyadic.errors import SizeGuardError
from dyadic.tiling import HORIZONTAL, VERTICAL, canonical_decode, strips

from _oracles import brute_distance, brute_expected_distance
from conftest import tiling_pairs


@given(tiling_pairs())
def test_distance_properties(pair):
    x, y = pair
    d = cp.distance(cp.CoupledPair(x, y))
    assert d == cp.distance(cp.CoupledPair(y, x))
    assert (d == 0) == (x == y)
    assert d == brute_distance(x.rects, y.rects, cp.DEFAULT_B)


@settings(max_examples=25)
@given(tiling_pairs(k_values=(2, 3)))
def test_expectation_against_brute_force(pair):
    x, y = pair
    p = cp.DistanceParams(7)
    assert cp.expected_distance_after_step(cp.CoupledPair(x, y), p) == brute_expected_distance(x.rects, y.rects, 7)


@settings(max_examples=25)
@given(tiling_pairs(k_values=(3,)))
def test_case_bounds_hold_on_random_pairs(pair):
    x, y = pair
    if x == y:
        return
    pr = cp.CoupledPair(x, y)
    f = half_bisector_fraction(3)
    label = cp.classify_case(pr)
    e = cp.expected_distance_after_step(pr)
    assert e <= cp.case_bound(label, cp.distance(pr), f, cp.DEFAULT_B)
    if label == "1a":
        assert e == cp.distance(pr) - f * cp.DEFAULT_B


def test_case_1a_identity_example():
    x, y = strips(3, VERTICAL), strips(3, HORIZONTAL)
    pr = cp.CoupledPair(x, y)
    assert cp.classify_case(pr) == "1a"
    assert cp.distance(pr) == 4 * 64 + 4
    assert cp.expected_distance_after_step(pr) == 260 - Fraction(4, 7) * 64


def test_classification_examples():
    v = canonical_decode("V(H(.,.),H(.,.))")  # both bisectors
    assert cp.classify_case(cp.CoupledPair(v, strips(2, VERTICAL))) == "3a"
    assert cp.classify_case(cp.CoupledPair(v, canonical_decode("V(H(.,.),V(.,.))"))) == "3b(2)"
    assert cp.classify_case(cp.CoupledPair(canonical_decode("V(V(.,.),H(.,.))"),
                                           canonical_decode("V(H(.,.),V(.,.))"))) == "2d(0)"
    with pytest.raises(ValueError):
        cp.classify_case(cp.CoupledPair(v, v))


def test_every_label_is_bounded():
    f = half_bisector_fraction(4)
    for label in ["1a", "1b", "1c(0)", "1c(1)", "2a(0)", "2d(3)", "3a", "3b(0)", "3b(2)", "3c"]:
        assert cp.case_bound(label, 100, f, 64) <= 100
    with pytest.raises(ValueError):
        cp.case_bound("4x", 10, f, 64)


def test_pair_tables_match_objects():
    tab = cp.PairTables(3)
    idx = enumerate_tilings(3)
    rng = np.random.default_rng(0)
    xs, ys = rng.integers(0, 82, 30), rng.integers(0, 82, 30)
    s1, s2 = tab.step_sums(xs, ys)
    for n in range(30):
        pr = cp.CoupledPair(idx[xs[n]], idx[ys[n]])
        assert tab.l1(xs[n], ys[n]) == cp.l1(pr) and tab.l2(xs[n], ys[n]) == cp.l2(pr)
        assert Fraction(int(64 * s1[n] + s2[n]), tab.width) == cp.expected_distance_after_step(pr)


def test_exhaustive_survey_k3():
    r = cp.contraction_survey(3, exhaustive=True)
    assert r["pairs"] == 82 * 81 // 2
    assert r["bound_violations"] == 0 and r["equality_failures"] == 0 and r["ok"]
    assert r["cases"]["1a"]["count"] > 0
    # [DERIVED] exact worst ratio over all pairs
    assert r["max_ratio"] == "1773/1834" and not r["bounds_imply_target"]


def test_sampled_survey_k4_case_1a():
    r = cp.contraction_survey(4, sample_size=2000, seed=3, case_1a_samples=200)
    assert r["mode"] == "sampled" and r["ok"]
    assert r["case_1a_extra"]["cases"]["1a"]["count"] == 200


def test_case_1a_sampler():
    xs, ys = cp.case_1a_sample(4, 50, 1)
    idx = enumerate_tilings(4)
    assert all(int(idx.flags[i]) == cp.VBITS for i in xs)
    assert all(int(idx.flags[j]) == cp.HBITS for j in ys)


def test_target_b_range():
    assert cp.target_b_range(half_bisector_fraction(9)) is None
    lo, hi = cp.target_b_range(half_bisector_fraction(10))
    assert hi is None and lo > 64
    f = half_bisector_fraction(10)
    assert max(cp.implied_ratios(f, lo).values()) <= cp.TARGET
    assert max(cp.implied_ratios(f, lo - 1).values()) > cp.TARGET


def test_guards():
    with pytest.raises(ValueError):
        cp.DistanceParams(0)
    with pytest.raises(ValueError):
        cp.CoupledPair(strips(1, VERTICAL), strips(1, HORIZONTAL))
    with pytest.raises(SizeGuardError):
        cp.contraction_survey(5)


def test_coupled_step_is_synchronous():
    pr = cp.CoupledPair(strips(3, VERTICAL), strips(3, VERTICAL))
    rng = np.random.default_rng(1)
    for _ in range(20):
        pr = cp.coupled_step(pr, rng)
        assert pr.x == pr.y
