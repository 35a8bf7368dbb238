import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from dyadic import combinatorics as cb

PHI = (1 + math.sqrt(5)) / 2


def test_counts_small_k():
    # [PAPER] A_0..A_4
    assert [cb.count_tilings(k) for k in range(5)] == [1, 2, 7, 82, 11047]


def test_half_bisector_fraction_small_k():
    # [PAPER] f_2, f_3, f_4
    assert cb.half_bisector_fraction(2) == Fraction(1, 2)
    assert cb.half_bisector_fraction(3) == Fraction(4, 7)
    assert cb.half_bisector_fraction(4) == Fraction(49, 82)


@given(st.integers(3, 16))
def test_fraction_definitions_agree(k):
    assert cb.half_bisector_fraction(k) == cb.half_bisector_fraction_recurrence(k)


def test_fraction_increases_to_golden_conjugate():
    fs = [cb.half_bisector_fraction(k) for k in range(2, 17)]
    assert all(a < b for a, b in zip(fs, fs[1:]))
    assert all(float(f) < (math.sqrt(5) - 1) / 2 for f in fs)
    assert abs(float(fs[-1]) - (math.sqrt(5) - 1) / 2) < 1e-5


def test_subset_counts_sum():
    for k in range(2, 8):
        v, h, both = cb.subset_counts(k)
        # inclusion-exclusion over the two bisector events gives the recurrence
        assert v + h - both == cb.count_tilings(k)


def test_plus_ratio_identity_and_limit():
    for k in range(2, 17):
        r = cb.plus_ratio(k)
        f = cb.half_bisector_fraction(k)
        assert r == 2 / (f * f) - 1
        assert float(r) >= 2 * PHI + 1 - 1e-12
    assert abs(float(cb.plus_ratio(16)) - (2 * PHI + 1)) < 1e-4


def test_boundary_and_upsilon_counts():
    # [DERIVED] sizes from direct scans in the enumeration tests
    assert [cb.boundary_count(k) for k in (2, 3, 4)] == [2, 16, 1568]
    assert [cb.upsilon_count(k) for k in (2, 3, 4)] == [1, 4, 196]


def test_upsilon_margin_nonnegative():
    for k in range(2, 17):
        assert cb.upsilon_bound_margin(k) >= 0


def test_variance_limit():
    # [PAPER] var -> (1/4)(1 - 1/(2 phi + 1)^2)
    lim = 0.25 * (1 - 1 / (2 * PHI + 1) ** 2)
    assert abs(float(cb.variance_vertical_indicator(16)) - lim) < 1e-6


def test_rayleigh_closed_form_k4():
    # [DERIVED] boundary/(2n A_k) with |boundary| = 1568, n = 16
    assert cb.dirichlet_vertical_indicator(4) == Fraction(1568, 32 * 11047)
    v = Fraction(6724, 11047)
    assert cb.variance_vertical_indicator(4) == v * (1 - v)


def test_growth_constant_converges():
    # [PAPER] omega = 1.84454757...
    assert abs(cb.growth_constant_estimate(12) - cb.OMEGA) < 1e-6


def test_mpmath_helpers():
    with mpmath.workdps(cb.PRECISION_DIGITS):
        assert abs(cb.mp_phi() ** 2 - cb.mp_phi() - 1) < mpmath.mpf(10) ** -50
        assert cb.to_mp(Fraction(1, 3)) * 3 == 1


def test_fraction_str():
    assert cb.fraction_str(Fraction(49, 82)) == "49/82"


def test_guards():
    with pytest.raises(ValueError):
        cb.count_tilings(-1)
    with pytest.raises(ValueError):
        cb.count_tilings(cb.K_CAP + 1)
    assert cb.count_tilings(cb.K_CAP + 1, cap=cb.K_CAP + 1) > 0
    with pytest.raises(ValueError):
        cb.half_bisector_fraction(1)


def test_count_report_shape():
    r = cb.count_report(4)
    assert r["A_k"] == "11047" and r["f_k"] == "49/82" and r["n"] == 16
