from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyadic.tiling import (
    HORIZONTAL,
    VERTICAL,
    DyadicInterval,
    DyadicRectangle,
    HalfBisector,
    Quadrant,
    Tiling,
    TilingError,
    canonical_decode,
    canonical_encode,
    flip,
    half_bisectors,
    join,
    mirror,
    quadrant_equal,
    split,
    strips,
    symmetry_orbit,
    transpose,
    validate,
)

from _oracles import half_bisector_flags
from conftest import tilings


def test_interval_from_endpoints():
    iv = DyadicInterval.from_endpoints(Fraction(1, 4), Fraction(1, 2))
    assert (iv.a, iv.s) == (1, 2)
    assert iv.endpoints == (Fraction(1, 4), Fraction(1, 2))


@pytest.mark.parametrize("lo, hi", [(Fraction(1, 3), Fraction(2, 3)), (Fraction(1, 4), Fraction(3, 4)), (0, 0)])
def test_interval_rejects_non_dyadic(lo, hi):
    with pytest.raises(TilingError):
        DyadicInterval.from_endpoints(lo, hi)


def test_rectangle_area_and_box():
    r = DyadicRectangle(1, 1, 2, 2)
    assert r.area == Fraction(1, 8)
    assert r.grid_box(3) == (4, 4, 4, 2)


def test_unit_and_strips():
    u = Tiling.unit()
    assert u.k == 0 and u.n == 1 and u.encode() == "."
    assert strips(2, VERTICAL).encode() == "V(V(.,.),V(.,.))"
    assert strips(2, HORIZONTAL).encode() == "H(H(.,.),H(.,.))"


def test_validate_accepts_endpoint_pairs():
    t = validate([((0, "1/2"), (0, 1)), (("1/2", 1), (0, 1))], 1)
    assert t == strips(1, VERTICAL)


def test_validate_errors():
    with pytest.raises(TilingError) as e:
        validate([((0, 1), (0, 1))], 1)
    assert e.value.kind == "wrong-area"
    with pytest.raises(TilingError) as e:
        validate([((0, "1/2"), (0, 1))], 1)
    assert e.value.kind == "wrong-count"
    # right count and area but overlapping
    with pytest.raises(TilingError):
        validate([((0, "1/2"), (0, 1)), ((0, "1/2"), (0, 1))], 1)


def test_decode_rejects_malformed():
    for bad in ["", "V(.,.", "X(.,.)", "V(.,.))", "V(.;.)", "V(V(.,.),.)"]:
        with pytest.raises(TilingError):
            canonical_decode(bad)


def test_decode_accepts_noncanonical_and_normalises():
    # a 2x2 grid of squares can be split either way first; V is preferred
    t = canonical_decode("H(V(.,.),V(.,.))")
    assert t.encode() == "V(H(.,.),H(.,.))"


def test_bisectors():
    t = canonical_decode("V(H(.,.),H(.,.))")
    assert t.has_vertical_bisector() and t.has_horizontal_bisector()
    assert half_bisectors(t) == HalfBisector.LEFT | HalfBisector.RIGHT | HalfBisector.TOP | HalfBisector.BOTTOM
    s = strips(2, VERTICAL)
    assert half_bisectors(s) == HalfBisector.TOP | HalfBisector.BOTTOM


def test_split_and_join_roundtrip():
    t = canonical_decode("V(H(.,.),V(.,.))")
    lo, hi = split(t, VERTICAL)
    assert lo.encode() == "H(.,.)" and hi.encode() == "V(.,.)"
    assert join(lo, hi, VERTICAL) == t
    with pytest.raises(TilingError):
        split(strips(2, VERTICAL), HORIZONTAL)


def test_flip_examples():
    t = strips(1, VERTICAL)
    left = next(r for r in t.rects if r.a == 0)
    assert flip(t, left, 1) == strips(1, HORIZONTAL)   # right side of the left strip
    assert flip(t, left, 0) is None                     # nothing to its left
    assert flip(t, left, 2) is None                     # full-height rectangle has no top partner


def test_quadrant_equal():
    x = canonical_decode("V(H(.,.),V(.,.))")
    y = canonical_decode("V(H(.,.),H(.,.))")
    assert quadrant_equal(x, y, Quadrant.TL) and quadrant_equal(x, y, Quadrant.BL)
    assert not quadrant_equal(x, y, Quadrant.TR)


def test_symmetry_orbit_size():
    assert len(symmetry_orbit(strips(3, VERTICAL))) == 2
    assert len(symmetry_orbit(canonical_decode("V(H(.,.),V(.,.))"))) == 4


# -- properties --------------------------------------------------------------------

@given(tilings())
def test_encode_decode_roundtrip(t):
    s = canonical_encode(t)
    assert canonical_decode(s) == t
    assert canonical_decode(s).encode() == s
    assert validate(t.rects, t.k) == t


@given(tilings(min_k=1))
def test_split_join_inverse(t):
    for axis, has in ((VERTICAL, t.has_vertical_bisector()), (HORIZONTAL, t.has_horizontal_bisector())):
        if has:
            lo, hi = split(t, axis)
            assert lo.k == hi.k == t.k - 1
            assert join(lo, hi, axis) == t


@given(tilings(min_k=1))
def test_flags_match_bisectors(t):
    f = half_bisectors(t)
    assert int(f) == half_bisector_flags(t.rects)
    assert t.has_vertical_bisector() == bool(f & HalfBisector.TOP and f & HalfBisector.BOTTOM)
    assert t.has_horizontal_bisector() == bool(f & HalfBisector.LEFT and f & HalfBisector.RIGHT)


@given(tilings(min_k=1))
def test_flips_are_involutions(t):
    for r in t.ordered_rects:
        for side in range(4):
            u = flip(t, r, side)
            if u is not None:
                assert u != t and u.k == t.k
                assert any(flip(u, q, sd) == t for q in u.ordered_rects for sd in range(4))


@given(tilings())
def test_symmetries(t):
    assert transpose(transpose(t)) == t
    assert mirror(mirror(t)) == t
    orbit = symmetry_orbit(t)
    assert t in orbit and len(orbit) in (1, 2, 4, 8)
    assert transpose(t).has_vertical_bisector() == t.has_horizontal_bisector()


@given(st.integers(0, 6))
def test_strips_have_the_right_count(k):
    assert len(strips(k, VERTICAL).rects) == 1 << k
