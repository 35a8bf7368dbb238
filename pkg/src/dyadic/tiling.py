"""Dyadic tilings of the unit square.

A rectangle of a tiling of size ``2**k`` is stored as four integers
``(a, s, b, t)`` meaning ``[a/2**s, (a+1)/2**s] x [b/2**t, (b+1)/2**t]``;
every rectangle of such a tiling has ``s + t == k``.  All geometry is done
on these integers, so nothing here ever touches floating point.

The canonical tree of a tiling is either ``"."`` (a single rectangle) or a
tuple ``(axis, first, second)`` with ``axis`` in ``"V"``/``"H"``; for a
vertical split ``first`` is the left half, for a horizontal split it is the
bottom half.  A vertical split is used whenever a vertical bisector exists.
"""
from __future__ import annotations

import enum
from fractions import Fraction
from typing import Iterable, NamedTuple

LEAF = "."
VERTICAL = "V"
HORIZONTAL = "H"

# side order used everywhere a side is drawn at random
LEFT, RIGHT, TOP, BOTTOM = 0, 1, 2, 3
SIDE_NAMES = ("left", "right", "top", "bottom")


class TilingError(ValueError):
    """Invalid tiling data.  ``kind`` names the failed check."""

    KINDS = (
        "wrong-count",
        "wrong-area",
        "overlap",
        "coverage-gap",
        "non-dyadic-interval",
        "no-such-bisector",
        "mismatched-sizes",
        "malformed",
    )

    def __init__(self, kind: str, message: str = ""):
        assert kind in self.KINDS, kind
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


class DyadicInterval(NamedTuple):
    a: int
    s: int

    @classmethod
    def from_endpoints(cls, lo, hi) -> "DyadicInterval":
        lo, hi = Fraction(lo), Fraction(hi)
        length = hi - lo
        if length <= 0 or length.numerator != 1:
            raise TilingError("non-dyadic-interval", f"[{lo}, {hi}]")
        s = length.denominator.bit_length() - 1
        if 1 << s != length.denominator:
            raise TilingError("non-dyadic-interval", f"[{lo}, {hi}]")
        a = lo / length
        if a.denominator != 1 or not 0 <= a < (1 << s):
            raise TilingError("non-dyadic-interval", f"[{lo}, {hi}]")
        return cls(int(a), s)

    @property
    def endpoints(self) -> tuple[Fraction, Fraction]:
        d = 1 << self.s
        return Fraction(self.a, d), Fraction(self.a + 1, d)


class DyadicRectangle(NamedTuple):
    a: int
    s: int
    b: int
    t: int

    @classmethod
    def from_intervals(cls, x: DyadicInterval, y: DyadicInterval) -> "DyadicRectangle":
        return cls(x.a, x.s, y.a, y.s)

    @property
    def x_interval(self) -> DyadicInterval:
        return DyadicInterval(self.a, self.s)

    @property
    def y_interval(self) -> DyadicInterval:
        return DyadicInterval(self.b, self.t)

    @property
    def area(self) -> Fraction:
        return Fraction(1, 1 << (self.s + self.t))

    def grid_box(self, k: int) -> tuple[int, int, int, int]:
        """(x0, y0, w, h) in units of ``2**-k``."""
        sx, sy = k - self.s, k - self.t
        return self.a << sx, self.b << sy, 1 << sx, 1 << sy


class HalfBisector(enum.IntFlag):
    LEFT = 1
    RIGHT = 2
    TOP = 4
    BOTTOM = 8


ALL_HALF_BISECTORS = HalfBisector.LEFT | HalfBisector.RIGHT | HalfBisector.TOP | HalfBisector.BOTTOM


class Quadrant(enum.Enum):
    TL = "TL"
    TR = "TR"
    BL = "BL"
    BR = "BR"


# -- interval predicates on (a, s): does the interior meet the lower/upper half?

def _meets_low(a: int, s: int) -> bool:
    return s == 0 or a < (1 << (s - 1))


def _meets_high(a: int, s: int) -> bool:
    return s == 0 or a >= (1 << (s - 1))


def _split_rects(rects: Iterable[tuple], axis: str):
    """Map the two halves onto the unit square, or return None if a rectangle crosses."""
    lo, hi = [], []
    if axis == VERTICAL:
        for a, s, b, t in rects:
            if s == 0:
                return None
            half = 1 << (s - 1)
            if a < half:
                lo.append((a, s - 1, b, t))
            else:
                hi.append((a - half, s - 1, b, t))
    else:
        for a, s, b, t in rects:
            if t == 0:
                return None
            half = 1 << (t - 1)
            if b < half:
                lo.append((a, s, b, t - 1))
            else:
                hi.append((a, s, b - half, t - 1))
    return lo, hi


def _join_rects(lo: Iterable[tuple], hi: Iterable[tuple], axis: str) -> list:
    out = []
    if axis == VERTICAL:
        for a, s, b, t in lo:
            out.append(DyadicRectangle(a, s + 1, b, t))
        for a, s, b, t in hi:
            out.append(DyadicRectangle(a + (1 << s), s + 1, b, t))
    else:
        for a, s, b, t in lo:
            out.append(DyadicRectangle(a, s, b, t + 1))
        for a, s, b, t in hi:
            out.append(DyadicRectangle(a, s, b + (1 << t), t + 1))
    return out


def _decompose(rects: list, m: int):
    """Canonical tree of ``rects`` filling a region of size ``2**m``; raises on overlap/gap."""
    if not rects:
        raise TilingError("coverage-gap")
    if m == 0:
        if len(rects) > 1:
            raise TilingError("overlap", "repeated rectangle")
        return LEAF
    for axis in (VERTICAL, HORIZONTAL):
        halves = _split_rects(rects, axis)
        if halves is not None:
            return (axis, _decompose(halves[0], m - 1), _decompose(halves[1], m - 1))
    # a full-width and a full-height rectangle cross in the middle
    raise TilingError("overlap", "no bisector in a region of size > 1")


def _tree_to_rects(tree, depth: int = 0) -> tuple[list, int]:
    if tree == LEAF:
        return [DyadicRectangle(0, 0, 0, 0)], 0
    axis, lo, hi = tree
    lo_rects, m1 = _tree_to_rects(lo)
    hi_rects, m2 = _tree_to_rects(hi)
    if m1 != m2:
        raise TilingError("malformed", "unequal rectangle areas")
    return _join_rects(lo_rects, hi_rects, axis), m1 + 1


def _tree_to_string(tree) -> str:
    if tree == LEAF:
        return LEAF
    axis, lo, hi = tree
    return f"{axis}({_tree_to_string(lo)},{_tree_to_string(hi)})"


class Tiling:
    """An immutable dyadic tiling of size ``2**k``.

    Equality and hashing use the rectangle set.  Build instances with
    :func:`validate`, :func:`join`, :func:`canonical_decode` or
    :meth:`Tiling.unit`; the constructor trusts its input.
    """

    __slots__ = ("k", "rects", "_tree", "_ordered", "_encoding")

    def __init__(self, k: int, rects: frozenset, tree=None):
        self.k = k
        self.rects = rects
        self._tree = tree
        self._ordered = None
        self._encoding = None

    @classmethod
    def unit(cls) -> "Tiling":
        return cls(0, frozenset([DyadicRectangle(0, 0, 0, 0)]), LEAF)

    @classmethod
    def from_tree(cls, tree) -> "Tiling":
        rects, k = _tree_to_rects(tree)
        return cls(k, frozenset(rects))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tiling):
            return NotImplemented
        return self.k == other.k and self.rects == other.rects

    def __hash__(self) -> int:
        return hash(self.rects)

    def __repr__(self) -> str:
        return f"Tiling({self.encode()!r})"

    @property
    def n(self) -> int:
        return 1 << self.k

    @property
    def canonical_tree(self):
        if self._tree is None:
            self._tree = _decompose(list(self.rects), self.k)
        return self._tree

    def encode(self) -> str:
        if self._encoding is None:
            self._encoding = _tree_to_string(self.canonical_tree)
        return self._encoding

    @property
    def ordered_rects(self) -> tuple:
        """Rectangles sorted by the raster position ``(y0, x0)`` of their lower-left corner.

        This is the order in which a uniformly drawn rectangle rank is resolved.
        """
        if self._ordered is None:
            k = self.k
            self._ordered = tuple(
                sorted(self.rects, key=lambda r: (r[2] << (k - r[3]), r[0] << (k - r[1])))
            )
        return self._ordered

    def has_vertical_bisector(self) -> bool:
        return self.k > 0 and all(r[1] > 0 for r in self.rects)

    def has_horizontal_bisector(self) -> bool:
        return self.k > 0 and all(r[3] > 0 for r in self.rects)


def validate(rectangles, k: int) -> Tiling:
    """Check raw rectangles and return the tiling they form.

    ``rectangles`` may hold :class:`DyadicRectangle` values or pairs of
    endpoint pairs ``((x0, x1), (y0, y1))`` given as ints/Fractions/strings.
    """
    rects = []
    for r in rectangles:
        if isinstance(r, DyadicRectangle):
            for a, s in ((r.a, r.s), (r.b, r.t)):
                if s < 0 or not 0 <= a < (1 << s):
                    raise TilingError("non-dyadic-interval", repr(r))
            rects.append(r)
        else:
            (x0, x1), (y0, y1) = r
            rects.append(DyadicRectangle.from_intervals(
                DyadicInterval.from_endpoints(x0, x1), DyadicInterval.from_endpoints(y0, y1)))
    for r in rects:
        if r.s + r.t != k:
            raise TilingError("wrong-area", f"{r} has area {r.area}, expected 1/{1 << k}")
    if len(rects) != 1 << k:
        raise TilingError("wrong-count", f"{len(rects)} rectangles, expected {1 << k}")
    tree = _decompose(rects, k)
    return Tiling(k, frozenset(rects), tree)


def half_bisectors(t: Tiling) -> HalfBisector:
    if t.k < 1:
        raise ValueError("half-bisectors need k >= 1")
    flags = ALL_HALF_BISECTORS
    for a, s, b, tt in t.rects:
        if tt == 0:
            if _meets_low(a, s):
                flags &= ~HalfBisector.LEFT
            if _meets_high(a, s):
                flags &= ~HalfBisector.RIGHT
        if s == 0:
            if _meets_high(b, tt):
                flags &= ~HalfBisector.TOP
            if _meets_low(b, tt):
                flags &= ~HalfBisector.BOTTOM
    return flags


def split(t: Tiling, axis: str) -> tuple[Tiling, Tiling]:
    """Left/right (``"V"``) or bottom/top (``"H"``) halves, rescaled to the unit square."""
    if t.k == 0:
        raise TilingError("no-such-bisector", "the unit square has no bisector")
    halves = _split_rects(t.rects, axis)
    if halves is None:
        raise TilingError("no-such-bisector", f"no {'vertical' if axis == VERTICAL else 'horizontal'} bisector")
    lo = Tiling(t.k - 1, frozenset(DyadicRectangle(*r) for r in halves[0]))
    hi = Tiling(t.k - 1, frozenset(DyadicRectangle(*r) for r in halves[1]))
    return lo, hi


def join(lo: Tiling, hi: Tiling, axis: str) -> Tiling:
    if lo.k != hi.k:
        raise TilingError("mismatched-sizes", f"k={lo.k} and k={hi.k}")
    rects = frozenset(_join_rects(lo.rects, hi.rects, axis))
    tree = None
    if axis == VERTICAL and lo._tree is not None and hi._tree is not None:
        tree = (VERTICAL, lo._tree, hi._tree)
    return Tiling(lo.k + 1, rects, tree)


def quadrant_rects(t: Tiling, q: Quadrant) -> frozenset:
    """Rectangles whose interior meets quadrant ``q``."""
    want_left = q in (Quadrant.TL, Quadrant.BL)
    want_top = q in (Quadrant.TL, Quadrant.TR)
    fx = _meets_low if want_left else _meets_high
    fy = _meets_high if want_top else _meets_low
    return frozenset(r for r in t.rects if fx(r[0], r[1]) and fy(r[2], r[3]))


def quadrant_equal(x: Tiling, y: Tiling, q: Quadrant) -> bool:
    if x.k != y.k:
        raise TilingError("mismatched-sizes", f"k={x.k} and k={y.k}")
    return quadrant_rects(x, q) == quadrant_rects(y, q)


def canonical_encode(t: Tiling) -> str:
    return t.encode()


def _parse(text: str, pos: int):
    if pos >= len(text):
        raise TilingError("malformed", "unexpected end of input")
    c = text[pos]
    if c == LEAF:
        return LEAF, pos + 1
    if c not in (VERTICAL, HORIZONTAL) or text[pos + 1:pos + 2] != "(":
        raise TilingError("malformed", f"unexpected {c!r} at {pos}")
    lo, pos = _parse(text, pos + 2)
    if text[pos:pos + 1] != ",":
        raise TilingError("malformed", f"expected ',' at {pos}")
    hi, pos = _parse(text, pos + 1)
    if text[pos:pos + 1] != ")":
        raise TilingError("malformed", f"expected ')' at {pos}")
    return (c, lo, hi), pos + 1


def canonical_decode(text) -> Tiling:
    """Parse the tree grammar.  Non-canonical but well-formed trees are accepted;
    the returned tiling always re-encodes canonically."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    text = text.strip()
    tree, pos = _parse(text, 0)
    if pos != len(text):
        raise TilingError("malformed", f"trailing characters at {pos}")
    rects, k = _tree_to_rects(tree)
    t = Tiling(k, frozenset(rects))
    t.canonical_tree  # noqa: B018 - normalises and caches the canonical tree
    return t


def flip(t: Tiling, rect: DyadicRectangle, side: int) -> Tiling | None:
    """Flip ``side`` of ``rect`` if it bisects a dyadic rectangle of twice the area.

    Returns the new tiling, or None when the move is not a valid edge flip.
    """
    a, s, b, tt = rect
    rects = t.rects
    if side == LEFT or side == RIGHT:
        if s == 0:
            return None
        if side == LEFT:
            if a & 1 == 0:
                return None
            partner = DyadicRectangle(a - 1, s, b, tt)
        else:
            if a & 1 == 1:
                return None
            partner = DyadicRectangle(a + 1, s, b, tt)
        if partner not in rects:
            return None
        ua = a >> 1
        new = (DyadicRectangle(ua, s - 1, 2 * b, tt + 1), DyadicRectangle(ua, s - 1, 2 * b + 1, tt + 1))
    else:
        if tt == 0:
            return None
        if side == BOTTOM:
            if b & 1 == 0:
                return None
            partner = DyadicRectangle(a, s, b - 1, tt)
        else:
            if b & 1 == 1:
                return None
            partner = DyadicRectangle(a, s, b + 1, tt)
        if partner not in rects:
            return None
        ub = b >> 1
        new = (DyadicRectangle(2 * a, s + 1, ub, tt - 1), DyadicRectangle(2 * a + 1, s + 1, ub, tt - 1))
    return Tiling(t.k, (rects - {rect, partner}) | frozenset(new))


def strips(k: int, axis: str) -> Tiling:
    """``2**k`` full-height strips (``"V"``) or full-width strips (``"H"``)."""
    if axis == VERTICAL:
        rects = [DyadicRectangle(a, k, 0, 0) for a in range(1 << k)]
    else:
        rects = [DyadicRectangle(0, 0, b, k) for b in range(1 << k)]
    return Tiling(k, frozenset(rects))


def transpose(t: Tiling) -> Tiling:
    return Tiling(t.k, frozenset(DyadicRectangle(b, tt, a, s) for a, s, b, tt in t.rects))


def mirror(t: Tiling) -> Tiling:
    """Reflect through the line x = 1/2."""
    return Tiling(t.k, frozenset(DyadicRectangle((1 << s) - 1 - a, s, b, tt) for a, s, b, tt in t.rects))


def symmetry_orbit(t: Tiling) -> set[Tiling]:
    """Images of ``t`` under the eight symmetries of the square."""
    out = set()
    cur = t
    for _ in range(4):
        # x -> y, y -> 1 - x is a quarter turn
        cur = mirror(transpose(cur))
        out.add(cur)
        out.add(mirror(cur))
    return out
