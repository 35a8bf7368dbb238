"""Coupled block dynamics, the weighted half-bisector/quadrant distance, and exact contraction surveys.

Two copies are driven by the same draw ``(rho, direction)``; each copy
retiles only if it has the bisector that direction needs.  The distance is
``b * l1 + l2`` where ``l1`` counts half-bisectors present in exactly one copy
and ``l2`` counts quadrants whose rectangle sets differ.

Case labels (for ``x != y``):

* ``1a``/``1b``/``1c(i)``: no common bisector, with 0/1/2 common half-bisectors;
  ``i`` is the number of equal quadrants.
* ``2a(i)``..``2d(i)``: a common bisector and neither copy has both.  The letter
  encodes the extra half-bisectors beyond the common bisector: none in either
  (a), in exactly one copy (b), the same one in both (c), opposite ones (d).
* ``3a``/``3b(i)``/``3c``: one copy has both bisectors and the other has
  2, 3 or 4 half-bisectors.
"""
from __future__ import annotations

import math

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .chains import apply_block_draw, apply_block_move, block_move_table, make_rng
from .combinatorics import half_bisector_fraction, fraction_str
from .enumeration import MAX_MATERIALIZED_K, enumerate_tilings
from .errors import SizeGuardError
from .tiling import HalfBisector, Quadrant, Tiling, half_bisectors, quadrant_equal

L, R, T, B = (int(HalfBisector.LEFT), int(HalfBisector.RIGHT),
              int(HalfBisector.TOP), int(HalfBisector.BOTTOM))
VBITS, HBITS = T | B, L | R
DEFAULT_B = 64
TARGET = Fraction(16, 17)
POPCOUNT = np.array([bin(i).count("1") for i in range(16)], dtype=np.int64)


@dataclass(frozen=True)
class DistanceParams:
    b: int = DEFAULT_B

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 1:
            raise ValueError("b must be a positive integer")


class CoupledPair:
    __slots__ = ("x", "y", "__dict__")

    def __init__(self, x: Tiling, y: Tiling):
        if x.k != y.k:
            raise ValueError("tilings of different sizes")
        if x.k < 2:
            raise ValueError("coupling needs k >= 2")
        self.x, self.y = x, y

    @cached_property
    def flags(self) -> tuple[int, int]:
        return int(half_bisectors(self.x)), int(half_bisectors(self.y))

    @cached_property
    def quadrants_equal(self) -> tuple[bool, ...]:
        return tuple(quadrant_equal(self.x, self.y, q) for q in Quadrant)

    def __repr__(self):
        return f"CoupledPair({self.x.encode()!r}, {self.y.encode()!r})"


def l1(pair: CoupledPair) -> int:
    fx, fy = pair.flags
    return bin(fx ^ fy).count("1")


def l2(pair: CoupledPair) -> int:
    return sum(not e for e in pair.quadrants_equal)


def distance(pair: CoupledPair, params: DistanceParams = DistanceParams()) -> int:
    return params.b * l1(pair) + l2(pair)


def coupled_step(pair: CoupledPair, rng: np.random.Generator, prev=None) -> CoupledPair:
    prev = enumerate_tilings(pair.x.k - 1) if prev is None else prev
    u = int(rng.integers(0, 4 * len(prev)))
    return CoupledPair(apply_block_draw(pair.x, u, prev), apply_block_draw(pair.y, u, prev))


# -- exact one-step expectations -------------------------------------------------

def _check_k(k: int) -> None:
    if not 2 <= k <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"exact coupling expectations need 2 <= k <= {MAX_MATERIALIZED_K}")


def expected_distance_after_step(pair: CoupledPair, params: DistanceParams = DistanceParams()) -> Fraction:
    """Exact ``E[d(x', y')]``, averaging over every (rho, direction) draw on tiling objects."""
    _check_k(pair.x.k)
    prev = enumerate_tilings(pair.x.k - 1)
    total = 0
    for rho in prev:
        for direction in range(4):
            nxt = CoupledPair(apply_block_move(pair.x, rho, direction), apply_block_move(pair.y, rho, direction))
            total += distance(nxt, params)
    return Fraction(total, 4 * len(prev))


class PairTables:
    """Vectorised distances and expectations over index pairs of one k."""

    def __init__(self, k: int):
        _check_k(k)
        idx = enumerate_tilings(k)
        self.k = k
        self.index = idx
        self.flags = idx.flags.astype(np.int64)
        self.quads = idx.quadrant_ids
        self.moves = block_move_table(k)

    def l1(self, xs, ys) -> np.ndarray:
        return POPCOUNT[self.flags[xs] ^ self.flags[ys]]

    def l2(self, xs, ys) -> np.ndarray:
        return (self.quads[xs] != self.quads[ys]).sum(axis=-1)

    def step_sums(self, xs: np.ndarray, ys: np.ndarray, chunk: int = 1024) -> tuple[np.ndarray, np.ndarray]:
        """Per pair, ``(sum l1', sum l2')`` over all draws; ``E[d'] = (b*s1 + s2) / width``."""
        s1 = np.empty(len(xs), dtype=np.int64)
        s2 = np.empty(len(xs), dtype=np.int64)
        for lo in range(0, len(xs), chunk):
            xp = self.moves[xs[lo:lo + chunk]]
            yp = self.moves[ys[lo:lo + chunk]]
            s1[lo:lo + chunk] = self.l1(xp, yp).sum(axis=1)
            s2[lo:lo + chunk] = self.l2(xp, yp).sum(axis=1)
        return s1, s2

    @property
    def width(self) -> int:
        return self.moves.shape[1]


# -- case analysis -----------------------------------------------------------------

def _has_v(f: int) -> bool:
    return f & VBITS == VBITS


def _has_h(f: int) -> bool:
    return f & HBITS == HBITS


def _popcount(f: int) -> int:
    return bin(f).count("1")


def classify_flags(fx: int, fy: int, equal_quadrants: int) -> str:
    """Case label from half-bisector flags and the number of equal quadrants."""
    i = equal_quadrants
    if _has_v(fx) and _has_h(fx) or _has_v(fy) and _has_h(fy):
        if _has_v(fx) and _has_h(fx):
            fx, fy = fy, fx
        n = _popcount(fx)
        return {2: "3a", 3: f"3b({i})", 4: "3c"}[n]
    if _has_v(fx) and _has_v(fy) or _has_h(fx) and _has_h(fy):
        common = VBITS if _has_v(fx) and _has_v(fy) else HBITS
        ex, ey = fx & ~common, fy & ~common
        if not ex and not ey:
            conf = "a"
        elif not ex or not ey:
            conf = "b"
        elif ex == ey:
            conf = "c"
        else:
            conf = "d"
        return f"2{conf}({i})"
    c = _popcount(fx & fy)
    return {0: "1a", 1: "1b", 2: f"1c({i})"}[c]


def classify_case(pair: CoupledPair) -> str:
    if pair.x == pair.y:
        raise ValueError("identical tilings have no case")
    return classify_flags(*pair.flags, 4 - l2(pair))


def _case_i(label: str) -> int:
    return int(label[label.index("(") + 1]) if "(" in label else 0


def case_bound(label: str, d: int, f: Fraction, b: int) -> Fraction:
    """Upper bound on ``E[d']`` for a pair at distance ``d`` in the given case."""
    i = _case_i(label)
    d = Fraction(d)
    if label == "1a":
        return d - f * b
    if label == "1b":
        return d - 3 * f * b / 4 + (1 - f) * b / 4
    if label.startswith("1c"):
        return d - 2 * f * b / 4 + 2 * (1 - f) * b / 4 + Fraction(2 * i, 4)
    if label.startswith("2"):
        return d - d / 4
    if label == "3a":
        return d - Fraction(2 * (b + 2), 4) + 2 * (1 - f) * b / 4
    if label.startswith("3b"):
        return d - Fraction(b + 4 - i, 4) + 2 * (1 - f) * b / 4 + Fraction(2, 4)
    if label == "3c":
        return d - d / 2
    raise ValueError(f"unknown case {label!r}")


# distance each case forces, as a function of (b, i)
_CASE_DISTANCE = {
    "1a": lambda b, i: 4 * b + 4,
    "1b": lambda b, i: 3 * b + 4,
    "1c": lambda b, i: 2 * b + 4 - i,
    "3a": lambda b, i: 2 * b + 4,
    "3b": lambda b, i: b + 4 - i,
}
_CASE_I = {"1c": (0, 1), "3b": (0, 1, 2)}


def implied_ratios(f: Fraction, b: int) -> dict[str, Fraction]:
    """Worst bound/d per case, using the distance each configuration forces."""
    out = {"2": Fraction(3, 4), "3c": Fraction(1, 2)}
    for key, dist in _CASE_DISTANCE.items():
        for i in _CASE_I.get(key, (0,)):
            label = f"{key}({i})" if key in _CASE_I else key
            d = dist(b, i)
            out[label] = case_bound(label, d, f, b) / d
    return dict(sorted(out.items()))


def target_b_range(f: Fraction, target: Fraction = TARGET) -> tuple[int, int | None] | None:
    """Integer range of ``b`` for which every case bound gives ``E[d'] <= target * d``.

    Each condition is affine in ``b``, so the feasible set is an interval.
    Returns ``(lo, hi)`` with ``hi=None`` for unbounded, or None if empty.
    """
    lo, hi = Fraction(1), None
    for key, dist in _CASE_DISTANCE.items():
        for i in _CASE_I.get(key, (0,)):
            label = f"{key}({i})" if key in _CASE_I else key

            def g(b, label=label, dist=dist, i=i):
                d = dist(b, i)
                return case_bound(label, d, f, b) - target * d

            g0 = g(0)
            slope = g(1) - g0
            if slope < 0:
                lo = max(lo, -g0 / slope)
            elif slope > 0:
                cap = -g0 / slope
                hi = cap if hi is None else min(hi, cap)
            elif g0 > 0:
                return None
    lo_int = math.ceil(lo)
    hi_int = None if hi is None else math.floor(hi)
    if hi_int is not None and hi_int < lo_int:
        return None
    return lo_int, hi_int


# -- survey --------------------------------------------------------------------------

@dataclass
class CaseStats:
    count: int = 0
    max_ratio: Fraction = Fraction(0)
    bound_violations: int = 0
    equality_failures: int = 0
    distances: set = field(default_factory=set)

    def to_dict(self) -> dict:
        return {"count": self.count, "max_ratio": fraction_str(self.max_ratio),
                "max_ratio_float": float(self.max_ratio), "bound_violations": self.bound_violations,
                "equality_failures": self.equality_failures, "distances": sorted(self.distances)}


def _survey_pairs(tab: PairTables, xs, ys, b: int, f: Fraction, stats: dict, equalities: set) -> tuple[Fraction, int]:
    s1, s2 = tab.step_sums(xs, ys)
    d1, d2 = tab.l1(xs, ys), tab.l2(xs, ys)
    fx, fy = tab.flags[xs], tab.flags[ys]
    worst = Fraction(0)
    violations = 0
    for n in range(len(xs)):
        d = int(b * d1[n] + d2[n])
        e = Fraction(int(b * s1[n] + s2[n]), tab.width)
        label = classify_flags(int(fx[n]), int(fy[n]), 4 - int(d2[n]))
        st = stats[label]
        st.count += 1
        st.distances.add(d)
        ratio = e / d
        st.max_ratio = max(st.max_ratio, ratio)
        worst = max(worst, ratio)
        bound = case_bound(label, d, f, b)
        if e > bound:
            st.bound_violations += 1
            violations += 1
        if label in equalities and e != bound:
            st.equality_failures += 1
    return worst, violations


def case_1a_sample(k: int, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded pairs with x carrying exactly the top and bottom half-bisectors and y exactly left and right."""
    idx = enumerate_tilings(k)
    xs_all = np.flatnonzero(idx.flags == VBITS)
    ys_all = np.flatnonzero(idx.flags == HBITS)
    rng = make_rng(seed)
    return rng.choice(xs_all, size=count), rng.choice(ys_all, size=count)


def contraction_survey(k: int, params: DistanceParams = DistanceParams(), sample_size: int = 20000,
                       seed: int = 0, exhaustive: bool | None = None, case_1a_samples: int = 1000) -> dict:
    """Exact ``E[d'] / d`` over pairs, grouped by case, with every per-case bound checked.

    Pairs are all unordered pairs when ``exhaustive`` (default for k <= 3),
    otherwise ``sample_size`` seeded uniform pairs of distinct states plus
    ``case_1a_samples`` seeded pairs of the no-common-half-bisector case.
    """
    _check_k(k)
    b = params.b
    exhaustive = k <= 3 if exhaustive is None else exhaustive
    tab = PairTables(k)
    A = len(tab.index)
    f = half_bisector_fraction(k)
    stats: dict[str, CaseStats] = defaultdict(CaseStats)
    equalities = {"1a"}

    if exhaustive:
        xs, ys = np.triu_indices(A, 1)
    else:
        rng = make_rng(seed)
        xs = rng.integers(0, A, size=sample_size)
        ys = rng.integers(0, A - 1, size=sample_size)
        ys = ys + (ys >= xs)
    worst, violations = _survey_pairs(tab, xs, ys, b, f, stats, equalities)

    extra = None
    if not exhaustive and case_1a_samples:
        cx, cy = case_1a_sample(k, case_1a_samples, seed + 1)
        extra_stats: dict[str, CaseStats] = defaultdict(CaseStats)
        w2, v2 = _survey_pairs(tab, cx, cy, b, f, extra_stats, equalities)
        extra = {"samples": case_1a_samples, "cases": {k2: v.to_dict() for k2, v in sorted(extra_stats.items())},
                 "max_ratio": fraction_str(w2)}
        worst, violations = max(worst, w2), violations + v2

    implied = implied_ratios(f, b)
    implied_max = max(implied.values())
    bounds_imply = implied_max <= TARGET
    eq_fail = sum(s.equality_failures for s in stats.values())
    if extra:
        eq_fail += sum(c["equality_failures"] for c in extra["cases"].values())
    report = {
        "k": k, "b": b, "seed": seed, "mode": "exhaustive" if exhaustive else "sampled",
        "pairs": int(len(xs)), "f_k": fraction_str(f),
        "cases": {label: s.to_dict() for label, s in sorted(stats.items())},
        "case_1a_extra": extra,
        "max_ratio": fraction_str(worst), "max_ratio_float": float(worst),
        "empirical_delta": float(1 - worst),
        "target_ratio": fraction_str(TARGET),
        "implied_case_ratios": {kk: float(v) for kk, v in implied.items()},
        "implied_max_ratio": float(implied_max),
        "bounds_imply_target": bool(bounds_imply),
        "bound_violations": int(violations),
        "equality_failures": int(eq_fail),
    }
    report["target_met"] = bool(worst <= TARGET) if bounds_imply else None
    report["ok"] = violations == 0 and eq_fail == 0 and (not bounds_imply or worst <= TARGET)
    return report
