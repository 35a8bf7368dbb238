"""Exact counts and ratios for dyadic tilings.

Counts are Python ints and ratios are :class:`fractions.Fraction`; only the
golden-ratio comparisons and the growth-constant estimate use floating
point, and those go through mpmath at ``PRECISION_DIGITS`` digits.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import prod

import mpmath

K_CAP = 16
PRECISION_DIGITS = 60
FLOAT_TOL = 1e-12

PHI = (1 + 5 ** 0.5) / 2
# Convergence target only; no closed form is known.
OMEGA = 1.84454757


def _check_k(k: int, low: int, cap: int | None) -> None:
    if k < low:
        raise ValueError(f"k must be >= {low}, got {k}")
    cap = K_CAP if cap is None else cap
    if k > cap:
        raise ValueError(f"k={k} exceeds the recurrence cap {cap}")


@lru_cache(maxsize=None)
def _count(k: int) -> int:
    if k == 0:
        return 1
    if k == 1:
        return 2
    return 2 * _count(k - 1) ** 2 - _count(k - 2) ** 4


def count_tilings(k: int, cap: int | None = None) -> int:
    """Number of dyadic tilings of size ``2**k``."""
    _check_k(k, 0, cap)
    return _count(k)


def half_bisector_fraction(k: int, cap: int | None = None) -> Fraction:
    """Fraction of half-size tilings carrying a given half-bisector, ``A_{k-2}^2 / A_{k-1}``."""
    _check_k(k, 2, cap)
    return Fraction(_count(k - 2) ** 2, _count(k - 1))


def half_bisector_fraction_recurrence(k: int, cap: int | None = None) -> Fraction:
    """Same quantity via ``f_k = 1 / (2 - f_{k-1}^2)`` from ``f_2 = 1/2``."""
    _check_k(k, 2, cap)
    f = Fraction(1, 2)
    for _ in range(3, k + 1):
        f = 1 / (2 - f * f)
    return f


def subset_counts(k: int, cap: int | None = None) -> tuple[int, int, int]:
    """(# with vertical bisector, # with horizontal bisector, # with both)."""
    _check_k(k, 2, cap)
    v = _count(k - 1) ** 2
    return v, v, _count(k - 2) ** 4


def plus_ratio(k: int, cap: int | None = None) -> Fraction:
    """``|all tilings| / |tilings with both bisectors|``."""
    _check_k(k, 2, cap)
    return Fraction(_count(k), _count(k - 2) ** 4)


def upsilon_count(k: int, cap: int | None = None) -> int:
    _check_k(k, 2, cap)
    return prod(_count(i) ** 2 for i in range(k - 1))


def boundary_count(k: int, cap: int | None = None) -> int:
    """Tilings one flip away from having a vertical bisector."""
    return (1 << (k - 1)) * upsilon_count(k, cap)


def variance_vertical_indicator(k: int, cap: int | None = None) -> Fraction:
    r = 1 / plus_ratio(k, cap)
    return Fraction(1, 4) * (1 - r * r)


def dirichlet_vertical_indicator(k: int, cap: int | None = None) -> Fraction:
    """Edge-flip Dirichlet form of the vertical-bisector indicator."""
    n = 1 << k
    return Fraction(boundary_count(k, cap), 2 * n * count_tilings(k, cap))


def rayleigh_vertical_indicator(k: int, cap: int | None = None) -> Fraction:
    return dirichlet_vertical_indicator(k, cap) / variance_vertical_indicator(k, cap)


def mp_phi():
    with mpmath.workdps(PRECISION_DIGITS):
        return (1 + mpmath.sqrt(5)) / 2


def to_mp(q: Fraction | int):
    with mpmath.workdps(PRECISION_DIGITS):
        q = Fraction(q)
        return mpmath.mpf(q.numerator) / q.denominator


def upsilon_bound_margin(k: int, cap: int | None = None) -> float:
    """Relative margin of ``upsilon_count(k)/A_k <= phi**(2-2k)``; non-negative when it holds."""
    with mpmath.workdps(PRECISION_DIGITS):
        bound = mp_phi() ** (2 - 2 * k)
        ratio = to_mp(Fraction(upsilon_count(k, cap), count_tilings(k, cap)))
        return float((bound - ratio) / bound)


def dirichlet_bound(k: int) -> float:
    """``phi**(2-2k) / 4``."""
    with mpmath.workdps(PRECISION_DIGITS):
        return float(mp_phi() ** (2 - 2 * k) / 4)


def growth_constant_estimate(k: int, cap: int | None = None) -> float:
    """``(phi * A_k) ** (2**-k)``, which tends to the growth constant omega."""
    _check_k(k, 1, cap)
    with mpmath.workdps(PRECISION_DIGITS):
        val = mpmath.power(mp_phi() * mpmath.mpf(_count(k)), mpmath.mpf(1) / (1 << k))
        return float(val)


def fraction_str(q: Fraction | int) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def count_report(k: int, cap: int | None = None) -> dict:
    """Everything the ``count`` subcommand prints for a given k."""
    out: dict = {"k": k, "n": 1 << k, "A_k": str(count_tilings(k, cap))}
    if k >= 1:
        out["growth_constant_estimate"] = growth_constant_estimate(k, cap)
    if k >= 2:
        v, h, both = subset_counts(k, cap)
        f = half_bisector_fraction(k, cap)
        out.update({
            "f_k": fraction_str(f),
            "f_k_float": float(f),
            "f_k_recurrence_agrees": f == half_bisector_fraction_recurrence(k, cap),
            "vertical": str(v),
            "horizontal": str(h),
            "both": str(both),
            "plus_ratio": fraction_str(plus_ratio(k, cap)),
            "plus_ratio_identity": plus_ratio(k, cap) == 2 / (f * f) - 1,
            "upsilon_count": str(upsilon_count(k, cap)),
            "boundary_count": str(boundary_count(k, cap)),
            "variance_vertical_indicator": fraction_str(variance_vertical_indicator(k, cap)),
            "dirichlet_vertical_indicator": fraction_str(dirichlet_vertical_indicator(k, cap)),
            "upsilon_bound_margin": upsilon_bound_margin(k, cap),
        })
    return out
