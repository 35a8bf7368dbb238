"""The numbered acceptance checks, runnable from tests or ``dyadic verify``.

Each check returns a :class:`Criterion`; ``passed`` is ``None`` for
diagnostic-only items.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import chains, combinatorics as comb, coupling, enumeration, mixing, spectral
from .tiling import VERTICAL, strips

KNOWN_COUNTS = [1, 2, 7, 82, 11047]
BOUNDARY_SIZES = {2: 2, 3: 16, 4: 1568}
GOLDEN_CONJUGATE = (math.sqrt(5) - 1) / 2


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool | None = None
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "DIAG" if self.passed is None else ("PASS" if self.passed else "FAIL")
        return f"[{status}] {self.number:2d}. {self.title} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "details": self.details, "seconds": round(self.seconds, 3)}


def _counts() -> Criterion:
    got = [len(enumeration.enumerate_tilings(k)) for k in range(5)]
    rec = [comb.count_tilings(k) for k in range(5)]
    return Criterion(1, "enumeration counts k=0..4", got == rec == KNOWN_COUNTS,
                     {"enumerated": got, "recurrence": rec})


def _subsets() -> Criterion:
    rows, ok = {}, True
    for k in range(2, 5):
        scan = enumeration.scan_subset_counts(k)
        a1, a2 = comb.count_tilings(k - 1), comb.count_tilings(k - 2)
        want = (a1 * a1, a1 * a1, a2 ** 4)
        ok &= scan == want == comb.subset_counts(k)
        rows[k] = list(scan)
    return Criterion(2, "subset counts by scan k=2..4", ok, rows)


def _half_bisector_fraction() -> Criterion:
    fs = [comb.half_bisector_fraction(k) for k in range(3, 13)]
    dual = all(comb.half_bisector_fraction_recurrence(k) == f for k, f in zip(range(3, 13), fs))
    inc = all(a < b for a, b in zip(fs, fs[1:])) and comb.half_bisector_fraction(2) < fs[0]
    below = all(float(f) < GOLDEN_CONJUGATE for f in fs)
    gap = GOLDEN_CONJUGATE - float(fs[-1])
    return Criterion(3, "f_k dual definitions, monotone, limit", dual and inc and below and gap < 1e-3,
                     {"dual": dual, "increasing": inc, "below_limit": below, "f_12_distance": gap})


def _plus_ratio() -> Criterion:
    target = 2 * comb.PHI + 1
    ok, vals = True, {}
    for k in range(2, 13):
        r = comb.plus_ratio(k)
        f = comb.half_bisector_fraction(k)
        ok &= r == 2 / (f * f) - 1 and float(r) >= target - 1e-12
        vals[k] = float(r)
    close = abs(vals[12] - target) < 1e-3
    return Criterion(4, "plus-ratio identity and limit k=2..12", ok and close,
                     {"values": vals, "limit": target, "k12_distance": abs(vals[12] - target)})


def _boundary() -> Criterion:
    sizes, ok = {}, True
    for k in range(2, 5):
        members = enumeration.boundary_indices(k)  # raises if any has two pivotal flips
        single = all(len(enumeration.pivotal_flip(t)) == 1 for t in enumeration.boundary_set(k))
        sizes[k] = len(members)
        ok &= single and len(members) == comb.boundary_count(k) == BOUNDARY_SIZES[k]
    return Criterion(5, "boundary set sizes and unique pivotal flip", ok, {"sizes": sizes})


def _upsilon() -> Criterion:
    ok, rows = True, {}
    for k in range(2, 5):
        fam = enumeration.upsilon_set(k)
        distinct = len(set(fam)) == len(fam)
        inside = all(t.has_vertical_bisector() and t.has_horizontal_bisector() for t in fam)
        with mpmath.workdps(comb.PRECISION_DIGITS):
            ratio_ok = mpmath.mpf(len(fam)) / comb.count_tilings(k) <= comb.mp_phi() ** (2 - 2 * k)
        ok &= distinct and inside and bool(ratio_ok) and len(fam) == comb.upsilon_count(k)
        rows[k] = {"size": len(fam), "distinct": distinct, "double_bisector": inside, "ratio_bound": bool(ratio_ok)}
    return Criterion(6, "upsilon family size, containment, ratio bound", ok, rows)


def _gap_small() -> Criterion:
    g1 = spectral.edge_gap(1).gap
    diffs = {}
    for kind, ks in ((chains.EDGE, (1, 2, 3)), (chains.BLOCK, (2, 3))):
        for k in ks:
            P = chains.build_matrix(kind, k)
            diffs[f"{kind}-{k}"] = abs(spectral.spectral_gap(P).gap - spectral.dense_gap(P))
    ok = abs(g1 - 0.5) <= 1e-9 and max(diffs.values()) <= 1e-8
    return Criterion(7, "gap at k=1 and solver vs dense oracle k<=3", ok, {"gap_k1": g1, "differences": diffs})


def _recursion() -> Criterion:
    rows, ok = {}, True
    for k in (3, 4):
        r = spectral.verify_gap_recursion(k)
        ok &= r.gap - r.product >= -1e-8
        rows[k] = {"gap": r.gap, "block": r.gap_block, "smaller": r.gap_smaller,
                   "slack": r.gap - r.product, "ratio": r.ratio}
    return Criterion(8, "gap recursion inequality k=3,4", ok, rows)


def _lower_bound() -> Criterion:
    rows, ok = {}, True
    for k in (2, 3, 4):
        r = spectral.lower_bound_check(k)
        ok &= r.holds and r.formula_agrees
        rows[k] = r.to_dict()
    return Criterion(9, "indicator Rayleigh quotient bounds the gap k=2..4", ok, rows)


def _sandwich() -> Criterion:
    rows, ok = {}, True
    for k in (2, 3):
        s = mixing.sandwich(k, chains.EDGE, 0.25)
        ok &= s["holds"] and s["exact"]
        rows[k] = s
    return Criterion(10, "relaxation/mixing sandwich k=2,3", ok, rows)


def _coupling() -> Criterion:
    r3 = coupling.contraction_survey(3, coupling.DistanceParams(64), exhaustive=True)
    r4 = coupling.contraction_survey(4, coupling.DistanceParams(64), sample_size=20000, seed=0,
                                     case_1a_samples=1000)
    n1a3 = r3["cases"]["1a"]["count"]
    n1a4 = r4["case_1a_extra"]["cases"]["1a"]["count"]
    ok = (r3["bound_violations"] == r4["bound_violations"] == 0
          and r3["equality_failures"] == r4["equality_failures"] == 0 and n1a3 > 0 and n1a4 == 1000)
    return Criterion(11, "coupling case-1a identity and per-case bounds (b=64)", ok, {
        "k3_pairs": r3["pairs"], "k3_case_1a": n1a3, "k4_pairs": r4["pairs"], "k4_case_1a": n1a4,
        "max_ratio": {3: r3["max_ratio_float"], 4: r4["max_ratio_float"]}})


def _faithfulness(samples: int = 10**6, long_run: int = 10**7) -> Criterion:
    k = 2
    idx = enumeration.enumerate_tilings(k)
    starts = [strips(k, VERTICAL), idx[idx.find("V(H(.,.),H(.,.))")]]
    ok, rows = True, {}
    for kind in chains.CHAINS:
        P = chains.build_matrix(kind, k)
        for n, t in enumerate(starts):
            counts = chains.one_step_counts(chains.ChainConfig(k, kind, seed=100 + n), t, samples)
            p = P.row_dense(idx.lookup(t))
            sigma = np.sqrt(samples * p * (1 - p))
            dev = np.abs(counts - samples * p)
            good = bool(np.all(np.where(p > 0, dev <= 3 * sigma, counts == 0)))
            ok &= good
            rows[f"{kind}-step-{t.encode()}"] = {"max_z": float(np.max(np.where(sigma > 0, dev / np.where(sigma > 0, sigma, 1), 0)))}
        occ = chains.occupancy(chains.ChainConfig(k, kind, seed=7), starts[0], long_run)
        z = []
        for s in range(len(idx)):
            f = np.zeros(len(idx))
            f[s] = 1.0
            sd = math.sqrt(spectral.asymptotic_variance(P, f) / long_run)
            z.append(abs(occ[s] / long_run - 1 / len(idx)) / sd)
        ok &= max(z) <= 3
        rows[f"{kind}-occupancy"] = {"max_z": max(z)}
    return Criterion(12, "single-step and long-run frequencies at k=2", ok, rows)


DETERMINISM_COMMANDS = [
    ["count", "--k", "6"],
    ["gap", "--k", "3", "--chain", "block"],
    ["couple", "--k", "3", "--exhaustive"],
    ["sample", "--k", "5", "--steps", "20000", "--chains", "3"],
    ["mix", "--k", "3", "--what", "statistic", "--times", "0,50", "--samples", "20000"],
]


def _determinism() -> Criterion:
    from .cli import execute

    rows, ok = {}, True
    for argv in DETERMINISM_COMMANDS:
        docs = []
        for threads in ("1", "2", "1"):
            code, doc = execute(["--seed", "11", "--threads", threads] + argv)
            doc.pop("metadata", None)
            docs.append((code, json.dumps(doc, sort_keys=True)))
        same = len({d for _, d in docs}) == 1 and all(c == 0 for c, _ in docs)
        ok &= same
        rows[" ".join(argv)] = same
    return Criterion(13, "byte-identical reports across runs and thread counts", ok, rows)


def _diagnostics() -> Criterion:
    s = mixing.scaling_report(4)
    ks = range(2, comb.K_CAP + 1)
    fs = {k: comb.half_bisector_fraction(k) for k in ks}
    at_b = {k: float(max(coupling.implied_ratios(f, coupling.DEFAULT_B).values())) for k, f in fs.items()}
    ranges = {k: coupling.target_b_range(f) for k, f in fs.items()}
    k0 = next((k for k, r in ranges.items() if r is not None), None)
    return Criterion(14, "asymptotic exponents and k0 (diagnostic only)", None, {
        "scaling": s.to_dict(),
        "implied_max_ratio_at_default_b": at_b,
        "first_k_where_case_bounds_give_16_17": k0,
        "b_range_for_16_17": {k: None if r is None else list(r) for k, r in ranges.items()}})


CRITERIA: dict[int, Callable[[], Criterion]] = {
    1: _counts, 2: _subsets, 3: _half_bisector_fraction, 4: _plus_ratio, 5: _boundary,
    6: _upsilon, 7: _gap_small, 8: _recursion, 9: _lower_bound, 10: _sandwich,
    11: _coupling, 12: _faithfulness, 13: _determinism, 14: _diagnostics,
}


def run(number: int) -> Criterion:
    t0 = time.perf_counter()
    try:
        c = CRITERIA[number]()
    except Exception as exc:  # a crash is a failure with the reason attached
        c = Criterion(number, CRITERIA[number].__name__.strip("_"), False, {"error": repr(exc)})
    c.seconds = time.perf_counter() - t0
    return c


def run_all(numbers=None, echo: Callable[[str], None] | None = None) -> list[Criterion]:
    out = []
    for n in numbers or sorted(CRITERIA):
        c = run(n)
        if echo:
            echo(c.line())
        out.append(c)
    return out


