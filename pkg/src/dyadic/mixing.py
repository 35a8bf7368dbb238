"""Total-variation curves, mixing times and relaxation-time scaling diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import TextIO

import numpy as np

from .chains import EDGE, ChainConfig, build_matrix, derive_seeds, make_rng, move_table, run_trajectory
from .combinatorics import PHI, count_tilings, fraction_str, subset_counts
from .enumeration import MAX_MATERIALIZED_K, boundary_indices, enumerate_tilings
from .errors import SizeGuardError
from .spectral import dense_gap, spectral_gap
from .tiling import HORIZONTAL, VERTICAL, Tiling, canonical_decode, strips, symmetry_orbit

TV_TOL = 1e-12
EXACT_CHECK_STEPS = 30
T_CAP = 10**6
Z_95 = 1.96
EXPONENT_LOWER = 2 * math.log2(PHI)
EXPONENT_UPPER = math.log2(17)


@dataclass
class TVCurve:
    k: int
    chain: str
    start: str
    times: list[int]
    tv: list[float]
    ci: list[float] | None = None
    exact_checked: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def write_csv(self, fh: TextIO) -> None:
        fh.write("t,tv,ci\n")
        for n, (t, v) in enumerate(zip(self.times, self.tv)):
            c = "" if self.ci is None else repr(self.ci[n])
            fh.write(f"{t},{v!r},{c}\n")


def _check_exact_k(k: int) -> None:
    if not 1 <= k <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"exact evolution needs 1 <= k <= {MAX_MATERIALIZED_K}")


def _start_index(k: int, start) -> int:
    idx = enumerate_tilings(k)
    if isinstance(start, Tiling):
        return idx.lookup(start)
    if isinstance(start, str):
        return idx.lookup(canonical_decode(start))
    return int(start)


def _operator(P):
    return P.to_dense() if P.dim <= 200 else P.to_csr()


def _tv(dist: np.ndarray) -> np.ndarray:
    """TV to uniform of each column."""
    n = dist.shape[0]
    return 0.5 * np.abs(dist - 1.0 / n).sum(axis=0)


def _exact_tv_steps(P, s: int, steps: int) -> list[Fraction]:
    rows = [P.row(i) for i in range(P.dim)]
    mu = [Fraction(0)] * P.dim
    mu[s] = Fraction(1)
    u = Fraction(1, P.dim)
    out = [sum(abs(m - u) for m in mu) / 2]
    for _ in range(steps):
        nxt = [Fraction(0)] * P.dim
        for i, m in enumerate(mu):
            if m:
                for j, p in rows[i].items():
                    nxt[j] += m * p
        mu = nxt
        out.append(sum(abs(m - u) for m in mu) / 2)
    return out


def exact_tv_curve(k: int, chain: str, start, t_max: int) -> TVCurve:
    """TV distance to uniform after ``t = 0..t_max`` steps from a point mass.

    Float evolution; for ``k <= 2`` the first steps are recomputed in exact
    rationals and must agree to ``1e-12``.
    """
    _check_exact_k(k)
    P = build_matrix(chain, k)
    s = _start_index(k, start)
    op = _operator(P)
    mu = np.zeros(P.dim)
    mu[s] = 1.0
    tv = [float(_tv(mu[:, None])[0])]
    for _ in range(t_max):
        mu = op @ mu
        tv.append(float(_tv(mu[:, None])[0]))
    checked = 0
    if k <= 2:
        exact = _exact_tv_steps(P, s, min(t_max, EXACT_CHECK_STEPS))
        for t, e in enumerate(exact):
            if abs(float(e) - tv[t]) > TV_TOL:
                raise AssertionError(f"float TV deviates from exact value at t={t}")
        checked = len(exact)
    return TVCurve(k, chain, enumerate_tilings(k).encodings[s], list(range(t_max + 1)), tv, None, checked)


# -- mixing times -----------------------------------------------------------------

def orbit_representatives(k: int, indices) -> list[int]:
    """One index per symmetry orbit; both chains commute with the square's symmetries."""
    idx = enumerate_tilings(k)
    reps = {}
    for i in indices:
        orbit = symmetry_orbit(idx[int(i)])
        key = min(t.encode() for t in orbit)
        reps.setdefault(key, idx.find(key))
    return sorted(reps.values())


def default_start_set(k: int, seed: int = 0, random_starts: int = 100) -> tuple[list[int], str]:
    """All starts for k <= 3.

    At k = 4: both strip tilings, the boundary set, the double-bisector set
    and seeded random starts.
    """
    idx = enumerate_tilings(k)
    if k <= 3:
        return list(range(len(idx))), "all"
    both = np.flatnonzero(idx.vertical & idx.horizontal).tolist()
    rnd = make_rng(seed).choice(len(idx), size=random_starts, replace=False).tolist()
    extremes = [idx.lookup(strips(k, axis)) for axis in (VERTICAL, HORIZONTAL)]
    chosen = sorted(set(boundary_indices(k)) | set(both) | set(rnd) | set(extremes))
    return chosen, f"strips+boundary+double-bisector+{random_starts} random (seed {seed})"


@dataclass
class MixingReport:
    k: int
    chain: str
    epsilon: float
    t_mix: int
    worst_start: str
    tv_at_t_mix: float
    tv_before: float
    start_set: str
    starts: int
    orbit_representatives: int
    worst_case_exact: bool

    def to_dict(self) -> dict:
        return asdict(self)


def mixing_time(k: int, chain: str = EDGE, epsilon: float = 0.25, seed: int = 0,
                random_starts: int = 100, batch: int = 512) -> MixingReport:
    """First ``t`` with worst-start TV at most ``epsilon``.

    TV from a fixed start never increases under a stochastic matrix with
    uniform stationary law, so the first crossing is the mixing time.  At
    k = 4 the maximum runs over :func:`default_start_set` only and is a lower
    bound on the true worst case.
    """
    _check_exact_k(k)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    starts, desc = default_start_set(k, seed, random_starts)
    reps = orbit_representatives(k, starts)
    P = build_matrix(chain, k)
    op = _operator(P)
    best_t, worst_s, tv_at, tv_prev = -1, -1, 0.0, 1.0
    for lo in range(0, len(reps), batch):
        cols = reps[lo:lo + batch]
        X = np.zeros((P.dim, len(cols)))
        X[cols, np.arange(len(cols))] = 1.0
        prev = _tv(X)
        t = 0
        cur = prev
        while cur.max() > epsilon + TV_TOL:
            if t >= T_CAP:
                raise RuntimeError("TV did not fall below epsilon")
            X = op @ X
            prev, cur = cur, _tv(X)
            t += 1
        if t > best_t:
            j = int(prev.argmax())
            best_t, worst_s, tv_at, tv_prev = t, cols[j], float(cur.max()), float(prev.max())
    # exact confirmation of the crossing where rationals are cheap
    if k <= 2:
        curves = [_exact_tv_steps(P, s, best_t) for s in reps]
        worst = [max(c[t] for c in curves) for t in range(best_t + 1)]
        eps = Fraction(epsilon)
        if worst[-1] > eps or (best_t and worst[-2] <= eps):
            raise AssertionError("exact recomputation disagrees with float mixing time")
    return MixingReport(k, chain, epsilon, best_t, enumerate_tilings(k).encodings[worst_s],
                        tv_at, tv_prev, desc, len(starts), len(reps), k <= 3)


def relaxation_time(k: int, chain: str = EDGE) -> float:
    """``1 / gap`` with a dense eigensolver for small matrices, power iteration otherwise."""
    P = build_matrix(chain, k)
    gap = dense_gap(P) if P.dim <= 200 else spectral_gap(P).gap
    return 1.0 / gap


def sandwich(k: int, chain: str = EDGE, epsilon: float = 0.25) -> dict:
    """Relaxation/mixing sandwich.

    The verdict ``holds`` uses natural logarithms, the base in which the
    underlying inequality is proved; the base-2 evaluation is reported
    alongside for comparison.
    """
    report = mixing_time(k, chain, epsilon)
    t_rel = relaxation_time(k, chain)
    A = count_tilings(k)
    out = {"k": k, "chain": chain, "epsilon": epsilon, "t_mix": report.t_mix, "t_rel": t_rel,
           "pi_min": fraction_str(Fraction(1, A)), "exact": report.worst_case_exact}
    for name, log in (("natural", math.log), ("base2", math.log2)):
        lower = (t_rel - 1) * log(1 / (2 * epsilon))
        upper = log(A / epsilon) * t_rel
        out[name] = {"lower": lower, "upper": upper,
                     "holds": bool(lower <= report.t_mix <= upper)}
    # the coarse bound 1/pi_min = A_k < 2**n, with n = 2**k rectangles
    out["loose_upper"] = math.log(2 ** (1 << k) / epsilon) * t_rel
    out["loose_holds"] = bool(A < 2 ** (1 << k) and report.t_mix <= out["loose_upper"])
    out["log_base"] = "natural"
    out["holds"] = out["natural"]["holds"]
    return out


# -- Monte-Carlo distinguishing statistic --------------------------------------------

@dataclass
class StatisticEstimate:
    t: int
    samples: int
    p_hat: float
    p_stationary: float
    tv: float
    ci_half_width: float

    def to_dict(self) -> dict:
        return asdict(self)


def stationary_vertical_probability(k: int) -> Fraction:
    return Fraction(subset_counts(k)[0], count_tilings(k))


def _estimate(t: int, hits: int, samples: int, p: float) -> StatisticEstimate:
    ph = hits / samples
    hw = Z_95 * math.sqrt(max(ph * (1 - ph), 0.0) / samples)
    return StatisticEstimate(t, samples, ph, p, abs(ph - p), hw)


def statistic_tv_curve(k: int, times, samples: int = 10**6, seed: int = 0, chain: str = EDGE,
                       start: Tiling | None = None) -> list[StatisticEstimate]:
    """TV between the law of the vertical-bisector indicator after ``t`` steps and its stationary law.

    The default start is the all-vertical-strips tiling.  For ``k <= 4`` the
    ``samples`` chains advance together through the move table, one vector of
    draws per step; beyond that each chain runs on the grid kernel with a
    seed from :func:`derive_seeds`.
    """
    if k < 2:
        raise ValueError("statistic needs k >= 2")
    times = sorted(set(int(t) for t in times))
    if times and times[0] < 0:
        raise ValueError("times must be non-negative")
    start = strips(k, VERTICAL) if start is None else start
    p = float(stationary_vertical_probability(k))
    t_max = times[-1] if times else 0
    want = set(times)
    out = []
    if k <= MAX_MATERIALIZED_K:
        idx = enumerate_tilings(k)
        table = move_table(chain, k)
        vert = idx.vertical
        states = np.full(samples, idx.lookup(start), dtype=np.int64)
        rng = make_rng(seed)
        m = table.shape[1]
        for t in range(t_max + 1):
            if t:
                states = table[states, rng.integers(0, m, size=samples)]
            if t in want:
                out.append(_estimate(t, int(vert[states].sum()), samples, p))
        return out
    if chain != EDGE:
        raise SizeGuardError("block dynamics beyond k = 4 is simulated through run_trajectory only")
    hits = np.zeros(len(times), dtype=np.int64)
    pos = np.array(times)
    for sub in derive_seeds(seed, samples):
        tr = run_trajectory(ChainConfig(k, chain, sub), start, t_max, "vertical")
        hits += tr.trace[pos]
    return [_estimate(t, int(h), samples, p) for t, h in zip(times, hits)]


def statistic_tv_lower_bound(k: int, t: int, samples: int = 10**6, seed: int = 0, chain: str = EDGE,
                             start: Tiling | None = None) -> StatisticEstimate:
    return statistic_tv_curve(k, [t], samples, seed, chain, start)[0]


# -- scaling -------------------------------------------------------------------------

@dataclass
class ScalingReport:
    k_values: list[int]
    t_rel: list[float]
    slope: float
    local_slopes: list[float]
    exponent_lower: float = EXPONENT_LOWER
    exponent_upper: float = EXPONENT_UPPER
    bracketed: bool = False
    nondecreasing: bool = False
    note: str = field(default="diagnostic only; asymptotic exponents are not binding at small k")

    def to_dict(self) -> dict:
        return asdict(self)


def scaling_report(k_max: int = 4, threads: int = 1) -> ScalingReport:
    if not 2 <= k_max <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"scaling report needs 2 <= k_max <= {MAX_MATERIALIZED_K}")
    ks = list(range(1, k_max + 1))
    trel = [1.0 / spectral_gap(build_matrix(EDGE, k), threads=threads).gap for k in ks]
    logn = np.array(ks, dtype=float)  # log2 n = k
    logt = np.log2(trel)
    slope = float(np.polyfit(logn, logt, 1)[0])
    local = [float(logt[i + 1] - logt[i]) for i in range(len(ks) - 1)]
    return ScalingReport(ks, trel, slope, local,
                         bracketed=EXPONENT_LOWER <= slope <= EXPONENT_UPPER,
                         nondecreasing=all(a <= b for a, b in zip(trel, trel[1:])))
