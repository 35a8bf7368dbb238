"""Spectral gaps, variances and Dirichlet forms for the tiling chains."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _backend
from .chains import SparseSymmetricStochastic, build_block_matrix, build_edge_matrix, make_rng
from .combinatorics import (
    FLOAT_TOL,
    count_tilings,
    dirichlet_bound,
    dirichlet_vertical_indicator,
    rayleigh_vertical_indicator,
    variance_vertical_indicator,
)
from .enumeration import enumerate_tilings
from .errors import ConvergenceError

DEFAULT_TOL = 1e-12
DEFAULT_WINDOW = 100
DEFAULT_MAX_ITER = 10**6
GAP_SLACK = 1e-8


@dataclass
class SpectralReport:
    k: int | None
    chain: str
    dimension: int
    lambda2: float
    gap: float
    relaxation_time: float
    residual: float
    iterations: int
    converged: bool
    tol: float
    window: int
    backend: str = _backend.BACKEND
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _start_vector(n: int, seed: int) -> np.ndarray:
    x = make_rng(seed).standard_normal(n)
    x -= x.mean()
    return x / np.linalg.norm(x)


def spectral_gap(P: SparseSymmetricStochastic, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                 window: int = DEFAULT_WINDOW, threads: int = 1, seed: int = 0, kernels=None) -> SpectralReport:
    """Second-largest eigenvalue of ``P`` by deflated power iteration on ``(P + I) / 2``.

    The shift moves the spectrum into ``[0, 1]`` so the dominant eigenvalue
    after projecting out the constants is the algebraically second largest,
    even for chains that are not lazy.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = P.dim
    if n < 2:
        raise ValueError("spectral gap needs at least two states")
    ncomp, _ = connected_components(P.counts, directed=False)
    if ncomp > 1:
        raise ValueError(f"chain is disconnected ({ncomp} components)")
    kernels = _backend.kernels if kernels is None else kernels
    M = P.to_csr(shifted=True)
    x = _start_vector(n, seed)
    if n == 2:
        # the deflated space is one-dimensional; a single step is exact
        max_iter = min(max_iter, 2 * window + 1)
    lam, it, converged = kernels.power_iterate(
        M.indptr.astype(np.int64), M.indices.astype(np.int32), M.data.astype(np.float64),
        x, max_iter, tol, window, threads)
    if n == 2:
        converged = True
    if not converged:
        raise ConvergenceError(f"power iteration did not converge in {it} iterations")
    lam2 = 2.0 * lam - 1.0
    Px = P.to_csr() @ x
    residual = float(np.linalg.norm(Px - lam2 * x))
    gap = 1.0 - lam2
    kind = P.kind or "matrix"
    return SpectralReport(P.k, kind, n, lam2, gap, 1.0 / gap, residual, int(it), bool(converged),
                          tol, window, _backend.name_of(kernels), threads)


def dense_gap(P: SparseSymmetricStochastic) -> float:
    """Oracle: ``1 - lambda_2`` from a full symmetric eigendecomposition."""
    ev = np.linalg.eigvalsh(P.to_dense())
    return float(1.0 - ev[-2])


def sparse_gap(P: SparseSymmetricStochastic) -> float:
    """Oracle for larger matrices: Lanczos on the shifted matrix."""
    from scipy.sparse.linalg import eigsh

    vals = eigsh(P.to_csr(shifted=True), k=2, which="LA", tol=1e-14, return_eigenvectors=False)
    return float(1.0 - (2.0 * np.sort(vals)[0] - 1.0))


def edge_gap(k: int, **kw) -> SpectralReport:
    return spectral_gap(build_edge_matrix(k), **kw)


def block_gap(k: int, **kw) -> SpectralReport:
    return spectral_gap(build_block_matrix(k), **kw)


# -- variance and Dirichlet forms under the uniform distribution -----------------

def variance(f: Sequence[float]) -> float:
    f = np.asarray(f, dtype=np.float64)
    return float(np.mean((f - f.mean()) ** 2))


def variance_pairwise(f: Sequence[float]) -> float:
    """Same quantity via ``(1/2) sum_x sum_y pi(x) pi(y) (f(x) - f(y))**2``."""
    f = np.asarray(f, dtype=np.float64)
    n = len(f)
    return float(0.5 * ((f[:, None] - f[None, :]) ** 2).sum() / (n * n))


def _fractions(f: Sequence) -> list[Fraction]:
    return [Fraction(v.item() if isinstance(v, np.generic) else v) for v in f]


def variance_exact(f: Sequence) -> Fraction:
    vals = _fractions(f)
    n = len(vals)
    s = sum(vals, Fraction(0))
    s2 = sum((v * v for v in vals), Fraction(0))
    return (n * s2 - s * s) / (n * n)


def dirichlet(P: SparseSymmetricStochastic, f: Sequence[float]) -> float:
    f = np.asarray(f, dtype=np.float64)
    c = P.counts.tocoo()
    diff = f[c.row] - f[c.col]
    return float(0.5 * (c.data * diff * diff).sum() / (P.dim * P.denom))


def dirichlet_exact(P: SparseSymmetricStochastic, f: Sequence) -> Fraction:
    vals = _fractions(f)
    c = P.counts.tocoo()
    total = Fraction(0)
    for i, j, m in zip(c.row.tolist(), c.col.tolist(), c.data.tolist()):
        if i < j:
            d = vals[i] - vals[j]
            total += m * d * d
    return total / (P.dim * P.denom)


def rayleigh(P: SparseSymmetricStochastic, f: Sequence[float]) -> float:
    v = variance(f)
    if v <= 0:
        raise ValueError("test function has zero variance")
    return dirichlet(P, f) / v


def vertical_indicator(k: int) -> np.ndarray:
    return enumerate_tilings(k).vertical.astype(np.int64)


# -- inequality checks -----------------------------------------------------------

@dataclass
class GapRecursionReport:
    k: int
    gap: float
    gap_smaller: float
    gap_block: float
    product: float
    ratio: float
    holds: bool
    comparison_samples: int = 0
    comparison_worst: float = 0.0
    comparison_holds: bool = True
    reports: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def verify_gap_recursion(k: int, samples: int = 100, seed: int = 0, threads: int = 1) -> GapRecursionReport:
    """Check ``gap(edge, k) >= gap(block, k) * gap(edge, k-1)``.

    Also checks the per-function comparison behind it: for random ``f``,
    ``E_block(f) * gap(edge, k-1) <= E_edge(f)``.  ``comparison_worst`` is the
    largest observed value of the left side over the right side.
    """
    if not 2 <= k <= 4:
        raise ValueError("gap recursion check needs 2 <= k <= 4")
    r_k = edge_gap(k, threads=threads)
    r_prev = edge_gap(k - 1, threads=threads)
    r_blk = block_gap(k, threads=threads)
    product = r_blk.gap * r_prev.gap
    Pe, Pb = build_edge_matrix(k), build_block_matrix(k)
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f = rng.standard_normal(Pe.dim)
        worst = max(worst, dirichlet(Pb, f) * r_prev.gap / dirichlet(Pe, f))
    return GapRecursionReport(
        k, r_k.gap, r_prev.gap, r_blk.gap, product, r_k.gap / product,
        r_k.gap >= product - GAP_SLACK, samples, worst, worst <= 1 + GAP_SLACK,
        {"edge": r_k.to_dict(), "edge_smaller": r_prev.to_dict(), "block": r_blk.to_dict()})


@dataclass
class LowerBoundReport:
    k: int
    gap: float
    dirichlet: Fraction
    variance: Fraction
    rayleigh: Fraction
    holds: bool
    formula_agrees: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("dirichlet", "variance", "rayleigh"):
            d[key] = f"{d[key].numerator}/{d[key].denominator}"
        d["rayleigh_float"] = float(self.rayleigh)
        return d


def lower_bound_check(k: int, threads: int = 1) -> LowerBoundReport:
    """Compare the edge-chain gap with the Rayleigh quotient of the vertical-bisector indicator."""
    if not 2 <= k <= 4:
        raise ValueError("lower bound check needs 2 <= k <= 4")
    P = build_edge_matrix(k)
    f = vertical_indicator(k)
    e = dirichlet_exact(P, f)
    v = variance_exact(f)
    q = e / v
    gap = edge_gap(k, threads=threads).gap
    agrees = bool(e == dirichlet_vertical_indicator(k) and v == variance_vertical_indicator(k)
                  and q == rayleigh_vertical_indicator(k))
    return LowerBoundReport(k, gap, e, v, q, gap <= float(q) + GAP_SLACK, agrees)


def formula_rayleigh_bounds(k_max: int = 12) -> list[dict]:
    """Rayleigh quotient of the indicator against ``phi**(2-2k)/(4 var)`` from closed forms, k = 2..k_max."""
    out = []
    for k in range(2, k_max + 1):
        var = variance_vertical_indicator(k)
        q = rayleigh_vertical_indicator(k)
        bound = dirichlet_bound(k) / float(var)
        out.append({"k": k, "rayleigh": float(q), "bound": bound,
                    "holds": float(q) <= bound * (1 + FLOAT_TOL), "states": count_tilings(k)})
    return out


def asymptotic_variance(P: SparseSymmetricStochastic, f: Sequence[float]) -> float:
    """Limit of ``N * Var(mean of f over N steps)`` for the stationary chain.

    Uses the fundamental matrix: ``2 <g, f0> - <f0, f0>`` with ``(I - P + Pi) g = f0``
    and ``f0`` the centred function, inner products under the uniform law.
    """
    f0 = np.asarray(f, dtype=np.float64)
    f0 = f0 - f0.mean()
    n = P.dim
    Z = np.eye(n) - P.to_dense() + 1.0 / n
    g = np.linalg.solve(Z, f0)
    return float((2 * g @ f0 - f0 @ f0) / n)
