"""Edge-flip and block dynamics: single steps, trajectories and exact transition matrices.

Randomness
----------
Every step consumes exactly one integer ``u``:

* edge flip: ``u`` uniform on ``[0, 4n)``; the rectangle is rank ``u // 4`` in
  raster order of lower-left corners (see :attr:`Tiling.ordered_rects`) and
  the side is ``u % 4`` in the order left, right, top, bottom;
* block dynamics: ``u`` uniform on ``[0, 4 A_{k-1})``; the replacement tiling
  is ``rho = u // 4`` in the sorted index of the half-size tilings and the
  half is ``u % 4`` in the order Left, Right, Top, Bottom.

Trajectories draw ``u`` from ``numpy.random.Generator(PCG64(SeedSequence(seed)))``
in fixed blocks of :data:`DRAW_CHUNK` values, so a run of ``T`` steps is a
prefix of any longer run with the same seed.  Independent chains derived from
one master seed use :func:`derive_seeds`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, TextIO

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, diags

from . import _backend
from .combinatorics import count_tilings
from .enumeration import MAX_MATERIALIZED_K, enumerate_tilings, flip, flip_graph
from .errors import SizeGuardError
from .tiling import HORIZONTAL, VERTICAL, DyadicRectangle, Tiling, join, split

EDGE = "edge"
BLOCK = "block"
CHAINS = (EDGE, BLOCK)

LEFT_HALF, RIGHT_HALF, TOP_HALF, BOTTOM_HALF = 0, 1, 2, 3
DIRECTION_NAMES = ("Left", "Right", "Top", "Bottom")

DRAW_CHUNK = 1 << 16
GENERATOR = "numpy.random.PCG64(SeedSequence(seed)).integers(0, m, 65536, int64)"
MAX_GRID_K = 12


@dataclass(frozen=True)
class ChainConfig:
    k: int
    kind: str = EDGE
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CHAINS:
            raise ValueError(f"unknown chain {self.kind!r}")
        if self.kind == EDGE and self.k < 1:
            raise ValueError("edge-flip chain needs k >= 1")
        if self.kind == BLOCK and self.k < 2:
            raise ValueError("block dynamics needs k >= 2")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def draw_range(self) -> int:
        if self.kind == EDGE:
            return 4 << self.k
        return 4 * count_tilings(self.k - 1)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(master_seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(master_seed).spawn(count)]


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Per-chain 64-bit seeds: the first state word of each ``SeedSequence(master).spawn(count)`` child."""
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(master_seed).spawn(count)]


def iter_draws(rng: np.random.Generator, m: int, steps: int) -> Iterator[np.ndarray]:
    remaining = steps
    while remaining > 0:
        block = rng.integers(0, m, size=DRAW_CHUNK, dtype=np.int64)
        take = min(remaining, DRAW_CHUNK)
        yield block[:take]
        remaining -= take


# -- single steps on Tiling objects --------------------------------------------

def apply_edge_draw(t: Tiling, u: int) -> Tiling:
    rank, side = divmod(int(u), 4)
    out = flip(t, t.ordered_rects[rank], side)
    return t if out is None else out


def apply_block_move(t: Tiling, rho: Tiling, direction: int) -> Tiling:
    """Retile the chosen half of ``t`` with ``rho`` when the needed bisector exists."""
    if direction in (LEFT_HALF, RIGHT_HALF):
        if not t.has_vertical_bisector():
            return t
        left, right = split(t, VERTICAL)
        return join(rho, right, VERTICAL) if direction == LEFT_HALF else join(left, rho, VERTICAL)
    if not t.has_horizontal_bisector():
        return t
    bottom, top = split(t, HORIZONTAL)
    return join(bottom, rho, HORIZONTAL) if direction == TOP_HALF else join(rho, top, HORIZONTAL)


def apply_block_draw(t: Tiling, u: int, prev=None) -> Tiling:
    prev = enumerate_tilings(t.k - 1) if prev is None else prev
    r, direction = divmod(int(u), 4)
    return apply_block_move(t, prev[r], direction)


def edge_flip_step(t: Tiling, rng: np.random.Generator) -> Tiling:
    if t.k < 1:
        raise ValueError("edge-flip chain needs k >= 1")
    return apply_edge_draw(t, rng.integers(0, 4 << t.k))


def block_step(t: Tiling, rng: np.random.Generator, prev=None) -> Tiling:
    if t.k < 2:
        raise ValueError("block dynamics needs k >= 2")
    prev = enumerate_tilings(t.k - 1) if prev is None else prev
    return apply_block_draw(t, rng.integers(0, 4 * len(prev)), prev)


# -- exact move tables and matrices ---------------------------------------------

@lru_cache(maxsize=None)
def block_move_table(k: int) -> np.ndarray:
    """``table[i, 4*rho + direction]``: state reached from ``i`` by that block move."""
    if not 2 <= k <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"block move table needs 2 <= k <= {MAX_MATERIALIZED_K}")
    idx = enumerate_tilings(k)
    m = len(enumerate_tilings(k - 1))
    rho = np.arange(m)[None, :]
    table = np.repeat(np.arange(len(idx), dtype=np.int32)[:, None], 4 * m, axis=1)
    V, H = idx.halves[VERTICAL], idx.halves[HORIZONTAL]
    hv, hh = V[:, 0] >= 0, H[:, 0] >= 0
    table[hv, LEFT_HALF::4] = idx.vjoin[rho, V[hv, 1][:, None]]
    table[hv, RIGHT_HALF::4] = idx.vjoin[V[hv, 0][:, None], rho]
    table[hh, TOP_HALF::4] = idx.hjoin[H[hh, 0][:, None], rho]
    table[hh, BOTTOM_HALF::4] = idx.hjoin[rho, H[hh, 1][:, None]]
    table.setflags(write=False)
    return table


def move_table(kind: str, k: int) -> np.ndarray:
    from .enumeration import edge_move_table

    return edge_move_table(k) if kind == EDGE else block_move_table(k)


class SparseSymmetricStochastic:
    """Transition matrix stored exactly as integer off-diagonal counts over a common denominator.

    The diagonal is implicit: ``P[i, i] = 1 - sum_j P[i, j]``.
    """

    def __init__(self, counts: csr_matrix, denom: int, kind: str = "", k: int | None = None):
        counts = csr_matrix(counts, dtype=np.int64)
        counts.setdiag(0)
        counts.eliminate_zeros()
        counts.sort_indices()
        self.counts = counts
        self.denom = int(denom)
        self.kind = kind
        self.k = k

    @property
    def dim(self) -> int:
        return self.counts.shape[0]

    @property
    def nnz(self) -> int:
        return self.counts.nnz

    def diagonal_counts(self) -> np.ndarray:
        return self.denom - np.asarray(self.counts.sum(axis=1)).ravel()

    def entry(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(int(self.diagonal_counts()[i]), self.denom)
        return Fraction(int(self.counts[i, j]), self.denom)

    def row(self, i: int) -> dict[int, Fraction]:
        lo, hi = self.counts.indptr[i], self.counts.indptr[i + 1]
        out = {int(j): Fraction(int(c), self.denom) for j, c in zip(self.counts.indices[lo:hi], self.counts.data[lo:hi])}
        out[i] = Fraction(int(self.denom - self.counts.data[lo:hi].sum()), self.denom)
        return dict(sorted(out.items()))

    def row_dense(self, i: int) -> np.ndarray:
        out = np.zeros(self.dim)
        for j, p in self.row(i).items():
            out[j] = float(p)
        return out

    def offdiagonal_values(self) -> set[Fraction]:
        return {Fraction(int(c), self.denom) for c in np.unique(self.counts.data)}

    def is_symmetric(self) -> bool:
        return (self.counts != self.counts.T).nnz == 0

    def is_stochastic(self) -> bool:
        return bool((self.counts.data >= 0).all() and (self.diagonal_counts() >= 0).all())

    def to_csr(self, shifted: bool = False) -> csr_matrix:
        """Float matrix with diagonal; ``shifted`` gives ``(P + I) / 2``."""
        p = self.counts.astype(np.float64) / self.denom
        d = self.diagonal_counts() / self.denom
        m = (p + diags(d)).tocsr()
        if shifted:
            m = ((m + diags(np.ones(self.dim))) * 0.5).tocsr()
        m.sort_indices()
        return m

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    def lazy(self) -> "SparseSymmetricStochastic":
        """``(I + P) / 2``."""
        return SparseSymmetricStochastic(self.counts, 2 * self.denom, self.kind + "-lazy", self.k)

    def triplets(self) -> Iterator[tuple[int, int, Fraction]]:
        diag = self.diagonal_counts()
        for i in range(self.dim):
            lo, hi = self.counts.indptr[i], self.counts.indptr[i + 1]
            entries = [(int(j), int(c)) for j, c in zip(self.counts.indices[lo:hi], self.counts.data[lo:hi])]
            entries.append((i, int(diag[i])))
            for j, c in sorted(entries):
                if c:
                    yield i, j, Fraction(c, self.denom)

    def write_triplets(self, fh: TextIO) -> None:
        for i, j, p in self.triplets():
            fh.write(f"{i} {j} {p.numerator}/{p.denominator}\n")

    @classmethod
    def read_triplets(cls, fh: TextIO) -> "SparseSymmetricStochastic":
        rows, cols, vals = [], [], []
        for line in fh:
            if not line.strip():
                continue
            i, j, v = line.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(Fraction(v))
        denom = 1
        for v in vals:
            denom = denom * v.denominator // np.gcd(denom, v.denominator)
        n = max(max(rows), max(cols)) + 1
        data = [int(v * denom) for v in vals]
        return cls(coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr(), denom)


def _check_matrix_k(k: int, low: int) -> None:
    if not low <= k <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"matrix construction needs {low} <= k <= {MAX_MATERIALIZED_K}")


@lru_cache(maxsize=None)
def build_edge_matrix(k: int) -> SparseSymmetricStochastic:
    """Edge-flip transition matrix; each flip has 2 of the 4n equally likely (rectangle, side) draws."""
    _check_matrix_k(k, 1)
    g = flip_graph(k)
    rows, cols, data = [], [], []
    for i, j, m in g.edges():
        rows += [i, j]
        cols += [j, i]
        data += [m, m]
    n = g.num_vertices
    counts = coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return SparseSymmetricStochastic(counts, 4 << k, EDGE, k)


@lru_cache(maxsize=None)
def build_block_matrix(k: int) -> SparseSymmetricStochastic:
    """Block-dynamics matrix; ``counts[x, y]`` is the number of (rho, direction) draws taking x to y."""
    _check_matrix_k(k, 2)
    table = block_move_table(k)
    n, width = table.shape
    rows = np.repeat(np.arange(n, dtype=np.int64), width)
    cols = table.ravel().astype(np.int64)
    keep = rows != cols
    counts = coo_matrix((np.ones(int(keep.sum()), dtype=np.int64), (rows[keep], cols[keep])), shape=(n, n)).tocsr()
    return SparseSymmetricStochastic(counts, width, BLOCK, k)


def build_matrix(kind: str, k: int) -> SparseSymmetricStochastic:
    return build_edge_matrix(k) if kind == EDGE else build_block_matrix(k)


# -- direct geometric simulation (any k up to MAX_GRID_K) -----------------------

class GridState:
    """Mutable edge-flip state for the grid kernel.

    Rectangles live in slots ``(rx, ry, rw, rh)`` in units of ``2**-k``;
    ``grid`` maps each cell to its slot and ``keys`` holds the sorted raster
    keys ``y0 * N + x0`` of the lower-left corners, so ``keys[rank]`` resolves a
    drawn rank exactly as :attr:`Tiling.ordered_rects` does.
    """

    def __init__(self, t: Tiling):
        if t.k > MAX_GRID_K:
            raise SizeGuardError(f"grid simulation needs k <= {MAX_GRID_K}")
        k = self.k = t.k
        N = self.N = 1 << k
        boxes = [r.grid_box(k) for r in t.ordered_rects]
        self.rx = np.array([b[0] for b in boxes], dtype=np.int32)
        self.ry = np.array([b[1] for b in boxes], dtype=np.int32)
        self.rw = np.array([b[2] for b in boxes], dtype=np.int32)
        self.rh = np.array([b[3] for b in boxes], dtype=np.int32)
        self.grid = np.empty(N * N, dtype=np.int32)
        g = self.grid.reshape(N, N)
        for slot, (x0, y0, w, h) in enumerate(boxes):
            g[y0:y0 + h, x0:x0 + w] = slot
        self.keys = (self.ry.astype(np.int64) * N + self.rx).astype(np.int64)
        self.counters = np.array([(self.rw == N).sum(), (self.rh == N).sum()], dtype=np.int64)

    def walk(self, draws: np.ndarray, trace: np.ndarray | None = None, kernels=None) -> int:
        kernels = _backend.kernels if kernels is None else kernels
        return kernels.grid_walk(self.N, self.rx, self.ry, self.rw, self.rh, self.grid,
                                 self.keys, self.counters, draws, trace)

    def to_tiling(self) -> Tiling:
        k = self.k
        rects = []
        for x0, y0, w, h in zip(self.rx.tolist(), self.ry.tolist(), self.rw.tolist(), self.rh.tolist()):
            rects.append(DyadicRectangle(x0 // w, k - (w.bit_length() - 1), y0 // h, k - (h.bit_length() - 1)))
        return Tiling(k, frozenset(rects))


# -- trajectories ---------------------------------------------------------------

STATISTICS = ("vertical", "horizontal", "state")


@dataclass
class Trajectory:
    config: ChainConfig
    steps: int
    final: Tiling
    trace: np.ndarray | None = None
    statistic: str | None = None

    def write_csv(self, fh: TextIO) -> None:
        fh.write(f"step,{self.statistic}\n")
        for i, v in enumerate(self.trace.tolist()):
            fh.write(f"{i},{v}\n")


def _stat_of_tiling(t: Tiling, statistic: str):
    if statistic == "vertical":
        return int(t.has_vertical_bisector())
    if statistic == "horizontal":
        return int(t.has_horizontal_bisector())
    return t.encode()


def run_trajectory(cfg: ChainConfig, start: Tiling, steps: int, statistic: str | None = None,
                   engine: str = "auto", kernels=None) -> Trajectory:
    """Simulate ``steps`` moves from ``start``.

    ``statistic`` records a per-step value (index 0 is the start): the
    ``vertical``/``horizontal`` bisector indicator or, for k <= 4, the
    ``state`` index.  ``engine`` is ``table`` (k <= 4), ``grid`` (edge flips)
    or ``tiling`` (object-level, slow); ``auto`` picks the fastest available.
    """
    if start.k != cfg.k:
        raise ValueError(f"start has k={start.k}, config has k={cfg.k}")
    if statistic is not None and statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    kernels = _backend.kernels if kernels is None else kernels
    if engine == "auto":
        engine = "table" if cfg.k <= MAX_MATERIALIZED_K else ("grid" if cfg.kind == EDGE else "tiling")
    rng = make_rng(cfg.seed)
    m = cfg.draw_range
    trace = None

    if engine == "table":
        idx = enumerate_tilings(cfg.k)
        table = np.ascontiguousarray(move_table(cfg.kind, cfg.k))
        s = idx.lookup(start)
        states = np.empty(steps + 1, dtype=np.int32) if statistic else None
        if states is not None:
            states[0] = s
        pos = 1
        for draws in iter_draws(rng, m, steps):
            buf = states[pos:pos + len(draws)] if states is not None else None
            s = kernels.table_walk(table, np.int32(s), draws, buf, None)
            pos += len(draws)
        final = idx[int(s)]
        if statistic == "state":
            trace = states
        elif statistic == "vertical":
            trace = idx.vertical[states].astype(np.uint8)
        elif statistic == "horizontal":
            trace = idx.horizontal[states].astype(np.uint8)
    elif engine == "grid":
        if cfg.kind != EDGE:
            raise ValueError("the grid engine simulates the edge-flip chain only")
        if statistic == "state":
            raise ValueError("state traces need the table engine")
        g = GridState(start)
        codes = np.empty(steps + 1, dtype=np.uint8) if statistic else None
        if codes is not None:
            codes[0] = int(start.has_vertical_bisector()) | (int(start.has_horizontal_bisector()) << 1)
        pos = 1
        for draws in iter_draws(rng, m, steps):
            g.walk(draws, codes[pos:pos + len(draws)] if codes is not None else None, kernels)
            pos += len(draws)
        final = g.to_tiling()
        if statistic == "vertical":
            trace = codes & 1
        elif statistic == "horizontal":
            trace = codes >> 1
    elif engine == "tiling":
        prev = enumerate_tilings(cfg.k - 1) if cfg.kind == BLOCK else None
        t = start
        values = [_stat_of_tiling(t, statistic)] if statistic else None
        for draws in iter_draws(rng, m, steps):
            for u in draws.tolist():
                t = apply_edge_draw(t, u) if cfg.kind == EDGE else apply_block_draw(t, u, prev)
                if values is not None:
                    values.append(_stat_of_tiling(t, statistic))
        final = t
        if values is not None:
            trace = np.array(values, dtype=object if statistic == "state" else np.uint8)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return Trajectory(cfg, steps, final, trace, statistic)


def occupancy(cfg: ChainConfig, start: Tiling, steps: int, kernels=None) -> np.ndarray:
    """Visit counts per state index over ``steps`` moves (k <= 4)."""
    kernels = _backend.kernels if kernels is None else kernels
    idx = enumerate_tilings(cfg.k)
    table = np.ascontiguousarray(move_table(cfg.kind, cfg.k))
    counts = np.zeros(len(idx), dtype=np.int64)
    s = np.int32(idx.lookup(start))
    for draws in iter_draws(make_rng(cfg.seed), cfg.draw_range, steps):
        s = np.int32(kernels.table_walk(table, s, draws, None, counts))
    return counts


def one_step_counts(cfg: ChainConfig, start: Tiling, samples: int) -> np.ndarray:
    """Histogram over state indices of ``samples`` independent single steps from ``start`` (k <= 4)."""
    idx = enumerate_tilings(cfg.k)
    table = move_table(cfg.kind, cfg.k)
    s = idx.lookup(start)
    out = np.zeros(len(idx), dtype=np.int64)
    rng = make_rng(cfg.seed)
    for draws in iter_draws(rng, cfg.draw_range, samples):
        out += np.bincount(table[s, draws], minlength=len(idx))
    return out
