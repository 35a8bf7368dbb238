"""Exhaustive generation of all tilings of a given size and the edge-flip graph."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, TextIO

import numpy as np
from scipy.sparse import csr_matrix

from . import _backend
from .errors import SizeGuardError
from .tiling import (
    HORIZONTAL,
    LEAF,
    VERTICAL,
    HalfBisector,
    Quadrant,
    Tiling,
    flip,
    half_bisectors,
    join,
    quadrant_rects,
)

MAX_MATERIALIZED_K = 4
MAX_STREAM_K = 5


class TilingIndex:
    """All tilings of size ``2**k`` in lexicographic order of their encodings.

    For ``k >= 1`` ``vjoin[i, j]`` is the index of the tiling whose left half is
    tiling ``i`` and right half tiling ``j`` of size ``2**(k-1)``; ``hjoin`` is
    the same for bottom/top.
    """

    def __init__(self, k: int, tilings: list[Tiling], vjoin=None, hjoin=None):
        self.k = k
        self.tilings = tilings
        self.encodings = [t.encode() for t in tilings]
        self.index = {e: i for i, e in enumerate(self.encodings)}
        self._by_rects = {t.rects: i for i, t in enumerate(tilings)}
        self.vjoin = vjoin
        self.hjoin = hjoin

    def __len__(self) -> int:
        return len(self.tilings)

    def __iter__(self) -> Iterator[Tiling]:
        return iter(self.tilings)

    def __getitem__(self, i: int) -> Tiling:
        return self.tilings[i]

    def lookup(self, t: Tiling) -> int:
        return self._by_rects[t.rects]

    def find(self, encoding: str) -> int:
        return self.index[encoding]

    @cached_property
    def vertical(self) -> np.ndarray:
        return np.array([t.has_vertical_bisector() for t in self.tilings], dtype=bool)

    @cached_property
    def horizontal(self) -> np.ndarray:
        return np.array([t.has_horizontal_bisector() for t in self.tilings], dtype=bool)

    @cached_property
    def flags(self) -> np.ndarray:
        """Half-bisector flags as small ints (bit values of :class:`HalfBisector`)."""
        if self.k == 0:
            return np.zeros(1, dtype=np.uint8)
        return np.array([int(half_bisectors(t)) for t in self.tilings], dtype=np.uint8)

    @cached_property
    def quadrant_ids(self) -> np.ndarray:
        """``(len, 4)`` ints; equal ids in a column mean equal rectangle sets in that quadrant."""
        ids: dict = {}
        out = np.empty((len(self), 4), dtype=np.int32)
        for i, t in enumerate(self.tilings):
            for c, q in enumerate(Quadrant):
                out[i, c] = ids.setdefault((q, quadrant_rects(t, q)), len(ids))
        return out

    @cached_property
    def halves(self) -> dict[str, np.ndarray]:
        """Per-state half indices: ``{"V": (len, 2), "H": (len, 2)}``, -1 where the bisector is absent."""
        out = {}
        for axis, table in ((VERTICAL, self.vjoin), (HORIZONTAL, self.hjoin)):
            h = np.full((len(self), 2), -1, dtype=np.int32)
            m = table.shape[0]
            flat = table.ravel()
            h[flat, 0] = np.repeat(np.arange(m, dtype=np.int32), m)
            h[flat, 1] = np.tile(np.arange(m, dtype=np.int32), m)
            out[axis] = h
        return out

    def dump(self, fh: TextIO) -> None:
        for e in self.encodings:
            fh.write(e + "\n")


def stream_count(k: int) -> int:
    """Count tilings of size ``2**k`` by scanning joins of the ``2**(k-1)`` index.

    A horizontal join duplicates a vertical join exactly when both halves have
    a vertical bisector, so only one pass over the smaller index is needed.
    """
    if k == 0:
        return 1
    if k > MAX_STREAM_K:
        raise SizeGuardError(f"streaming count supports k <= {MAX_STREAM_K}")
    prev = enumerate_tilings(k - 1)
    m = len(prev)
    vert = prev.vertical
    total = 0
    for i in range(m):
        # m vertical joins, plus horizontal joins that are not also vertical
        total += m + (m - int(vert.sum()) if vert[i] else m)
    return total


@lru_cache(maxsize=None)
def enumerate_tilings(k: int) -> TilingIndex:
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > MAX_MATERIALIZED_K:
        raise SizeGuardError(
            f"k={k} exceeds the materialisation guard k <= {MAX_MATERIALIZED_K}; use stream_count")
    if k == 0:
        return TilingIndex(0, [Tiling.unit()])
    prev = enumerate_tilings(k - 1)
    m = len(prev)
    found: dict[str, Tiling] = {}
    keys = {}
    for axis in (VERTICAL, HORIZONTAL):
        rows = []
        for a in prev.tilings:
            row = []
            for b in prev.tilings:
                t = join(a, b, axis)
                e = t.encode()
                found.setdefault(e, t)
                row.append(e)
            rows.append(row)
        keys[axis] = rows
    encodings = sorted(found)
    tilings = [found[e] for e in encodings]
    pos = {e: i for i, e in enumerate(encodings)}
    tables = {axis: np.array([[pos[e] for e in row] for row in keys[axis]], dtype=np.int32).reshape(m, m)
              for axis in keys}
    return TilingIndex(k, tilings, tables[VERTICAL], tables[HORIZONTAL])


def neighbors(t: Tiling) -> list[tuple[Tiling, int]]:
    """Every tiling one edge flip away, with the number of (rectangle, side) choices producing it."""
    if t.k < 1:
        raise ValueError("edge flips need k >= 1")
    c: Counter = Counter()
    for r in t.ordered_rects:
        for side in range(4):
            u = flip(t, r, side)
            if u is not None:
                c[u] += 1
    return sorted(c.items(), key=lambda item: item[0].encode())


@lru_cache(maxsize=None)
def edge_move_table(k: int) -> np.ndarray:
    """``table[i, 4*rank + side]``: state reached from state ``i`` by flipping ``side``
    of its ``rank``-th rectangle (raster order), or ``i`` if that flip is invalid."""
    if not 1 <= k <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"edge move table needs 1 <= k <= {MAX_MATERIALIZED_K}")
    idx = enumerate_tilings(k)
    n = 1 << k
    table = np.empty((len(idx), 4 * n), dtype=np.int32)
    by_rects = idx._by_rects
    for i, t in enumerate(idx.tilings):
        row = table[i]
        for rank, r in enumerate(t.ordered_rects):
            for side in range(4):
                u = flip(t, r, side)
                row[4 * rank + side] = i if u is None else by_rects[u.rects]
    table.setflags(write=False)
    return table


@dataclass
class FlipGraph:
    k: int
    index: TilingIndex
    adjacency: list[list[int]]
    multiplicity: dict[tuple[int, int], int] = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.adjacency)

    @property
    def num_edges(self) -> int:
        return len(self.multiplicity)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def edges(self) -> Iterator[tuple[int, int, int]]:
        for (i, j), m in sorted(self.multiplicity.items()):
            yield i, j, m

    def csr(self) -> csr_matrix:
        n = self.num_vertices
        rows = np.repeat(np.arange(n), [len(a) for a in self.adjacency])
        cols = np.fromiter((j for a in self.adjacency for j in a), dtype=np.int32, count=len(rows))
        return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.num_vertices

    def write_edge_list(self, fh: TextIO) -> None:
        for i, j, m in self.edges():
            fh.write(f"{i} {j} {m}\n")


@lru_cache(maxsize=None)
def flip_graph(k: int) -> FlipGraph:
    table = edge_move_table(k)
    idx = enumerate_tilings(k)
    adjacency = []
    mult: dict[tuple[int, int], int] = {}
    for i in range(len(idx)):
        c = Counter(int(j) for j in table[i] if j != i)
        adjacency.append(sorted(c))
        for j, m in c.items():
            if i < j:
                mult[(i, j)] = m
            elif mult.get((j, i)) != m:
                raise AssertionError(f"asymmetric flip multiplicity between {i} and {j}")
    return FlipGraph(k, idx, adjacency, mult)


def diameter(g: FlipGraph, threads: int = 1) -> int:
    m = g.csr()
    ecc = _backend.kernels.eccentricities(
        m.indptr.astype(np.int64), m.indices.astype(np.int32), threads)
    if (ecc < 0).any():
        raise ValueError("flip graph is disconnected")
    return int(ecc.max()) if len(ecc) else 0


def _check_boundary_k(k: int) -> None:
    if not 2 <= k <= MAX_MATERIALIZED_K:
        raise SizeGuardError(f"needs 2 <= k <= {MAX_MATERIALIZED_K}")


def boundary_indices(k: int) -> list[int]:
    """Indices of tilings without a vertical bisector that are one flip from one.

    Raises if any such tiling has more than one neighbour with a vertical bisector.
    """
    _check_boundary_k(k)
    g = flip_graph(k)
    vert = g.index.vertical
    out = []
    for i, nbrs in enumerate(g.adjacency):
        if vert[i]:
            continue
        hits = [j for j in nbrs if vert[j]]
        if len(hits) > 1:
            raise AssertionError(f"tiling {i} has {len(hits)} flips into the vertical-bisector set")
        if hits:
            out.append(i)
    return out


def boundary_set(k: int) -> list[Tiling]:
    idx = enumerate_tilings(k)
    return [idx[i] for i in boundary_indices(k)]


def pivotal_flip(t: Tiling):
    """The (rectangle, side, result) flip of a boundary tiling that creates a vertical bisector."""
    out, seen = [], set()
    for r in t.ordered_rects:
        for side in range(4):
            u = flip(t, r, side)
            # the same flip is reachable from both rectangles sharing the edge
            if u is not None and u.has_vertical_bisector() and u not in seen:
                seen.add(u)
                out.append((r, side, u))
    return out


def _upsilon_trees(m: int) -> list:
    if m == 0:
        return [LEAF]
    if m == 1:
        # too small for four quarters: a single horizontal cut instead
        return [(HORIZONTAL, LEAF, LEAF)]
    quarter = [t.canonical_tree for t in enumerate_tilings(m - 2)]
    if m == 2:
        top_right = [LEAF]
    else:
        eighth = [t.canonical_tree for t in enumerate_tilings(m - 3)]
        top_right = [(VERTICAL, a, b) for a in eighth for b in eighth]
    out = []
    for br in _upsilon_trees(m - 2):
        for tr in top_right:
            for bl in quarter:
                for tl in quarter:
                    out.append((VERTICAL, (HORIZONTAL, bl, tl), (HORIZONTAL, br, tr)))
    return out


def upsilon_set(k: int) -> list[Tiling]:
    """The recursively built family of double-bisector tilings used to bound the boundary size."""
    _check_boundary_k(k)
    return [Tiling.from_tree(tree) for tree in _upsilon_trees(k)]


def scan_subset_counts(k: int) -> tuple[int, int, int]:
    idx = enumerate_tilings(k)
    v, h = idx.vertical, idx.horizontal
    return int(v.sum()), int(h.sum()), int((v & h).sum())


def flag_names(flags: int) -> list[str]:
    return [f.name for f in HalfBisector if flags & f]
