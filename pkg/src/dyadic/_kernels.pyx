# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  Signatures mirror ``dyadic._pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, threadid
from libc.math cimport sqrt, fabs

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8

DEF CHUNK = 256


def table_walk(const i32[:, ::1] table, i32 start, const i64[::1] draws,
               i32[::1] trace=None, i64[::1] counts=None):
    cdef Py_ssize_t i, m = draws.shape[0]
    cdef i32 s = start
    cdef bint do_trace = trace is not None
    cdef bint do_counts = counts is not None
    with nogil:
        for i in range(m):
            s = table[s, draws[i]]
            if do_trace:
                trace[i] = s
            if do_counts:
                counts[s] += 1
    return s


cdef inline void _replace_key(i64* keys, Py_ssize_t n, i64 old, i64 new) noexcept nogil:
    cdef Py_ssize_t i = 0
    while keys[i] != old:
        i += 1
    if new > old:
        while i + 1 < n and keys[i + 1] < new:
            keys[i] = keys[i + 1]
            i += 1
    else:
        while i > 0 and keys[i - 1] > new:
            keys[i] = keys[i - 1]
            i -= 1
    keys[i] = new


cdef inline void _paint(i32* grid, long N, long x0, long y0, long w, long h, i32 r) noexcept nogil:
    cdef long xx, yy
    for yy in range(y0, y0 + h):
        for xx in range(x0, x0 + w):
            grid[yy * N + xx] = r


def grid_walk(long N, i32[::1] rx, i32[::1] ry, i32[::1] rw, i32[::1] rh,
              i32[::1] grid, i64[::1] keys, i64[::1] counters,
              const i64[::1] draws, u8[::1] trace=None):
    cdef Py_ssize_t i, m = draws.shape[0], n = keys.shape[0]
    cdef i64 u, key
    cdef long rank, side, x0, y0, w, h, px, py, ux, uy, nw, nh
    cdef i32 r, r2
    cdef long flips = 0
    cdef bint do_trace = trace is not None
    with nogil:
        for i in range(m):
            u = draws[i]
            rank = u >> 2
            side = u & 3
            key = keys[rank]
            x0 = key % N
            y0 = key // N
            r = grid[y0 * N + x0]
            w = rw[r]
            h = rh[r]
            px = -1
            if side == 0:
                if (x0 // w) & 1 == 1:
                    px = x0 - w
                    py = y0
            elif side == 1:
                if (x0 // w) & 1 == 0 and w < N:
                    px = x0 + w
                    py = y0
            elif side == 2:
                if (y0 // h) & 1 == 0 and h < N:
                    px = x0
                    py = y0 + h
            else:
                if (y0 // h) & 1 == 1:
                    px = x0
                    py = y0 - h
            if px >= 0:
                r2 = grid[py * N + px]
                if rx[r2] == px and ry[r2] == py and rw[r2] == w and rh[r2] == h:
                    flips += 1
                    if side < 2:
                        ux = x0 if x0 < px else px
                        nw = 2 * w
                        nh = h // 2
                        rx[r] = ux; ry[r] = y0; rw[r] = nw; rh[r] = nh
                        rx[r2] = ux; ry[r2] = y0 + nh; rw[r2] = nw; rh[r2] = nh
                        _paint(&grid[0], N, ux, y0, nw, nh, r)
                        _paint(&grid[0], N, ux, y0 + nh, nw, nh, r2)
                        _replace_key(&keys[0], n, y0 * N + (x0 if x0 > px else px), (y0 + nh) * N + ux)
                        if nw == N:
                            counters[0] += 2
                        if h == N:
                            counters[1] -= 2
                    else:
                        uy = y0 if y0 < py else py
                        nh = 2 * h
                        nw = w // 2
                        rx[r] = x0; ry[r] = uy; rw[r] = nw; rh[r] = nh
                        rx[r2] = x0 + nw; ry[r2] = uy; rw[r2] = nw; rh[r2] = nh
                        _paint(&grid[0], N, x0, uy, nw, nh, r)
                        _paint(&grid[0], N, x0 + nw, uy, nw, nh, r2)
                        _replace_key(&keys[0], n, (uy + h) * N + x0, uy * N + x0 + nw)
                        if nh == N:
                            counters[1] += 2
                        if w == N:
                            counters[0] -= 2
            if do_trace:
                trace[i] = (counters[0] == 0) | ((counters[1] == 0) << 1)
    return flips


cdef double _chunked_dot(const double* a, const double* b, Py_ssize_t n, double* partial, int threads) noexcept nogil:
    cdef Py_ssize_t c, j, nch = (n + CHUNK - 1) // CHUNK, lo, hi
    cdef double acc
    if threads > 1:
        for c in prange(nch, num_threads=threads, schedule="static"):
            _chunk_dot(a, b, c * CHUNK, min((c + 1) * CHUNK, n), partial)
    else:
        for c in range(nch):
            _chunk_dot(a, b, c * CHUNK, min((c + 1) * CHUNK, n), partial)
    acc = 0.0
    for c in range(nch):
        acc = acc + partial[c]
    return acc


cdef inline void _chunk_dot(const double* a, const double* b, Py_ssize_t lo, Py_ssize_t hi, double* partial) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(lo, hi):
        s = s + a[j] * b[j]
    partial[lo // CHUNK] = s


cdef inline void _row(const i64* indptr, const i32* indices, const double* data,
                      const double* x, double* y, Py_ssize_t i) noexcept nogil:
    cdef i64 p
    cdef double s = 0.0
    for p in range(indptr[i], indptr[i + 1]):
        s = s + data[p] * x[indices[p]]
    y[i] = s


def power_iterate(const i64[::1] indptr, const i32[::1] indices, const double[::1] data,
                  double[::1] x, long max_iter, double tol, long window, int threads=1):
    """Deflated power iteration on a symmetric matrix whose top eigenvector is constant.

    ``x`` must be a unit vector orthogonal to the constants; it is overwritten
    with the final iterate.  Returns ``(rayleigh, iterations, converged)``.
    """
    cdef Py_ssize_t n = x.shape[0], i, nch = (n + CHUNK - 1) // CHUNK
    cdef double[::1] y = np.empty(n)
    cdef double[::1] ones = np.ones(n)
    cdef double[::1] partial = np.empty(nch)
    cdef double lam = 0.0, lam_check = 0.0, mean, nrm
    cdef long it = 0
    cdef bint converged = False
    with nogil:
        while it < max_iter:
            it += 1
            if threads > 1:
                for i in prange(n, num_threads=threads, schedule="static"):
                    _row(&indptr[0], &indices[0], &data[0], &x[0], &y[0], i)
            else:
                for i in range(n):
                    _row(&indptr[0], &indices[0], &data[0], &x[0], &y[0], i)
            mean = _chunked_dot(&y[0], &ones[0], n, &partial[0], threads) / n
            for i in range(n):
                y[i] = y[i] - mean
            lam = _chunked_dot(&x[0], &y[0], n, &partial[0], threads)
            nrm = sqrt(_chunked_dot(&y[0], &y[0], n, &partial[0], threads))
            for i in range(n):
                x[i] = y[i] / nrm
            if it % window == 0:
                if it > window and fabs(lam - lam_check) <= tol * fabs(lam):
                    converged = True
                    break
                lam_check = lam
    return lam, it, converged


cdef long _bfs(const i64* indptr, const i32* indices, Py_ssize_t n, Py_ssize_t src,
               i32* dist, i32* queue) noexcept nogil:
    cdef Py_ssize_t head = 0, tail = 1, j
    cdef i64 p
    cdef i32 v, w
    for j in range(n):
        dist[j] = -1
    dist[src] = 0
    queue[0] = <i32>src
    while head < tail:
        v = queue[head]
        head += 1
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue[tail] = w
                tail += 1
    if tail < n:
        return -1
    return dist[queue[tail - 1]]


def eccentricities(const i64[::1] indptr, const i32[::1] indices, int threads=1):
    """BFS eccentricity of every vertex; -1 marks a vertex that cannot reach all others."""
    cdef Py_ssize_t n = indptr.shape[0] - 1, src
    cdef int nt = threads if threads > 1 else 1
    cdef i32[:, ::1] dist = np.empty((nt, max(n, 1)), dtype=np.int32)
    cdef i32[:, ::1] queue = np.empty((nt, max(n, 1)), dtype=np.int32)
    cdef i32[::1] ecc = np.empty(n, dtype=np.int32)
    cdef int tid
    if n == 0:
        return np.asarray(ecc)
    with nogil:
        if nt > 1:
            for src in prange(n, num_threads=nt, schedule="dynamic"):
                tid = threadid()
                ecc[src] = _bfs(&indptr[0], &indices[0], n, src, &dist[tid, 0], &queue[tid, 0])
        else:
            for src in range(n):
                ecc[src] = _bfs(&indptr[0], &indices[0], n, src, &dist[0, 0], &queue[0, 0])
    return np.asarray(ecc)
