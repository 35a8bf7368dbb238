"""Pure-Python/numpy versions of the compiled kernels (same signatures, same results)."""
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


def table_walk(table, start, draws, trace=None, counts=None):
    rows = table.tolist()
    s = int(start)
    if trace is None and counts is None:
        for u in draws.tolist():
            s = rows[s][u]
        return s
    visited = []
    append = visited.append
    for u in draws.tolist():
        s = rows[s][u]
        append(s)
    if trace is not None:
        trace[:] = visited
    if counts is not None:
        counts += np.bincount(np.asarray(visited, dtype=np.int64), minlength=len(counts))
    return s


def _replace_key(keys, old, new):
    keys.remove(old)
    lo, hi = 0, len(keys)
    while lo < hi:
        mid = (lo + hi) // 2
        if keys[mid] < new:
            lo = mid + 1
        else:
            hi = mid
    keys.insert(lo, new)


def grid_walk(N, rx, ry, rw, rh, grid, keys, counters, draws, trace=None):
    RX, RY, RW, RH = rx.tolist(), ry.tolist(), rw.tolist(), rh.tolist()
    G, K = grid.tolist(), keys.tolist()
    c0, c1 = int(counters[0]), int(counters[1])
    flips = 0
    codes = [] if trace is not None else None
    for u in draws.tolist():
        rank, side = u >> 2, u & 3
        key = K[rank]
        x0, y0 = key % N, key // N
        r = G[y0 * N + x0]
        w, h = RW[r], RH[r]
        px = -1
        if side == 0:
            if (x0 // w) & 1:
                px, py = x0 - w, y0
        elif side == 1:
            if not (x0 // w) & 1 and w < N:
                px, py = x0 + w, y0
        elif side == 2:
            if not (y0 // h) & 1 and h < N:
                px, py = x0, y0 + h
        else:
            if (y0 // h) & 1:
                px, py = x0, y0 - h
        if px >= 0:
            r2 = G[py * N + px]
            if RX[r2] == px and RY[r2] == py and RW[r2] == w and RH[r2] == h:
                flips += 1
                if side < 2:
                    ux, nw, nh = min(x0, px), 2 * w, h // 2
                    RX[r], RY[r], RW[r], RH[r] = ux, y0, nw, nh
                    RX[r2], RY[r2], RW[r2], RH[r2] = ux, y0 + nh, nw, nh
                    for yy in range(y0, y0 + nh):
                        G[yy * N + ux:yy * N + ux + nw] = [r] * nw
                    for yy in range(y0 + nh, y0 + h):
                        G[yy * N + ux:yy * N + ux + nw] = [r2] * nw
                    _replace_key(K, y0 * N + max(x0, px), (y0 + nh) * N + ux)
                    if nw == N:
                        c0 += 2
                    if h == N:
                        c1 -= 2
                else:
                    uy, nh, nw = min(y0, py), 2 * h, w // 2
                    RX[r], RY[r], RW[r], RH[r] = x0, uy, nw, nh
                    RX[r2], RY[r2], RW[r2], RH[r2] = x0 + nw, uy, nw, nh
                    for yy in range(uy, uy + nh):
                        G[yy * N + x0:yy * N + x0 + nw] = [r] * nw
                        G[yy * N + x0 + nw:yy * N + x0 + w] = [r2] * nw
                    _replace_key(K, (uy + h) * N + x0, uy * N + x0 + nw)
                    if nh == N:
                        c1 += 2
                    if w == N:
                        c0 -= 2
        if codes is not None:
            codes.append((c0 == 0) | ((c1 == 0) << 1))
    rx[:], ry[:], rw[:], rh[:] = RX, RY, RW, RH
    grid[:], keys[:] = G, K
    counters[0], counters[1] = c0, c1
    if trace is not None:
        trace[:] = codes
    return flips


def power_iterate(indptr, indices, data, x, max_iter, tol, window, threads=1):
    n = x.shape[0]
    M = csr_matrix((data, indices, indptr), shape=(n, n))
    lam = lam_check = 0.0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        y = M @ x
        y -= y.sum() / n
        lam = float(x @ y)
        x[:] = y / np.sqrt(y @ y)
        if it % window == 0:
            if it > window and abs(lam - lam_check) <= tol * abs(lam):
                converged = True
                break
            lam_check = lam
    return lam, it, converged


def eccentricities(indptr, indices, threads=1):
    n = len(indptr) - 1
    if n == 0:
        return np.empty(0, dtype=np.int32)
    g = csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    ecc = np.empty(n, dtype=np.int32)
    batch = 256
    for lo in range(0, n, batch):
        idx = np.arange(lo, min(lo + batch, n))
        d = shortest_path(g, method="D", unweighted=True, indices=idx)
        ecc[idx] = np.where(np.isinf(d).any(axis=1), -1, np.nan_to_num(d, posinf=0).max(axis=1)).astype(np.int32)
    return ecc
