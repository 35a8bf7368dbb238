"""The compiled and pure-Python kernels must be interchangeable."""
import os
import subprocess
import sys

import numpy as np
import pytest

from dyadic import _backend, chains as ch, spectral
from dyadic.enumeration import diameter, enumerate_tilings, flip_graph
from dyadic.tiling import VERTICAL, strips


def test_both_backends_importable():
    assert set(_backend.available()) == {"cython", "python"}
    assert _backend.name_of(_backend.load("python")) == "python"


def test_env_var_selects_python():
    code = "from dyadic import _backend; print(_backend.BACKEND)"
    env = dict(os.environ, DYADIC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_table_walk(kernels):
    table = np.ascontiguousarray(ch.move_table("block", 3))
    draws = ch.make_rng(1).integers(0, table.shape[1], 5000, dtype=np.int64)
    trace = np.empty(5000, dtype=np.int32)
    counts = np.zeros(table.shape[0], dtype=np.int64)
    end = kernels.table_walk(table, np.int32(0), draws, trace, counts)
    ref = _backend.load("python")
    trace2 = np.empty(5000, dtype=np.int32)
    counts2 = np.zeros(table.shape[0], dtype=np.int64)
    assert ref.table_walk(table, np.int32(0), draws, trace2, counts2) == end
    assert np.array_equal(trace, trace2) and np.array_equal(counts, counts2)


def test_grid_walk(kernels):
    cfg = ch.ChainConfig(5, ch.EDGE, 8)
    a = ch.run_trajectory(cfg, strips(5, VERTICAL), 5000, statistic="vertical", engine="grid", kernels=kernels)
    b = ch.run_trajectory(cfg, strips(5, VERTICAL), 5000, statistic="vertical", engine="tiling")
    assert a.final == b.final and np.array_equal(a.trace, b.trace)


@pytest.mark.parametrize("threads", [1, 3])
def test_power_iterate(kernels, threads):
    P = ch.build_edge_matrix(3)
    r = spectral.spectral_gap(P, kernels=kernels, threads=threads)
    assert abs(r.gap - spectral.dense_gap(P)) < 1e-10
    assert r.backend == _backend.name_of(kernels)


def test_power_iterate_identical_across_backends():
    P = ch.build_block_matrix(3)
    a = spectral.spectral_gap(P, kernels=_backend.load("cython"))
    b = spectral.spectral_gap(P, kernels=_backend.load("python"))
    assert a.iterations == b.iterations and abs(a.lambda2 - b.lambda2) < 1e-13


def test_eccentricities(kernels):
    g = flip_graph(3)
    m = g.csr()
    ecc = kernels.eccentricities(m.indptr.astype(np.int64), m.indices.astype(np.int32), 2)
    assert int(np.max(ecc)) == diameter(g) and len(ecc) == len(enumerate_tilings(3))
