import importlib.util
from pathlib import Path

import pytest

from dyadic import _backend

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


@pytest.mark.skipif("cython" not in _backend.available(), reason="compiled kernels not built")
def test_benchmark_backends_agree():
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    rows = mod.bench(repeat=1)
    assert len(rows) == 4 and all(r["outputs_match"] for r in rows)
