import numpy as np
import pytest
from hypothesis import settings, strategies as st

from dyadic.tiling import canonical_decode

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def _random_tree(draw, k):
    if k == 0:
        return "."
    axis = draw(st.sampled_from("VH"))
    return f"{axis}({_random_tree(draw, k - 1)},{_random_tree(draw, k - 1)})"


@st.composite
def tilings(draw, min_k=0, max_k=5):
    """Random tilings from random (usually non-canonical) split trees."""
    k = draw(st.integers(min_k, max_k))
    return canonical_decode(_random_tree(draw, k))


@st.composite
def tiling_pairs(draw, k_values=(2, 3, 4)):
    k = draw(st.sampled_from(k_values))
    return canonical_decode(_random_tree(draw, k)), canonical_decode(_random_tree(draw, k))


@pytest.fixture(params=["cython", "python"])
def kernels(request):
    from dyadic import _backend

    if request.param not in _backend.available():
        pytest.skip(f"{request.param} backend not built")
    return _backend.load(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
