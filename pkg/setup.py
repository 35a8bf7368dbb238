import os

import numpy as np
from setuptools import Extension, setup

# DYADIC_NO_EXT=1 skips the compiled kernels; the package then runs on its numpy fallback.
ext_modules = []
if not os.environ.get("DYADIC_NO_EXT"):
    from Cython.Build import cythonize

    openmp = [] if os.environ.get("DYADIC_NO_OPENMP") else ["-fopenmp"]
    ext_modules = cythonize(
        [
            Extension(
                "dyadic._kernels",
                ["src/dyadic/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
