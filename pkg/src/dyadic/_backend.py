"""Kernel selection.  The compiled module is used when importable unless
``DYADIC_PURE_PYTHON`` is set; :func:`load` fetches either one explicitly."""
import importlib
import os

BACKENDS = ("cython", "python")
_MODULES = {"cython": "dyadic._kernels", "python": "dyadic._pykernels"}


def load(name: str):
    return importlib.import_module(_MODULES[name])


def available() -> list[str]:
    out = []
    for name in BACKENDS:
        try:
            load(name)
        except ImportError:
            continue
        out.append(name)
    return out


if os.environ.get("DYADIC_PURE_PYTHON"):
    BACKEND = "python"
else:
    try:
        load("cython")
        BACKEND = "cython"
    except ImportError:
        BACKEND = "python"

kernels = load(BACKEND)


def name_of(module) -> str:
    for name, mod in _MODULES.items():
        if module.__name__ == mod:
            return name
    return module.__name__
