"""Backend switch for the hot kernels.

``RAREWAVE_BACKEND=numpy`` forces the vectorised numpy path; the default is
numba when it imports. ``use_backend`` switches at runtime (tests, benchmark).
"""

from __future__ import annotations

import contextlib
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None

_requested = os.environ.get("RAREWAVE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"RAREWAVE_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
_backend = _requested if HAVE_NUMBA else "numpy"


def njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    name = name.lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    old = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)
