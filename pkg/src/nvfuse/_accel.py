"""Backend switch for the hot kernels.

Set ``NVFUSE_BACKEND=numpy`` to bypass numba and run the pure-numpy path.
Anything else (or unset) uses numba when it is importable.
"""

import os

_requested = os.environ.get("NVFUSE_BACKEND", "numba").strip().lower()

try:
    import numba
    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the system TBB is too old for numba; go straight to OpenMP
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested != "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend():
    return "numba" if USE_NUMBA else "numpy"


def set_num_threads(n):
    """Limit numba's worker pool; a no-op on the numpy path."""
    if HAVE_NUMBA and n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
