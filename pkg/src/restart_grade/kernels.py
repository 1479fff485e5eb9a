"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when
``RESTART_GRADE_BACKEND=python`` is set, the numpy/pure-Python fallback is
used.  Both expose ``restart_psor``, ``restart_residual`` and
``simulate_walks`` with identical semantics.
"""

import os

from . import _pure

ENV_BACKEND = "RESTART_GRADE_BACKEND"
ENV_THREADS = "RESTART_GRADE_THREADS"

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def get_backend(name=None):
    """Return the kernel module for ``name`` in {"compiled", "python", None}."""
    name = name or os.environ.get(ENV_BACKEND) or ("compiled" if _compiled else "python")
    if name == "python":
        return _pure
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available; rebuild the extension")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available():
    return _compiled is not None


def thread_count():
    try:
        return max(1, int(os.environ.get(ENV_THREADS, "1")))
    except ValueError:
        return 1
