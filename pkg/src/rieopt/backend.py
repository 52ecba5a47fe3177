"""Kernel backend selection.

Hot numeric kernels are JIT-compiled with numba when it is available.
Set ``RIEOPT_BACKEND=numpy`` to force the pure-numpy fallback (no
compilation), or ``RIEOPT_BACKEND=numba`` to require numba and fail
loudly when it cannot be imported.  The default (``auto``) prefers
numba and silently falls back to numpy.
"""

from __future__ import annotations

import os

ENV_VAR = "RIEOPT_BACKEND"
_VALID = ("auto", "numba", "numpy")


def requested_backend() -> str:
    value = os.environ.get(ENV_VAR, "auto").strip().lower()
    if value not in _VALID:
        raise ValueError(
            f"{ENV_VAR} must be one of {_VALID}, got {value!r}"
        )
    return value


def resolve_backend() -> str:
    req = requested_backend()
    if req == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if req == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = resolve_backend()
HAS_NUMBA = BACKEND == "numba"
