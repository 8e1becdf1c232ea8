"""Kernel backend selection.

The hot loops in :mod:`radaukron._kernels` exist twice: a numba ``@njit``
version and a vectorized pure-numpy version.  The environment variable
``RADAUKRON_BACKEND`` picks one explicitly (``"numba"`` or ``"numpy"``);
when unset, numba is used if it imports, numpy otherwise.
"""

import os

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    numba = None
    HAVE_NUMBA = False

ENV_VAR = "RADAUKRON_BACKEND"


def selected_backend():
    """Return the active backend name, ``"numba"`` or ``"numpy"``."""
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError(
                f"{ENV_VAR}=numba requested but numba is not importable"
            )
        return "numba"
    if choice == "numpy":
        return "numpy"
    if choice:
        raise ValueError(f"unknown {ENV_VAR} value {choice!r}; use 'numba' or 'numpy'")
    return "numba" if HAVE_NUMBA else "numpy"


def use_numba():
    return selected_backend() == "numba"
