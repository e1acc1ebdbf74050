# Use Numba if available and not disabled. Otherwise fall back to plain numpy.
#
# Set GAUDIN_OPERS_DISABLE_NUMBA=1 to force the numpy path (read at import time).

import logging
import os

logger = logging.getLogger(__name__)

_DISABLED = os.environ.get("GAUDIN_OPERS_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled by GAUDIN_OPERS_DISABLE_NUMBA")
    import numba

    njit = numba.njit
    HAVE_NUMBA = True
except ImportError as exc:
    logger.debug("numba unavailable (%s); using numpy kernels", exc)
    numba = None
    HAVE_NUMBA = False

    def njit(pyfunc=None, **kwargs):
        """Null decorator standing in for numba.njit."""
        def wrap(func):
            return func
        return wrap if pyfunc is None else wrap(pyfunc)


def use_numba():
    return HAVE_NUMBA
