"""Kernel backend selection.

The compiled extension is preferred when present. Set CCEAD_BACKEND=pure to
force the fallback or CCEAD_BACKEND=compiled to fail loudly when the
extension is missing. Both backends implement the same kernel API with the
same floating-point operation order, so swapping them never changes results.
"""

import logging
import os

from ..errors import ConfigError

log = logging.getLogger(__name__)

_requested = os.environ.get("CCEAD_BACKEND", "").strip().lower()

if _requested not in ("", "pure", "compiled"):
    raise ConfigError(
        "CCEAD_BACKEND must be 'pure' or 'compiled', got %r" % _requested)

if _requested == "pure":
    from . import pykernels as kernels
    BACKEND = "pure"
elif _requested == "compiled":
    try:
        from . import ckernels as kernels  # type: ignore[no-redef]
    except ImportError as exc:
        raise ConfigError(
            "CCEAD_BACKEND=compiled but the extension is not built; "
            "reinstall the package or unset CCEAD_BACKEND") from exc
    BACKEND = "compiled"
else:
    try:
        from . import ckernels as kernels  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        from . import pykernels as kernels  # type: ignore[no-redef]
        BACKEND = "pure"
        log.info("compiled kernels unavailable, using pure-Python fallback")


def backend_name():
    """Name of the kernel backend selected at import time."""
    return BACKEND
