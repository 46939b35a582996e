"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``SELFTEST_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
schur_block = _fallback.schur_block
xor_grid = _fallback.xor_grid

if os.environ.get("SELFTEST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "compiled"
        schur_block = _kernels.schur_block
        xor_grid = _kernels.xor_grid

IMPLEMENTATIONS = {"python": _fallback}
try:
    from . import _kernels as _compiled

    IMPLEMENTATIONS["compiled"] = _compiled
except ImportError:
    pass
