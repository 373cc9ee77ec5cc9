"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``DENSECODE_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("DENSECODE_PURE"):
    from . import _pykernels as kernels
    COMPILED = False
else:
    try:
        from . import _kernels as kernels
        COMPILED = True
    except ImportError:
        from . import _pykernels as kernels
        COMPILED = False

__all__ = ["kernels", "COMPILED"]
