"""Pick the compiled kernels when available, else the NumPy fallback.

Set ``SIMBOOT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("SIMBOOT_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

kernels = _compiled if _compiled is not None else _fallback
BACKEND = "cython" if _compiled is not None else "python"


def get_kernels(name=None):
    """Kernel namespace by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled core is not built; run `pip install -e . --no-build-isolation`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
