"""Kernel backend selection.

The compiled Cython kernel is used when available; set BLOCKSALE_PURE_PYTHON=1
to force the numpy fallback (used by the backend-comparison benchmark and by
tests that cross-check the two implementations).
"""

from __future__ import annotations

import os

if os.environ.get("BLOCKSALE_PURE_PYTHON"):
    from . import _core_py as _impl

    USING_COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        USING_COMPILED = True
    except ImportError:
        from . import _core_py as _impl

        USING_COMPILED = False

fill_row = _impl.fill_row
