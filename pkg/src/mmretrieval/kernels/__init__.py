"""Kernel backend selection: compiled extension when available, numpy fallback otherwise.

Set TTR_PURE_PYTHON=1 to force the fallback (used by the benchmark and tests).
"""

import os

if os.environ.get("TTR_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _pure as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.BACKEND
bm25_accumulate = _impl.bm25_accumulate
ratcliff_matches = _impl.ratcliff_matches

__all__ = ["BACKEND", "bm25_accumulate", "ratcliff_matches"]
