"""Hot-kernel backend selection.

The compiled extension is preferred when present; the numpy implementation is
a drop-in replacement. ``RANGEMOS_BACKEND`` forces the choice:

* ``auto`` (default) - compiled if importable, else numpy
* ``cython``         - compiled, raise if it cannot be imported
* ``numpy``          - always the pure-numpy fallback

Both backends satisfy the same determinism contract, so results never depend
on which one is active.
"""

from __future__ import annotations

import os

from . import _numpy_impl

_requested = os.environ.get("RANGEMOS_BACKEND", "auto").strip().lower() or "auto"
if _requested not in {"auto", "cython", "numpy"}:
    raise ValueError(
        f"RANGEMOS_BACKEND={_requested!r} is not one of 'auto', 'cython', 'numpy'"
    )

if _requested == "numpy":
    _impl = _numpy_impl
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _numpy_impl

scatter_argmin = _impl.scatter_argmin
knn_vote = _impl.knn_vote
INVERSE_GAP_EPS = _impl.INVERSE_GAP_EPS


def backend_name() -> str:
    """Name of the active kernel backend ('cython' or 'numpy')."""
    return _impl.BACKEND_NAME
