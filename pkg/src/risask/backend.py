"""Monte-Carlo core selection.

The compiled extension is used when importable; otherwise the numpy
fallback implementing the same counter-based algorithm takes over.  Set
``RISASK_BACKEND=numpy`` (or ``cython``) to force a choice.
"""

from __future__ import annotations

import os

_forced = os.environ.get("RISASK_BACKEND", "").strip().lower()

if _forced == "numpy":
    from . import _kernel_np as _impl

    BACKEND = "numpy"
elif _forced == "cython":
    from . import _kernel as _impl  # noqa: F401  (raises if not built)

    BACKEND = "cython"
else:
    try:
        from . import _kernel as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _kernel_np as _impl  # type: ignore[no-redef]

        BACKEND = "numpy"

sep_trials = _impl.sep_trials
cascade_gains = _impl.cascade_gains
philox_words = _impl.philox_words


def resolve_threads(num_threads=None) -> int:
    """Positive thread count: the given value, or all available cores."""
    if num_threads is not None and int(num_threads) > 0:
        return int(num_threads)
    return os.cpu_count() or 1
