"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set DHYM_PURE_PYTHON=1 to force the numpy fallback.  ``BACKEND`` records the
active choice; ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _fallback

_force_pure = os.environ.get("DHYM_PURE_PYTHON", "").lower() in {"1", "true", "yes"}

if not _force_pure:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"
else:
    _impl = _fallback
    BACKEND = "fallback"

sigma_all = _impl.sigma_all
sigma_batch = _impl.sigma_batch
subset_margins = _impl.subset_margins
eigh2_batch = _impl.eigh2_batch

__all__ = [
    "BACKEND",
    "sigma_all",
    "sigma_batch",
    "subset_margins",
    "eigh2_batch",
]
