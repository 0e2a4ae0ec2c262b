"""Backend selection for the hot round-loop kernels.

The compiled extension is used when it imports; otherwise the pure-Python
reference implementation is used. Set ``STABLAB_PURE=1`` to force the
fallback (used by the benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _fallback

try:
    if os.environ.get("STABLAB_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _kernels as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _fallback
    BACKEND = "python"

hedge_expected_losses = _impl.hedge_expected_losses
interval_rerm_tracking = _impl.interval_rerm_tracking
abs_reg_argmin = _impl.abs_reg_argmin
abs_reg_loo = _impl.abs_reg_loo
abs_prefix_hindsight = _impl.abs_prefix_hindsight

__all__ = [
    "BACKEND",
    "abs_prefix_hindsight",
    "abs_reg_argmin",
    "abs_reg_loo",
    "hedge_expected_losses",
    "interval_rerm_tracking",
]
