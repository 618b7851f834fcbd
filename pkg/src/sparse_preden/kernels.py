"""Hot inner loops, compiled when available.

The compiled extension ``_kernels_c`` is used if it imports; otherwise the
numpy fallback ``_kernels_py`` is.  Setting ``SPARSE_PREDEN_PURE=1`` forces
the fallback.  ``BACKEND`` names the selected implementation.
"""
import os

from . import _kernels_py

if os.environ.get("SPARSE_PREDEN_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

log_posterior_weights = _impl.log_posterior_weights
posterior_mean = _impl.posterior_mean
bayes_log_predictive = _impl.bayes_log_predictive
bayes_kl_loss = _impl.bayes_kl_loss
spike_miss_sq = _impl.spike_miss_sq

__all__ = [
    "BACKEND",
    "log_posterior_weights",
    "posterior_mean",
    "bayes_log_predictive",
    "bayes_kl_loss",
    "spike_miss_sq",
]
