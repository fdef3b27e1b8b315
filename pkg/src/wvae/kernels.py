"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded.  Setting ``WVAE_PURE_PYTHON=1`` forces the fallback.
"""
import os

if os.environ.get("WVAE_PURE_PYTHON", "") not in ("", "0"):
    from wvae import _kernels_py as _impl
else:
    try:
        from wvae import _kernels as _impl
    except ImportError:  # extension not built
        from wvae import _kernels_py as _impl

BACKEND = _impl.BACKEND
haar1d_forward = _impl.haar1d_forward
haar1d_inverse = _impl.haar1d_inverse
haar2d_forward = _impl.haar2d_forward
haar2d_inverse = _impl.haar2d_inverse
ssim_mean = _impl.ssim_mean
