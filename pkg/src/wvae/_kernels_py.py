"""Pure-numpy reference versions of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature.
The Haar kernels perform the same floating-point operations in the same
order as the compiled ones, so both backends agree bit for bit.  The SSIM
kernel reduces windows in a different order and agrees to round-off.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

INV_SQRT2 = 0.7071067811865476

BACKEND = "python"


def haar1d_forward(x):
    """(N, 2h) -> (2, N, h) holding approximation and detail rows."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((2, x.shape[0], x.shape[1] // 2))
    even = x[:, 0::2]
    odd = x[:, 1::2]
    np.multiply(even + odd, INV_SQRT2, out=out[0])
    np.multiply(even - odd, INV_SQRT2, out=out[1])
    return out


def haar1d_inverse(approx, detail):
    approx = np.ascontiguousarray(approx, dtype=np.float64)
    detail = np.ascontiguousarray(detail, dtype=np.float64)
    out = np.empty((approx.shape[0], 2 * approx.shape[1]))
    np.multiply(approx + detail, INV_SQRT2, out=out[:, 0::2])
    np.multiply(approx - detail, INV_SQRT2, out=out[:, 1::2])
    return out


def haar2d_forward(x):
    """(N, 2h, 2w) -> (4, N, h, w) in band order LL, HL, LH, HH.

    Rows are filtered first (along the width axis), then columns.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    x00 = x[:, 0::2, 0::2]
    x01 = x[:, 0::2, 1::2]
    x10 = x[:, 1::2, 0::2]
    x11 = x[:, 1::2, 1::2]
    a0 = (x00 + x01) * INV_SQRT2
    d0 = (x00 - x01) * INV_SQRT2
    a1 = (x10 + x11) * INV_SQRT2
    d1 = (x10 - x11) * INV_SQRT2
    out = np.empty((4,) + a0.shape)
    np.multiply(a0 + a1, INV_SQRT2, out=out[0])
    np.multiply(d0 + d1, INV_SQRT2, out=out[1])
    np.multiply(a0 - a1, INV_SQRT2, out=out[2])
    np.multiply(d0 - d1, INV_SQRT2, out=out[3])
    return out


def haar2d_inverse(ll, hl, lh, hh):
    ll = np.asarray(ll, dtype=np.float64)
    hl = np.asarray(hl, dtype=np.float64)
    lh = np.asarray(lh, dtype=np.float64)
    hh = np.asarray(hh, dtype=np.float64)
    a0 = (ll + lh) * INV_SQRT2
    a1 = (ll - lh) * INV_SQRT2
    d0 = (hl + hh) * INV_SQRT2
    d1 = (hl - hh) * INV_SQRT2
    n, h, w = ll.shape
    out = np.empty((n, 2 * h, 2 * w))
    np.multiply(a0 + d0, INV_SQRT2, out=out[:, 0::2, 0::2])
    np.multiply(a0 - d0, INV_SQRT2, out=out[:, 0::2, 1::2])
    np.multiply(a1 + d1, INV_SQRT2, out=out[:, 1::2, 0::2])
    np.multiply(a1 - d1, INV_SQRT2, out=out[:, 1::2, 1::2])
    return out


def ssim_mean(x, y, win, c1, c2):
    """Mean SSIM over all ``win x win`` uniform windows at stride 1."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    wx = sliding_window_view(x, (win, win))
    wy = sliding_window_view(y, (win, win))
    mx = wx.mean(axis=(-2, -1))
    my = wy.mean(axis=(-2, -1))
    dx = wx - mx[..., None, None]
    dy = wy - my[..., None, None]
    vx = (dx * dx).mean(axis=(-2, -1))
    vy = (dy * dy).mean(axis=(-2, -1))
    cxy = (dx * dy).mean(axis=(-2, -1))
    num = (2.0 * mx * my + c1) * (2.0 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))
