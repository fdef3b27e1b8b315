"""Reconstruction metrics, SSIM, and wavelet sparsity diagnostics.

SSIM here uses 8x8 uniform windows at stride 1 on the channel-mean
grayscale image, with C1 = (0.01 L)^2 and C2 = (0.03 L)^2, L = 1.  Values
are therefore only comparable with other numbers produced by this module,
not with the 11x11 Gaussian-window variant.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from wvae import kernels
from wvae.errors import DomainError, ShapeError
from wvae.latent import BCE_CLAMP
from wvae.wavelet import WaveletPyramid2D, dwt2d_multi

SSIM_WINDOW = 8
DYNAMIC_RANGE = 1.0
NEAR_ZERO = 1e-3


@dataclass
class MetricReport:
    mse: float
    ssim: float
    detail_l1_mean: float
    detail_near_zero_fraction: float
    hf_energy_ratio: float
    bce: float | None = None
    threshold: float = NEAR_ZERO

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"image shapes differ: {x.shape} vs {y.shape}")
    return x, y


def mse(x, y) -> float:
    x, y = _pair(x, y)
    return float(np.mean((x - y) ** 2))


def bce(x, y) -> float:
    """Binary cross-entropy of prediction ``y`` against target ``x``."""
    x, y = _pair(x, y)
    y = np.clip(y, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return float(np.mean(-(x * np.log(y) + (1.0 - x) * np.log(1.0 - y))))


def _gray(img):
    # (H, W) stays; (C, H, W) is averaged over channels
    return img if img.ndim == 2 else img.mean(axis=0)


def ssim(x, y, window: int = SSIM_WINDOW, dynamic_range: float = DYNAMIC_RANGE) -> float:
    x, y = _pair(x, y)
    if x.ndim not in (2, 3):
        raise ShapeError(f"ssim expects (H, W) or (C, H, W), got {x.shape}")
    gx, gy = _gray(x), _gray(y)
    if gx.shape[0] < window or gx.shape[1] < window:
        raise ShapeError(f"image {gx.shape} smaller than the {window}x{window} window")
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    return float(kernels.ssim_mean(np.ascontiguousarray(gx), np.ascontiguousarray(gy),
                                   window, c1, c2))


def sparsity_stats(p: WaveletPyramid2D, threshold: float = NEAR_ZERO):
    """Mean |detail| and the fraction of details with |c| < threshold."""
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    d = np.concatenate([np.abs(b).ravel() for b in p.detail_arrays()])
    if d.size == 0:
        return 0.0, 1.0
    return float(d.mean()), float(np.mean(d < threshold))


def hf_energy_ratio(img, levels: int) -> float:
    """Share of wavelet energy held by detail bands (0 for a zero image)."""
    p = dwt2d_multi(img, levels)
    detail = sum(float(np.sum(b * b)) for b in p.detail_arrays())
    total = detail + float(np.sum(p.approx * p.approx))
    return detail / total if total > 0 else 0.0


def evaluate(x, x_hat, pyramid: WaveletPyramid2D, levels: int,
             threshold: float = NEAR_ZERO, with_bce: bool = True) -> MetricReport:
    """Metric report for a batch ``(B, C, H, W)`` or a single image.

    ``pyramid`` holds the coefficients whose sparsity is summarized
    (encoder outputs for the wavelet model).  SSIM and the high-frequency
    ratio are averaged per image, in batch order.
    """
    x, x_hat = _pair(x, x_hat)
    xs = x if x.ndim == 4 else x[None]
    ys = x_hat if x_hat.ndim == 4 else x_hat[None]
    l1, frac = sparsity_stats(pyramid, threshold)
    s = [ssim(a, b) for a, b in zip(xs, ys)]
    hf = [hf_energy_ratio(b, levels) for b in ys]
    return MetricReport(
        mse=mse(x, x_hat),
        bce=bce(x, x_hat) if with_bce else None,
        ssim=float(np.mean(s)),
        detail_l1_mean=l1,
        detail_near_zero_fraction=frac,
        hf_energy_ratio=float(np.mean(hf)),
        threshold=threshold,
    )
