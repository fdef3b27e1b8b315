"""Orthonormal Haar analysis/synthesis in 1D and 2D, single- and multi-level.

Conventions
-----------
* Pairwise (non-overlapping) phase: ``approx[k] = (x[2k] + x[2k+1]) / sqrt(2)``
  and ``detail[k] = (x[2k] - x[2k+1]) / sqrt(2)``.  No boundary extension.
* 2D images are channels-first, ``(C, H, W)``; a leading batch axis
  ``(B, C, H, W)`` and bare ``(H, W)`` arrays are accepted too.  The
  transform always acts on the last two axes.
* Band naming: ``HL`` = high-pass along rows then low-pass along columns,
  ``LH`` = low-pass along rows then high-pass along columns.  Some
  libraries swap these two names.
* ``details`` lists are ordered coarsest first (level L, ..., level 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wvae import kernels
from wvae.errors import DomainError, ShapeError

DETAIL_BANDS = ("HL", "LH", "HH")


@dataclass(frozen=True)
class FilterPair:
    h: np.ndarray
    g: np.ndarray
    h_synth: np.ndarray
    g_synth: np.ndarray


def haar_filters() -> FilterPair:
    r = math.sqrt(0.5)  # correctly rounded 1/sqrt(2)
    h = np.array([r, r])
    g = np.array([r, -r])
    # orthogonal wavelet: synthesis taps are time-reversed analysis taps
    return FilterPair(h=h, g=g, h_synth=h[::-1].copy(), g_synth=g[::-1].copy())


@dataclass
class WaveletPyramid1D:
    approx: np.ndarray
    details: list  # coarsest first

    @property
    def levels(self) -> int:
        return len(self.details)

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.approx] + list(self.details), axis=-1)


@dataclass
class WaveletPyramid2D:
    approx: np.ndarray
    details: list  # [(HL, LH, HH)] coarsest first

    @property
    def levels(self) -> int:
        return len(self.details)

    @property
    def shape(self) -> tuple:
        """Shape of the image this pyramid synthesizes to."""
        lead = self.approx.shape[:-2]
        h, w = self.approx.shape[-2:]
        f = 2 ** self.levels
        return lead + (h * f, w * f)

    def bands(self):
        """Yield ``(level, name, array)`` in flattening order."""
        yield self.levels, "LL", self.approx
        for i, triple in enumerate(self.details):
            level = self.levels - i
            for name, band in zip(DETAIL_BANDS, triple):
                yield level, name, band

    def detail_arrays(self) -> list:
        return [b for triple in self.details for b in triple]


def _check_levels(levels: int) -> None:
    if int(levels) != levels or levels < 1:
        raise DomainError(f"levels must be a positive integer, got {levels!r}")


# --- 1D -------------------------------------------------------------------


def dwt1d_level(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] % 2:
        raise ShapeError(f"1D DWT needs an even-length signal, got shape {x.shape}")
    lead = x.shape[:-1]
    out = kernels.haar1d_forward(x.reshape(-1, x.shape[-1]))
    half = x.shape[-1] // 2
    return out[0].reshape(lead + (half,)), out[1].reshape(lead + (half,))


def idwt1d_level(approx, detail):
    approx = np.asarray(approx, dtype=np.float64)
    detail = np.asarray(detail, dtype=np.float64)
    if approx.shape != detail.shape or approx.ndim == 0:
        raise ShapeError(f"band shapes differ: {approx.shape} vs {detail.shape}")
    lead = approx.shape[:-1]
    n = approx.shape[-1]
    out = kernels.haar1d_inverse(approx.reshape(-1, n), detail.reshape(-1, n))
    return out.reshape(lead + (2 * n,))


def dwt1d_multi(x, levels: int) -> WaveletPyramid1D:
    _check_levels(levels)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] % (2 ** levels):
        raise ShapeError(f"length {x.shape[-1:]} not divisible by 2**{levels}")
    details = []
    a = x
    for _ in range(levels):
        a, d = dwt1d_level(a)
        details.append(d)
    return WaveletPyramid1D(approx=a, details=details[::-1])


def idwt1d_multi(p: WaveletPyramid1D) -> np.ndarray:
    if p.levels < 1:
        raise ShapeError("pyramid has no detail levels")
    a = np.asarray(p.approx, dtype=np.float64)
    for d in p.details:
        d = np.asarray(d, dtype=np.float64)
        if d.shape != a.shape:
            raise ShapeError(f"detail band {d.shape} does not match approximation {a.shape}")
        a = idwt1d_level(a, d)
    return a


# --- 2D -------------------------------------------------------------------


def dwt2d_level(img):
    """One separable level: returns ``(LL, HL, LH, HH)``."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim < 2 or img.shape[-2] % 2 or img.shape[-1] % 2:
        raise ShapeError(f"2D DWT needs even height and width, got shape {img.shape}")
    lead = img.shape[:-2]
    H, W = img.shape[-2:]
    out = kernels.haar2d_forward(img.reshape((-1, H, W)))
    shape = lead + (H // 2, W // 2)
    return tuple(out[i].reshape(shape) for i in range(4))


def idwt2d_level(ll, hl, lh, hh):
    bands = [np.asarray(b, dtype=np.float64) for b in (ll, hl, lh, hh)]
    shape = bands[0].shape
    if bands[0].ndim < 2 or any(b.shape != shape for b in bands):
        raise ShapeError(f"sub-band shapes differ: {[b.shape for b in bands]}")
    lead = shape[:-2]
    h, w = shape[-2:]
    flat = [b.reshape((-1, h, w)) for b in bands]
    return kernels.haar2d_inverse(*flat).reshape(lead + (2 * h, 2 * w))


def dwt2d_multi(img, levels: int) -> WaveletPyramid2D:
    _check_levels(levels)
    img = np.asarray(img, dtype=np.float64)
    f = 2 ** levels
    if img.ndim < 2 or img.shape[-2] % f or img.shape[-1] % f:
        raise ShapeError(f"image shape {img.shape} not divisible by 2**{levels}")
    details = []
    a = img
    for _ in range(levels):
        a, hl, lh, hh = dwt2d_level(a)
        details.append((hl, lh, hh))
    return WaveletPyramid2D(approx=a, details=details[::-1])


def idwt2d_multi(p: WaveletPyramid2D) -> np.ndarray:
    if p.levels < 1:
        raise ShapeError("pyramid has no detail levels")
    a = np.asarray(p.approx, dtype=np.float64)
    for triple in p.details:
        if len(triple) != 3:
            raise ShapeError("each detail level must hold exactly three bands")
        a = idwt2d_level(a, *triple)
    return a


# --- flattening -------------------------------------------------------------


@dataclass(frozen=True)
class BandSlot:
    level: int
    band: str
    h: int
    w: int
    offset: int
    size: int  # channels * h * w

    def as_dict(self) -> dict:
        return {"level": self.level, "band": self.band, "h": self.h, "w": self.w,
                "offset": self.offset}


@dataclass(frozen=True)
class PyramidLayout:
    """Where each band lives inside a flat coefficient vector.

    The approximation band comes first, then details for level L..1, each
    level ordered HL, LH, HH.  Within a band, values are stored
    channel-major then row-major.
    """

    levels: int
    height: int
    width: int
    channels: int
    slots: tuple

    @classmethod
    def for_image(cls, channels: int, height: int, width: int, levels: int) -> "PyramidLayout":
        _check_levels(levels)
        f = 2 ** levels
        if height % f or width % f:
            raise ShapeError(f"{height}x{width} not divisible by 2**{levels}")
        slots = []
        offset = 0
        h, w = height // f, width // f
        size = channels * h * w
        slots.append(BandSlot(levels, "LL", h, w, offset, size))
        offset += size
        for level in range(levels, 0, -1):
            h, w = height >> level, width >> level
            size = channels * h * w
            for name in DETAIL_BANDS:
                slots.append(BandSlot(level, name, h, w, offset, size))
                offset += size
        return cls(levels, height, width, channels, tuple(slots))

    @property
    def size(self) -> int:
        return self.channels * self.height * self.width

    @property
    def approx_size(self) -> int:
        return self.slots[0].size

    def detail_mask(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[: self.approx_size] = False
        return mask

    def as_list(self) -> list:
        return [s.as_dict() for s in self.slots]


def _split_band_shape(shape):
    """Return (batch_shape, channels) for a band of shape (..., h, w)."""
    if len(shape) == 2:
        return (), 1
    if len(shape) == 3:
        return (), shape[0]
    if len(shape) == 4:
        return shape[:1], shape[1]
    raise ShapeError(f"bands must be 2-, 3- or 4-dimensional, got {shape}")


def pyramid_flatten(p: WaveletPyramid2D):
    """Flatten a pyramid to ``(vector, layout)``; batched pyramids give (B, n)."""
    batch, channels = _split_band_shape(p.approx.shape)
    H, W = p.shape[-2:]
    layout = PyramidLayout.for_image(channels, H, W, p.levels)
    parts = []
    for slot, (_, _, band) in zip(layout.slots, p.bands()):
        if band.shape[-2:] != (slot.h, slot.w):
            raise ShapeError(f"band {slot.band}{slot.level} has shape {band.shape}")
        parts.append(np.reshape(band, batch + (slot.size,)))
    return np.concatenate(parts, axis=-1), layout


def pyramid_unflatten(vec, layout: PyramidLayout) -> WaveletPyramid2D:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim not in (1, 2) or vec.shape[-1] != layout.size:
        raise ShapeError(f"vector of shape {vec.shape} does not match layout size {layout.size}")
    batch = vec.shape[:-1]

    def cut(slot):
        block = vec[..., slot.offset: slot.offset + slot.size]
        return block.reshape(batch + (layout.channels, slot.h, slot.w))

    approx = cut(layout.slots[0])
    details = []
    for i in range(layout.levels):
        s = layout.slots[1 + 3 * i: 4 + 3 * i]
        details.append(tuple(cut(slot) for slot in s))
    return WaveletPyramid2D(approx=approx, details=details)
