"""Dataset ingestion: CIFAR-10 binary batches, synthetic images, upscaling."""
from __future__ import annotations

import glob
import os
from dataclasses import dataclass

import numpy as np

from wvae.errors import DomainError, FormatError, ShapeError

CIFAR_RECORD = 3073  # 1 label byte + 3 * 32 * 32 pixel bytes
SYNTH_KINDS = ("constant", "checkerboard", "gaussian-blobs", "edges")


@dataclass
class Dataset:
    images: np.ndarray  # (N, C, H, W) in [0, 1]
    labels: np.ndarray | None
    source: str

    def __len__(self) -> int:
        return len(self.images)

    @property
    def shape(self) -> tuple:
        return tuple(self.images.shape[1:])


def _cifar_files(path):
    if os.path.isdir(path):
        files = sorted(glob.glob(os.path.join(path, "*.bin")))
        if not files:
            raise FormatError(f"no CIFAR-10 .bin batches under {path}")
        return files
    return [path]


def parse_cifar10(buf: bytes, source: str = "<bytes>") -> Dataset:
    if len(buf) % CIFAR_RECORD:
        raise FormatError(f"{source}: {len(buf)} bytes is not a multiple of {CIFAR_RECORD}")
    rec = np.frombuffer(buf, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    labels = rec[:, 0].astype(np.int64)
    if np.any(labels > 9):
        bad = int(np.argmax(labels > 9))
        raise FormatError(f"{source}: record {bad} has label {labels[bad]} outside 0..9")
    images = rec[:, 1:].reshape(-1, 3, 32, 32).astype(np.float64) / 255.0
    return Dataset(images=images, labels=labels, source=f"cifar10:{source}")


def load_cifar10(path, limit: int = 0) -> Dataset:
    parts = []
    for fn in _cifar_files(path):
        with open(fn, "rb") as f:
            parts.append(parse_cifar10(f.read(), fn))
    images = np.concatenate([p.images for p in parts])
    labels = np.concatenate([p.labels for p in parts])
    if limit:
        images, labels = images[:limit], labels[:limit]
    return Dataset(images=images, labels=labels, source=f"cifar10:{path}")


def _is_dyadic(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _checkerboard(size, period, invert):
    idx = np.arange(size) // period
    board = ((idx[:, None] + idx[None, :]) % 2).astype(np.float64)
    return 1.0 - board if invert else board


def synth_dataset(kind: str, n: int, size: int, seed=0, channels: int = 1) -> Dataset:
    """Deterministic synthetic images of shape ``(n, channels, size, size)``.

    ``checkerboard`` image i has period ``2 ** ((i // 2) % log2(size))`` and is
    inverted for odd i, so image 0 is the period-1 board ``(r + c) % 2``.
    """
    if kind not in SYNTH_KINDS:
        raise DomainError(f"unknown synthetic kind {kind!r}; choose from {SYNTH_KINDS}")
    if not _is_dyadic(size) or size < 2:
        raise ShapeError(f"synthetic image size must be a power of two >= 2, got {size}")
    if n < 0 or channels < 1:
        raise DomainError("n must be >= 0 and channels >= 1")
    rng = np.random.default_rng(seed)
    out = np.empty((n, channels, size, size))
    rr, cc = np.mgrid[0:size, 0:size].astype(np.float64)
    nper = max(int(np.log2(size)), 1)
    for i in range(n):
        if kind == "constant":
            out[i] = rng.uniform(0.0, 1.0, size=(channels, 1, 1))
        elif kind == "checkerboard":
            out[i] = _checkerboard(size, 2 ** ((i // 2) % nper), i % 2 == 1)
        elif kind == "gaussian-blobs":
            for c in range(channels):
                img = np.zeros((size, size))
                for _ in range(rng.integers(1, 4)):
                    r0, c0 = rng.uniform(0, size, size=2)
                    sig = rng.uniform(1.5, max(size / 4.0, 1.6))
                    amp = rng.uniform(0.3, 1.0)
                    img += amp * np.exp(-((rr - r0) ** 2 + (cc - c0) ** 2) / (2 * sig * sig))
                out[i, c] = np.clip(img, 0.0, 1.0)
        else:  # edges: a random half-plane with two intensity levels
            theta = rng.uniform(0, 2 * np.pi)
            off = rng.uniform(-size / 4, size / 4)
            lo, hi = np.sort(rng.uniform(0.0, 1.0, size=2))
            side = (cc - size / 2) * np.cos(theta) + (rr - size / 2) * np.sin(theta) > off
            out[i] = np.where(side, hi, lo)
    return Dataset(images=out, labels=None, source=f"synth:{kind}")


def _keys(t, a=-0.5):
    t = np.abs(t)
    return np.where(
        t <= 1, (a + 2) * t ** 3 - (a + 3) * t ** 2 + 1,
        np.where(t < 2, a * t ** 3 - 5 * a * t ** 2 + 8 * a * t - 4 * a, 0.0))


def _bicubic_matrix(n: int, factor: int) -> np.ndarray:
    """(factor*n, n) interpolation matrix, half-pixel centers, clamped edges."""
    m = np.zeros((factor * n, n))
    for o in range(factor * n):
        src = (o + 0.5) / factor - 0.5
        i0 = int(np.floor(src))
        t = src - i0
        for k in range(-1, 3):
            m[o, min(max(i0 + k, 0), n - 1)] += _keys(k - t)
    return m


def upscale_bicubic(img, factor: int) -> np.ndarray:
    if factor not in (2, 4):
        raise DomainError(f"upscale factor must be 2 or 4, got {factor}")
    img = np.asarray(img, dtype=np.float64)
    mh = _bicubic_matrix(img.shape[-2], factor)
    mw = _bicubic_matrix(img.shape[-1], factor)
    out = np.einsum("ij,...jk,lk->...il", mh, img, mw)
    return np.clip(out, 0.0, 1.0)
