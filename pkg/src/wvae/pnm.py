"""Binary PGM (P5) / PPM (P6) reading and writing, maxval 255.

Images are float arrays in [0, 1], channels-first.  Quantization clamps
to [0, 1] and rounds half up: ``floor(255 * v + 0.5)``.
"""
import numpy as np

from wvae.errors import FormatError, ShapeError


def quantize(img) -> np.ndarray:
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def encode(img) -> bytes:
    """Encode a float image (H, W), (1, H, W) or (3, H, W) as PNM bytes."""
    img = np.asarray(img)
    if img.ndim == 2:
        img = img[None]
    if img.ndim != 3 or img.shape[0] not in (1, 3):
        raise ShapeError(f"PNM needs 1 or 3 channels, got shape {img.shape}")
    data = img if img.dtype == np.uint8 else quantize(img)
    c, h, w = data.shape
    magic = b"P5" if c == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (w, h)
    return header + np.ascontiguousarray(data.transpose(1, 2, 0)).tobytes()


def write(path, img) -> None:
    with open(path, "wb") as f:
        f.write(encode(img))


def _tokens(buf):
    """Yield (token, end_offset) for the header, skipping # comments."""
    i, n = 0, len(buf)
    while i < n:
        ch = buf[i:i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < n and buf[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not buf[j:j + 1].isspace() and buf[j:j + 1] != b"#":
                j += 1
            yield buf[i:j], j
            i = j


def decode(buf: bytes) -> np.ndarray:
    toks = _tokens(buf)
    try:
        magic, _ = next(toks)
        w, _ = next(toks)
        h, _ = next(toks)
        maxval, end = next(toks)
        w, h, maxval = int(w), int(h), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise FormatError("truncated or malformed PNM header") from exc
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported PNM magic {magic!r}")
    if not 0 < maxval < 256:
        raise FormatError(f"only 8-bit PNM supported, maxval={maxval}")
    c = 1 if magic == b"P5" else 3
    start = end + 1  # single whitespace byte after maxval
    count = w * h * c
    data = buf[start:start + count]
    if len(data) != count:
        raise FormatError(f"PNM payload has {len(data)} bytes, expected {count}")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(h, w, c).transpose(2, 0, 1)
    return arr.astype(np.float64) / maxval


def read(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode(f.read())
