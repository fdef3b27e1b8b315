"""On-disk formats: coefficient dumps (WVP1) and network checkpoints (WVN1).

Both are one UTF-8 JSON header line (sorted keys, no spaces) terminated by
``\\n``, followed by a raw payload of little-endian IEEE-754 doubles.
"""
import json

import numpy as np

from wvae.errors import FormatError
from wvae.latent import NoiseScale
from wvae.net import Architecture, Network, OptimizerState, init_network
from wvae.wavelet import PyramidLayout, WaveletPyramid2D, pyramid_flatten, pyramid_unflatten

COEFF_MAGIC = "WVP1"
NET_MAGIC = "WVN1"


def _dumps(header: dict) -> bytes:
    return (json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def write_blob(path, header: dict, payload) -> None:
    payload = np.ascontiguousarray(payload, dtype="<f8")
    with open(path, "wb") as f:
        f.write(_dumps(header))
        f.write(payload.tobytes())


def read_blob(path, magic: str):
    with open(path, "rb") as f:
        raw = f.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON") from exc
    if not isinstance(header, dict) or header.get("magic") != magic:
        raise FormatError(f"{path}: expected magic {magic!r}")
    body = raw[nl + 1:]
    if len(body) % 8:
        raise FormatError(f"{path}: payload is not a whole number of doubles")
    return header, np.frombuffer(body, dtype="<f8").astype(np.float64)


# --- coefficient dumps -------------------------------------------------------


def coefficient_header(layout: PyramidLayout) -> dict:
    return {"magic": COEFF_MAGIC, "levels": layout.levels, "height": layout.height,
            "width": layout.width, "channels": layout.channels, "layout": layout.as_list()}


def save_coefficients(path, pyramid: WaveletPyramid2D) -> None:
    vec, layout = pyramid_flatten(pyramid)
    if vec.ndim != 1:
        raise FormatError("coefficient dumps hold a single image, not a batch")
    write_blob(path, coefficient_header(layout), vec)


def load_coefficients(path) -> WaveletPyramid2D:
    header, payload = read_blob(path, COEFF_MAGIC)
    try:
        layout = PyramidLayout.for_image(int(header["channels"]), int(header["height"]),
                                         int(header["width"]), int(header["levels"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad coefficient header") from exc
    if header.get("layout") != layout.as_list():
        raise FormatError(f"{path}: band layout does not match the canonical ordering")
    if payload.size != layout.size:
        raise FormatError(f"{path}: {payload.size} coefficients, expected {layout.size}")
    return pyramid_unflatten(payload, layout)


# --- checkpoints ---------------------------------------------------------------


def save_checkpoint(path, net: Network, state: OptimizerState | None = None) -> None:
    state = state or OptimizerState()
    tensors, chunks, offset = [], [], 0
    named = list(net.parameters().items())
    for name in net.parameters():
        if name in state.m:
            named.append((f"adam.m.{name}", state.m[name]))
            named.append((f"adam.v.{name}", state.v[name]))
    for name, arr in named:
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(np.ravel(arr))
        offset += arr.size
    noise = net.noise
    header = {
        "magic": NET_MAGIC,
        "architecture": net.arch.as_dict(),
        "noise": {"learnable": noise.learnable,
                  "rho": [float(r) for r in noise.rho],
                  "fixed": None if noise.fixed is None else [float(s) for s in noise.fixed]},
        "optimizer": state.hyper(),
        "tensors": tensors,
        "count": offset,
    }
    payload = np.concatenate(chunks) if chunks else np.zeros(0)
    write_blob(path, header, payload)


def load_checkpoint(path):
    """Return ``(network, optimizer_state)``."""
    header, payload = read_blob(path, NET_MAGIC)
    try:
        arch = Architecture(**header["architecture"])
        nz = header["noise"]
        fixed = None if nz["fixed"] is None else np.array(nz["fixed"], dtype=np.float64)
        noise = NoiseScale(rho=np.array(nz["rho"], dtype=np.float64),
                           learnable=bool(nz["learnable"]), fixed=fixed)
        opt = header["optimizer"]
        tensors = header["tensors"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: bad checkpoint header") from exc
    if payload.size != header.get("count"):
        raise FormatError(f"{path}: payload holds {payload.size} values, header says {header.get('count')}")
    net = init_network(arch, seed=0, noise=noise)
    params = net.parameters()
    state = OptimizerState(lr=opt["lr"], beta1=opt["beta1"], beta2=opt["beta2"],
                           eps=opt["eps"], step=opt["step"])
    for t in tensors:
        name, shape, off = t["name"], tuple(t["shape"]), t["offset"]
        size = int(np.prod(shape))
        arr = payload[off:off + size].reshape(shape)
        if name in params:
            if params[name].shape != shape:
                raise FormatError(f"{path}: tensor {name} has shape {shape}")
            params[name][...] = arr
        elif name.startswith("adam.m."):
            state.m[name[7:]] = arr.copy()
        elif name.startswith("adam.v."):
            state.v[name[7:]] = arr.copy()
        else:
            raise FormatError(f"{path}: unknown tensor {name}")
    return net, state
