"""Experiment harness: configuration, training loop, ablation, exports."""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from wvae import formats, latent, metrics, pnm
from wvae.data import Dataset, load_cifar10, synth_dataset, upscale_bicubic
from wvae.errors import ConfigError, NumericalError, ShapeError
from wvae.latent import DEFAULT_NOISE_SCALE, NoiseScale
from wvae.net import (Architecture, Network, OptimizerState, adam_step, backward, forward,
                      forward_wvae, init_network)
from wvae.wavelet import WaveletPyramid2D, dwt2d_multi, pyramid_unflatten

# config-file / CLI key -> dataclass field
ALIASES = {"lambda": "lam"}


@dataclass
class TrainConfig:
    model: str = "wvae"
    levels: int = 2
    lam: float = 1e-3
    beta: float = 1.0
    lr: float = 1e-3
    batch: int = 32
    steps: int = 1000
    seed: int = 0
    noise: str = "learnable"
    data: str = "synth:gaussian-blobs"
    out: str = "runs/default"
    hidden: tuple = (256, 256)
    latent_dim: int = 64
    recon: str = "mse"
    synth_n: int = 64
    synth_size: int = 16
    channels: int = 1
    upscale: int = 1
    limit: int = 0
    eval_limit: int = 256
    threshold: float = 1e-3

    @classmethod
    def from_mapping(cls, values: dict, base: "TrainConfig | None" = None) -> "TrainConfig":
        """Build a config from string (or typed) values, on top of ``base``."""
        cfg = base or cls()
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        updates = {}
        for key, raw in values.items():
            if raw is None:
                continue
            name = ALIASES.get(key, key.replace("-", "_"))
            if name not in types:
                raise ConfigError(f"unknown config key {key!r}")
            updates[name] = _coerce(name, types[name], raw)
        return dataclasses.replace(cfg, **updates)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        return cls.from_mapping(read_config_file(path))

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            key = {v: k for k, v in ALIASES.items()}.get(f.name, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{key}={v}")
        return "\n".join(lines) + "\n"

    def noise_mode(self):
        """Return ``(learnable, initial_scale)``."""
        mode, _, val = self.noise.partition(":")
        if mode not in ("learnable", "fixed"):
            raise ConfigError(f"noise must be 'learnable', 'learnable:<s>' or 'fixed:<s>', got {self.noise!r}")
        if mode == "fixed" and not val:
            raise ConfigError("fixed noise needs a value, e.g. fixed:0.01")
        try:
            s = float(val) if val else DEFAULT_NOISE_SCALE
        except ValueError as exc:
            raise ConfigError(f"bad noise scale in {self.noise!r}") from exc
        if not s > 0:
            raise ConfigError("noise scale must be positive")
        return mode == "learnable", s

    def validate(self) -> None:
        if self.model not in ("wvae", "vae"):
            raise ConfigError(f"model must be wvae or vae, got {self.model!r}")
        if self.levels < 1:
            raise ConfigError("levels must be >= 1")
        if self.steps < 1 or self.batch < 1:
            raise ConfigError("steps and batch must be >= 1")
        if self.lam < 0 or self.beta < 0:
            raise ConfigError("lambda and beta must be >= 0")
        if not self.lr > 0:
            raise ConfigError("lr must be positive")
        if self.recon not in ("mse", "bce"):
            raise ConfigError(f"recon must be mse or bce, got {self.recon!r}")
        if self.upscale not in (1, 2, 4):
            raise ConfigError("upscale must be 1, 2 or 4")
        kind, _, arg = self.data.partition(":")
        if kind not in ("synth", "cifar10") or not arg:
            raise ConfigError(f"data must be synth:<kind> or cifar10:<path>, got {self.data!r}")
        self.noise_mode()


def _coerce(name, typ, raw):
    if not isinstance(raw, str):
        return tuple(raw) if name == "hidden" else raw
    try:
        if name == "hidden":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if typ in ("int", int):
            return int(raw)
        if typ in ("float", float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def read_config_file(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as f:
        for n, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            values[k.strip()] = v.strip()
    return values


# --- data ------------------------------------------------------------------


def load_dataset(cfg: TrainConfig) -> Dataset:
    kind, _, arg = cfg.data.partition(":")
    if kind == "synth":
        ds = synth_dataset(arg, cfg.synth_n, cfg.synth_size, seed=cfg.seed, channels=cfg.channels)
    else:
        ds = load_cifar10(arg, limit=cfg.limit)
    if cfg.upscale > 1:
        ds = Dataset(upscale_bicubic(ds.images, cfg.upscale), ds.labels, ds.source)
    return ds


def architecture_for(cfg: TrainConfig, shape) -> Architecture:
    c, h, w = shape
    try:
        return Architecture(kind=cfg.model, channels=c, height=h, width=w, levels=cfg.levels,
                            hidden=cfg.hidden, latent_dim=cfg.latent_dim)
    except ShapeError as exc:
        raise ConfigError(f"data shape {shape} incompatible with levels={cfg.levels}: {exc}") from exc


# --- training ----------------------------------------------------------------


@dataclass
class RunLog:
    records: list = field(default_factory=list)

    def steps(self) -> list:
        return [r for r in self.records if r["type"] == "step"]

    def final(self) -> dict:
        return next(r for r in reversed(self.records) if r["type"] == "final")

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def write(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.to_jsonl())


def _check_finite(net: Network, loss, step: int) -> None:
    if not np.isfinite(loss.total):
        raise NumericalError(f"step {step}: non-finite loss {loss.as_dict()}")
    for name, p in net.parameters().items():
        if not np.all(np.isfinite(p)):
            raise NumericalError(f"step {step}: parameter {name} became non-finite")


def _loss_for(tape, cfg: TrainConfig):
    return tape.loss(lam=cfg.lam, beta=cfg.beta, recon=cfg.recon)


def evaluate_network(net: Network, images, seed, cfg: TrainConfig, chunk: int = 64):
    """Reconstruct ``images`` and summarize.

    Returns ``(report, total_loss, x_hat, pyramid)`` where ``pyramid`` holds
    the encoder's deterministic coefficients (wavelet model) or the DWT of
    the reconstructions (baseline).
    """
    x_hats, codes, mus, logvars = [], [], [], []
    for k, start in enumerate(range(0, len(images), chunk)):
        xb = images[start:start + chunk]
        x_hat, tape = forward(net, xb, seed=[*_seed_list(seed), k])
        x_hats.append(x_hat)
        if tape.kind == "wvae":
            codes.append(tape.sample.c_nn)
        else:
            mus.append(tape.posterior.mu)
            logvars.append(tape.posterior.logvar)
    x_hat = np.concatenate(x_hats)
    if net.arch.kind == "wvae":
        layout = net.arch.layout()
        c = np.concatenate(codes)
        loss = latent.wvae_loss(images, x_hat, c, layout.detail_mask(), cfg.lam, cfg.recon)
        pyr = pyramid_unflatten(c, layout)
    else:
        post = latent.GaussianPosterior(np.concatenate(mus), np.concatenate(logvars))
        loss = latent.vae_loss(images, x_hat, post, cfg.beta, cfg.recon)
        pyr = dwt2d_multi(x_hat, cfg.levels)
    report = metrics.evaluate(images, x_hat, pyr, cfg.levels, threshold=cfg.threshold)
    return report, loss, x_hat, pyr


def _seed_list(seed):
    return list(seed) if isinstance(seed, (list, tuple)) else [seed]


def train(cfg: TrainConfig, dataset: Dataset | None = None, write: bool = True):
    """Run the seeded minibatch loop; returns ``(network, runlog)``.

    All configuration and shape problems surface before the first step.
    """
    cfg.validate()
    ds = dataset if dataset is not None else load_dataset(cfg)
    if len(ds) == 0:
        raise ConfigError("dataset is empty")
    if cfg.batch > len(ds):
        raise ConfigError(f"batch {cfg.batch} exceeds dataset size {len(ds)}")
    arch = architecture_for(cfg, ds.shape)
    learnable, s0 = cfg.noise_mode()
    net = init_network(arch, seed=cfg.seed, noise=NoiseScale.from_scales(s0, s0, learnable))
    state = OptimizerState(lr=cfg.lr)
    log = RunLog()
    order_rng = np.random.default_rng([cfg.seed, 0])
    per_epoch = len(ds) // cfg.batch
    order = None
    for step in range(1, cfg.steps + 1):
        pos = (step - 1) % per_epoch
        if pos == 0:
            epoch = (step - 1) // per_epoch
            order = order_rng.permutation(len(ds))
            log.records.append({"type": "epoch", "epoch": epoch, "order": order.tolist()})
        xb = ds.images[order[pos * cfg.batch:(pos + 1) * cfg.batch]]
        _, tape = forward(net, xb, seed=[cfg.seed, 1, step])
        loss = _loss_for(tape, cfg)
        grads = backward(tape, loss)
        adam_step(net, grads, state)
        _check_finite(net, loss, step)
        log.records.append({
            "type": "step", "step": step,
            "reconstruction": loss.reconstruction, "regularizer": loss.regularizer,
            "total": loss.total,
            "s_approx": net.noise.s_approx if arch.kind == "wvae" else None,
            "s_detail": net.noise.s_detail if arch.kind == "wvae" else None,
        })
    images = ds.images[: cfg.eval_limit] if cfg.eval_limit else ds.images
    report, eloss, _, _ = evaluate_network(net, images, [cfg.seed, 2], cfg)
    if not np.isfinite(eloss.total):
        raise NumericalError("final evaluation produced a non-finite loss")
    log.records.append({"type": "final", "split": "train", "metrics": dataclasses.asdict(report),
                        "loss": eloss.as_dict()})
    if write:
        os.makedirs(cfg.out, exist_ok=True)
        log.write(os.path.join(cfg.out, "runlog.jsonl"))
        formats.save_checkpoint(os.path.join(cfg.out, "checkpoint.wvn"), net, state)
        with open(os.path.join(cfg.out, "config.txt"), "w") as f:
            f.write(cfg.to_text())
    return net, log


REPORTED_FIXED_NOISE_MSE_GAP = 0.08


def ablate_noise_scale(cfg: TrainConfig, scale: float = DEFAULT_NOISE_SCALE,
                       dataset: Dataset | None = None, write: bool = True) -> dict:
    """Train fixed-``scale`` and learnable (init ``scale``) models on identical data/seed."""
    if cfg.model != "wvae":
        raise ConfigError("the noise-scale ablation applies to the wavelet model only")
    ds = dataset if dataset is not None else load_dataset(cfg)
    runs = {}
    for name, noise in (("fixed", f"fixed:{scale}"), ("learnable", f"learnable:{scale}")):
        sub = dataclasses.replace(cfg, noise=noise, out=os.path.join(cfg.out, name))
        net, log = train(sub, dataset=ds, write=write)
        fin = log.final()
        runs[name] = {
            "final_mse": fin["metrics"]["mse"],
            "final_total": fin["loss"]["total"],
            "s_approx": net.noise.s_approx,
            "s_detail": net.noise.s_detail,
            "s_detail_trajectory_constant": len({r["s_detail"] for r in log.steps()}) == 1,
        }
    f, l = runs["fixed"]["final_mse"], runs["learnable"]["final_mse"]
    report = {
        "fixed": runs["fixed"],
        "learnable": runs["learnable"],
        "mse_relative_difference": (f - l) / l if l > 0 else None,
        "reference_gap": REPORTED_FIXED_NOISE_MSE_GAP,
        "seed": cfg.seed,
        "steps": cfg.steps,
    }
    if write:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "ablation.json"), "w") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
    return report


# --- exports -----------------------------------------------------------------


def _load_net(checkpoint):
    if isinstance(checkpoint, Network):
        return checkpoint
    net, _ = formats.load_checkpoint(checkpoint)
    return net


def reconstruct(checkpoint, images, seed=0, out_dir=None, lam: float = 0.0, beta: float = 1.0):
    """Reconstruct a batch ``(N, C, H, W)``; optionally write one PNM per image."""
    net = _load_net(checkpoint)
    images = np.asarray(images, dtype=np.float64)
    if images.ndim == 3:
        images = images[None]
    a = net.arch
    if images.shape[1:] != (a.channels, a.height, a.width):
        raise ShapeError(f"images {images.shape[1:]} do not match checkpoint "
                         f"{(a.channels, a.height, a.width)}")
    cfg = TrainConfig(model=a.kind, levels=a.levels, lam=lam, beta=beta)
    report, _, x_hat, _ = evaluate_network(net, images, seed, cfg)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        ext = "pgm" if a.channels == 1 else "ppm"
        for i, img in enumerate(x_hat):
            if a.channels in (1, 3):
                pnm.write(os.path.join(out_dir, f"recon_{i:04d}.{ext}"), img)
    return x_hat, report


def coefficient_mosaic(p: WaveletPyramid2D) -> np.ndarray:
    """Magnitude mosaic (H, W): LL top-left, then HL right, LH below, HH diagonal."""
    def mag(b):
        b = np.abs(np.asarray(b, dtype=np.float64))
        return b.reshape((-1,) + b.shape[-2:]).mean(axis=0)

    H, W = p.shape[-2:]
    out = np.zeros((H, W))
    h, w = p.approx.shape[-2:]
    out[:h, :w] = mag(p.approx)
    for hl, lh, hh in p.details:
        h, w = hl.shape[-2:]
        out[:h, w:2 * w] = mag(hl)
        out[h:2 * h, :w] = mag(lh)
        out[h:2 * h, w:2 * w] = mag(hh)
    return out


def heatmap_pixels(p: WaveletPyramid2D) -> np.ndarray:
    """8-bit heatmap: largest magnitude maps to 255, zero maps to 0."""
    m = coefficient_mosaic(p)
    top = m.max()
    if top <= 0:
        return np.zeros(m.shape, dtype=np.uint8)
    return np.floor(m * (255.0 / top) + 0.5).astype(np.uint8)


def heatmap(checkpoint, image, path=None) -> np.ndarray:
    """Heatmap of the encoder's noise-free coefficients for one image."""
    net = _load_net(checkpoint)
    if net.arch.kind != "wvae":
        raise ConfigError("heatmaps need a wavelet-VAE checkpoint")
    _, tape = forward_wvae(net, image, seed=0)
    pix = heatmap_pixels(pyramid_unflatten(tape.sample.c_nn[0], net.arch.layout()))
    if path is not None:
        pnm.write(path, pix[None])
    return pix
