"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data format error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from wvae import formats, metrics, pnm, train as harness
from wvae.data import SYNTH_KINDS, synth_dataset
from wvae.errors import ConfigError, DomainError, FormatError, NumericalError, ShapeError
from wvae.wavelet import dwt2d_multi, idwt2d_multi

EXIT_CONFIG, EXIT_FORMAT, EXIT_NUMERIC = 2, 3, 4

TRAIN_FLAGS = [
    ("--model", str, "wvae or vae"),
    ("--levels", str, "wavelet decomposition depth L"),
    ("--lambda", str, "L1 weight on detail coefficients"),
    ("--beta", str, "KL weight for the baseline VAE"),
    ("--noise", str, "learnable[:s0] or fixed:<s>"),
    ("--steps", str, "optimizer steps"),
    ("--batch", str, "minibatch size"),
    ("--lr", str, "Adam learning rate"),
    ("--seed", str, "master seed"),
    ("--data", str, "synth:<kind> or cifar10:<path>"),
    ("--out", str, "output directory"),
    ("--hidden", str, "comma-separated hidden widths"),
    ("--latent-dim", str, "baseline VAE latent size"),
    ("--recon", str, "mse or bce"),
    ("--synth-n", str, "number of synthetic images"),
    ("--synth-size", str, "synthetic image side"),
    ("--channels", str, "synthetic image channels"),
    ("--upscale", str, "bicubic upscale factor (1, 2, 4)"),
    ("--limit", str, "max CIFAR-10 records"),
    ("--eval-limit", str, "images used for the final metric report"),
]


def _add_train_flags(p):
    p.add_argument("--config", help="flat key=value file; flags override it")
    for flag, typ, text in TRAIN_FLAGS:
        p.add_argument(flag, type=typ, default=None, help=text)


def _config_from(args) -> harness.TrainConfig:
    base = harness.TrainConfig.from_file(args.config) if args.config else None
    flags = {flag[2:]: getattr(args, flag[2:].replace("-", "_")) for flag, _, _ in TRAIN_FLAGS}
    cfg = harness.TrainConfig.from_mapping(flags, base)
    cfg.validate()
    return cfg


def _read_image(path):
    if path.endswith(".npy"):
        return np.load(path)
    return pnm.read(path)


def cmd_dwt(args):
    img = _read_image(args.input)
    formats.save_coefficients(args.output, dwt2d_multi(img, args.levels))


def cmd_idwt(args):
    img = idwt2d_multi(formats.load_coefficients(args.input))
    if args.output.endswith(".npy"):
        np.save(args.output, img)
    else:
        pnm.write(args.output, img)


def cmd_train(args):
    cfg = _config_from(args)
    _, log = harness.train(cfg)
    print(json.dumps(log.final(), sort_keys=True))


def cmd_ablate(args):
    cfg = _config_from(args)
    print(json.dumps(harness.ablate_noise_scale(cfg), sort_keys=True))


def cmd_reconstruct(args):
    cfg = _config_from(args)
    ds = harness.load_dataset(cfg)
    images = ds.images[: args.count] if args.count else ds.images
    _, report = harness.reconstruct(args.checkpoint, images, seed=cfg.seed, out_dir=cfg.out)
    print(report.to_json())


def cmd_metrics(args):
    paths = args.images
    if len(paths) % 2:
        raise ConfigError("metrics expects reference/test pairs")
    for ref, test in zip(paths[0::2], paths[1::2]):
        x, y = _read_image(ref), _read_image(test)
        report = metrics.evaluate(x, y, dwt2d_multi(y, args.levels), args.levels,
                                  threshold=args.threshold)
        print(report.to_json())


def cmd_heatmap(args):
    if args.coeffs:
        pix = harness.heatmap_pixels(formats.load_coefficients(args.coeffs))
        pnm.write(args.output, pix[None])
    else:
        if not (args.checkpoint and args.image):
            raise ConfigError("heatmap needs --coeffs or both --checkpoint and --image")
        harness.heatmap(args.checkpoint, _read_image(args.image), args.output)


def cmd_synth(args):
    ds = synth_dataset(args.kind, args.n, args.size, seed=args.seed, channels=args.channels)
    os.makedirs(args.out, exist_ok=True)
    ext = "pgm" if args.channels == 1 else "ppm"
    for i, img in enumerate(ds.images):
        pnm.write(os.path.join(args.out, f"{args.kind}_{i:04d}.{ext}"), img)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wvae", description="Wavelet-VAE toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dwt", help="image (PGM/PPM/.npy) -> coefficient dump")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--levels", type=int, default=2)
    s.set_defaults(func=cmd_dwt)

    s = sub.add_parser("idwt", help="coefficient dump -> image")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_idwt)

    s = sub.add_parser("train", help="train a model")
    _add_train_flags(s)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("ablate", help="fixed vs learnable noise scale")
    _add_train_flags(s)
    s.set_defaults(func=cmd_ablate)

    s = sub.add_parser("reconstruct", help="reconstruct images with a checkpoint")
    _add_train_flags(s)
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--count", type=int, default=0)
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("metrics", help="metric report per reference/test pair")
    s.add_argument("images", nargs="+")
    s.add_argument("--levels", type=int, default=1)
    s.add_argument("--threshold", type=float, default=metrics.NEAR_ZERO)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("heatmap", help="coefficient magnitude heatmap (PGM)")
    s.add_argument("output")
    s.add_argument("--checkpoint")
    s.add_argument("--image")
    s.add_argument("--coeffs", help="render a coefficient dump instead of an encoder output")
    s.set_defaults(func=cmd_heatmap)

    s = sub.add_parser("synth", help="write a synthetic dataset as PGM/PPM files")
    s.add_argument("--kind", choices=SYNTH_KINDS, default="gaussian-blobs")
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--size", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--channels", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except FormatError as exc:
        print(f"wvae: data format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"wvae: cannot read data: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except NumericalError as exc:
        print(f"wvae: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ShapeError, DomainError) as exc:
        print(f"wvae: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
