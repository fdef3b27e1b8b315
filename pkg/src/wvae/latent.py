"""Reparameterization, priors and objective terms.

Two model families share this module: the Gaussian baseline VAE
(``mu + sigma * eps`` with a closed-form KL to N(0, I)) and the wavelet VAE,
whose encoder emits Haar coefficients directly and receives additive noise
``c + s * eps`` with ``s`` split between approximation and detail bands.
The wavelet objective swaps the KL for an L1 penalty on the *noise-free*
detail coefficients.

Batched inputs carry the batch on axis 0; per-sample sums (KL, L1) are
averaged over the batch, pixel losses are averaged over every element.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from wvae.errors import DomainError, ShapeError

BCE_CLAMP = 1e-7
DEFAULT_NOISE_SCALE = 0.01


@dataclass
class GaussianPosterior:
    mu: np.ndarray
    logvar: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.logvar = np.asarray(self.logvar, dtype=np.float64)
        if self.mu.shape != self.logvar.shape:
            raise ShapeError(f"mu {self.mu.shape} and logvar {self.logvar.shape} differ")

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(0.5 * self.logvar)


@dataclass
class NoiseScale:
    """Noise standard deviations for approximation and detail coefficients.

    Learnable scales live in log space (``rho``) so they stay positive.
    A frozen scale keeps the exact value it was built with.
    """

    rho: np.ndarray = field(
        default_factory=lambda: np.full(2, math.log(DEFAULT_NOISE_SCALE)))
    learnable: bool = True
    fixed: np.ndarray | None = None

    @classmethod
    def from_scales(cls, s_approx: float, s_detail: float, learnable: bool = True):
        if s_approx <= 0 or s_detail <= 0:
            raise DomainError("noise scales must be positive")
        rho = np.log(np.array([s_approx, s_detail], dtype=np.float64))
        fixed = None if learnable else np.array([s_approx, s_detail], dtype=np.float64)
        return cls(rho=rho, learnable=learnable, fixed=fixed)

    @property
    def scales(self) -> np.ndarray:
        if not self.learnable and self.fixed is not None:
            return self.fixed
        return np.exp(self.rho)

    @property
    def s_approx(self) -> float:
        return float(self.scales[0])

    @property
    def s_detail(self) -> float:
        return float(self.scales[1])


@dataclass
class LatentSample:
    c_nn: np.ndarray
    noise: np.ndarray
    c_tilde: np.ndarray
    detail_mask: np.ndarray
    scale: np.ndarray  # per-coefficient s, broadcast over the batch


@dataclass
class LossBreakdown:
    reconstruction: float
    regularizer: float
    total: float
    lam: float = 0.0
    beta: float = 0.0
    kind: str = "wvae"
    recon: str = "mse"

    def as_dict(self) -> dict:
        return asdict(self)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def reparameterize_gaussian(post: GaussianPosterior, rng_seed=None, eps=None):
    """Draw ``z = mu + exp(logvar / 2) * eps``; returns ``(z, eps)``."""
    if eps is None:
        eps = _rng(rng_seed).standard_normal(post.mu.shape)
    else:
        eps = np.asarray(eps, dtype=np.float64)
        if eps.shape != post.mu.shape:
            raise ShapeError(f"eps shape {eps.shape} != mu shape {post.mu.shape}")
    return post.mu + post.sigma * eps, eps


def reparameterize_wavelet(c_nn, detail_mask, scales: NoiseScale, rng_seed=None,
                           eps=None) -> LatentSample:
    c_nn = np.asarray(c_nn, dtype=np.float64)
    mask = np.asarray(detail_mask, dtype=bool)
    if mask.ndim != 1 or c_nn.shape[-1] != mask.shape[0]:
        raise ShapeError(f"mask length {mask.shape} does not match coefficients {c_nn.shape}")
    if eps is None:
        eps = _rng(rng_seed).standard_normal(c_nn.shape)
    else:
        eps = np.asarray(eps, dtype=np.float64)
        if eps.shape != c_nn.shape:
            raise ShapeError(f"eps shape {eps.shape} != coefficient shape {c_nn.shape}")
    s = np.where(mask, scales.s_detail, scales.s_approx)
    return LatentSample(c_nn=c_nn, noise=eps, c_tilde=c_nn + s * eps,
                        detail_mask=mask, scale=s)


def kl_gaussian_standard(post: GaussianPosterior):
    """KL(N(mu, sigma^2) || N(0, I)) summed over the last axis."""
    terms = 0.5 * (post.mu ** 2 + np.exp(post.logvar) - post.logvar - 1.0)
    out = terms.sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def laplace_log_prior(c, lam: float) -> float:
    if lam <= 0:
        raise DomainError(f"Laplace rate must be positive, got {lam}")
    c = np.asarray(c, dtype=np.float64)
    return float(np.sum(math.log(lam / 2.0) - lam * np.abs(c)))


def l1_detail_penalty(c_nn, detail_mask, lam: float) -> float:
    """``lam * sum |c|`` over detail coefficients, averaged over a batch axis."""
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    c_nn = np.asarray(c_nn, dtype=np.float64)
    mask = np.asarray(detail_mask, dtype=bool)
    if c_nn.shape[-1] != mask.shape[0]:
        raise ShapeError(f"mask length {mask.shape} does not match coefficients {c_nn.shape}")
    per_sample = np.abs(c_nn[..., mask]).sum(axis=-1)
    return float(lam * np.mean(per_sample))


def reconstruction_loss(x, x_hat, recon: str = "mse") -> float:
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ShapeError(f"target {x.shape} and reconstruction {x_hat.shape} differ")
    if recon == "mse":
        return float(np.mean((x_hat - x) ** 2))
    if recon == "bce":
        y = np.clip(x_hat, BCE_CLAMP, 1.0 - BCE_CLAMP)
        return float(np.mean(-(x * np.log(y) + (1.0 - x) * np.log(1.0 - y))))
    raise DomainError(f"unknown reconstruction loss {recon!r}")


def wvae_loss(x, x_hat, c_nn, detail_mask, lam: float, recon: str = "mse") -> LossBreakdown:
    rec = reconstruction_loss(x, x_hat, recon)
    reg = l1_detail_penalty(c_nn, detail_mask, lam)
    return LossBreakdown(rec, reg, rec + reg, lam=lam, beta=0.0, kind="wvae", recon=recon)


def vae_loss(x, x_hat, post: GaussianPosterior, beta: float, recon: str = "mse") -> LossBreakdown:
    if beta < 0:
        raise DomainError(f"beta must be non-negative, got {beta}")
    rec = reconstruction_loss(x, x_hat, recon)
    kl = float(np.mean(kl_gaussian_standard(post)))
    return LossBreakdown(rec, kl, rec + beta * kl, lam=0.0, beta=beta, kind="vae", recon=recon)
