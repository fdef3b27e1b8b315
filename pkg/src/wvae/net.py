"""Encoder networks, fixed-topology reverse-mode gradients, and Adam.

The wavelet VAE is ``x -> MLP -> c_nn -> c_nn + s*eps -> IDWT -> x_hat``;
its decoder has no parameters.  The baseline VAE is ``x -> MLP -> (mu,
logvar) -> z -> MLP -> sigmoid -> x_hat``.  Forward passes return a
:class:`Tape` holding every intermediate needed by :func:`backward`.

Weights are stored ``(fan_in, fan_out)`` and applied as ``x @ W + b`` on
row-major batches.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from wvae import latent
from wvae.errors import ConfigError, ShapeError, UsageError
from wvae.latent import GaussianPosterior, LossBreakdown, NoiseScale
from wvae.wavelet import PyramidLayout, dwt2d_multi, idwt2d_multi, pyramid_flatten, pyramid_unflatten

ACTIVATIONS = ("tanh", "sigmoid", "linear")


@dataclass(frozen=True)
class Architecture:
    kind: str  # "wvae" or "vae"
    channels: int
    height: int
    width: int
    levels: int = 2
    hidden: tuple = (256, 256)
    latent_dim: int = 64

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.kind not in ("wvae", "vae"):
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if min(self.channels, self.height, self.width) < 1 or any(h < 1 for h in self.hidden):
            raise ConfigError(f"invalid dimensions in {self}")
        if self.kind == "wvae":
            # raises ShapeError/DomainError on non-dyadic sizes
            PyramidLayout.for_image(self.channels, self.height, self.width, self.levels)
        elif self.latent_dim < 1:
            raise ConfigError("latent_dim must be positive")

    @property
    def input_dim(self) -> int:
        return self.channels * self.height * self.width

    def layout(self) -> PyramidLayout:
        return PyramidLayout.for_image(self.channels, self.height, self.width, self.levels)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class Layer:
    weight: np.ndarray
    bias: np.ndarray
    activation: str = "tanh"


@dataclass
class Network:
    arch: Architecture
    encoder: list
    decoder: list = field(default_factory=list)
    noise: NoiseScale = field(default_factory=NoiseScale)
    version: int = 0

    def parameters(self) -> dict:
        params = {}
        for prefix, layers in (("encoder", self.encoder), ("decoder", self.decoder)):
            for i, layer in enumerate(layers):
                params[f"{prefix}.{i}.weight"] = layer.weight
                params[f"{prefix}.{i}.bias"] = layer.bias
        if self.arch.kind == "wvae":
            params["noise.rho"] = self.noise.rho
        return params

    def frozen(self) -> set:
        return set() if self.noise.learnable else {"noise.rho"}

    def touch(self) -> None:
        """Mark parameters as modified; outstanding tapes become stale."""
        self.version += 1


def _dense_stack(dims, activations, rng):
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], activations):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        layers.append(Layer(w, np.zeros(fan_out), act))
    return layers


def init_network(arch: Architecture, seed, noise: NoiseScale | None = None) -> Network:
    rng = np.random.default_rng(seed)
    d = arch.input_dim
    hidden = list(arch.hidden)
    if arch.kind == "wvae":
        dims = [d] + hidden + [d]
        encoder = _dense_stack(dims, ["tanh"] * len(hidden) + ["linear"], rng)
        decoder = []
    else:
        dims = [d] + hidden + [2 * arch.latent_dim]
        encoder = _dense_stack(dims, ["tanh"] * len(hidden) + ["linear"], rng)
        ddims = [arch.latent_dim] + hidden[::-1] + [d]
        decoder = _dense_stack(ddims, ["tanh"] * len(hidden) + ["sigmoid"], rng)
    return Network(arch=arch, encoder=encoder, decoder=decoder,
                   noise=noise if noise is not None else NoiseScale())


# --- forward ---------------------------------------------------------------


@dataclass
class Tape:
    net: Network
    version: int
    kind: str
    x: np.ndarray  # (B, C, H, W)
    x_hat: np.ndarray
    unbatched: bool
    enc_inputs: list
    enc_outputs: list
    dec_inputs: list = field(default_factory=list)
    dec_outputs: list = field(default_factory=list)
    sample: latent.LatentSample | None = None
    layout: PyramidLayout | None = None
    bypass: bool = False
    posterior: GaussianPosterior | None = None
    z: np.ndarray | None = None
    eps: np.ndarray | None = None
    consumed: bool = False

    @property
    def c_nn(self):
        return self.sample.c_nn if self.sample is not None else None

    def loss(self, lam: float = 0.0, beta: float = 1.0, recon: str = "mse") -> LossBreakdown:
        if self.kind == "wvae":
            return latent.wvae_loss(self.x, self.x_hat, self.sample.c_nn,
                                    self.sample.detail_mask, lam, recon)
        return latent.vae_loss(self.x, self.x_hat, self.posterior, beta, recon)


def _activate(z, act):
    if act == "tanh":
        return np.tanh(z)
    if act == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    return z


def _mlp_forward(layers, h):
    inputs, outputs = [], []
    for layer in layers:
        inputs.append(h)
        h = _activate(h @ layer.weight + layer.bias, layer.activation)
        outputs.append(h)
    return h, inputs, outputs


def _as_batch(net: Network, x):
    x = np.asarray(x, dtype=np.float64)
    a = net.arch
    shape = (a.channels, a.height, a.width)
    if x.shape == shape:
        return x[None], True
    if x.ndim == 2 and a.channels == 1 and x.shape == shape[1:]:
        return x[None, None], True
    if x.ndim == 4 and x.shape[1:] == shape:
        return x, False
    raise ShapeError(f"input shape {x.shape} incompatible with architecture {shape}")


def forward_wvae(net: Network, x, seed=None, c_nn=None, eps=None):
    """Encode, perturb and synthesize; ``c_nn`` bypasses the encoder."""
    if net.arch.kind != "wvae":
        raise UsageError("forward_wvae needs a wavelet-VAE network")
    xb, unbatched = _as_batch(net, x)
    b = xb.shape[0]
    layout = net.arch.layout()
    if c_nn is None:
        coeffs, ins, outs = _mlp_forward(net.encoder, xb.reshape(b, -1))
        bypass = False
    else:
        coeffs = np.broadcast_to(np.asarray(c_nn, dtype=np.float64), (b, layout.size)).copy()
        ins, outs, bypass = [], [], True
    sample = latent.reparameterize_wavelet(coeffs, layout.detail_mask(), net.noise,
                                           rng_seed=seed, eps=eps)
    x_hat = idwt2d_multi(pyramid_unflatten(sample.c_tilde, layout))
    tape = Tape(net=net, version=net.version, kind="wvae", x=xb, x_hat=x_hat,
                unbatched=unbatched, enc_inputs=ins, enc_outputs=outs, sample=sample,
                layout=layout, bypass=bypass)
    return (x_hat[0] if unbatched else x_hat), tape


def forward_vae_baseline(net: Network, x, seed=None, eps=None):
    if net.arch.kind != "vae":
        raise UsageError("forward_vae_baseline needs a baseline VAE network")
    xb, unbatched = _as_batch(net, x)
    b = xb.shape[0]
    k = net.arch.latent_dim
    head, ins, outs = _mlp_forward(net.encoder, xb.reshape(b, -1))
    post = GaussianPosterior(head[:, :k], head[:, k:])
    z, eps = latent.reparameterize_gaussian(post, rng_seed=seed, eps=eps)
    y, dins, douts = _mlp_forward(net.decoder, z)
    x_hat = y.reshape(xb.shape)
    tape = Tape(net=net, version=net.version, kind="vae", x=xb, x_hat=x_hat,
                unbatched=unbatched, enc_inputs=ins, enc_outputs=outs, dec_inputs=dins,
                dec_outputs=douts, posterior=post, z=z, eps=eps)
    return (x_hat[0] if unbatched else x_hat), tape


def forward(net: Network, x, seed=None):
    if net.arch.kind == "wvae":
        return forward_wvae(net, x, seed)
    return forward_vae_baseline(net, x, seed)


# --- backward --------------------------------------------------------------


def _recon_grad(x, x_hat, recon):
    n = x.size
    if recon == "mse":
        return 2.0 * (x_hat - x) / n
    lo, hi = latent.BCE_CLAMP, 1.0 - latent.BCE_CLAMP
    y = np.clip(x_hat, lo, hi)
    g = (-x / y + (1.0 - x) / (1.0 - y)) / n
    # clamped entries have zero derivative
    return np.where((x_hat > lo) & (x_hat < hi), g, 0.0)


def _mlp_backward(layers, inputs, outputs, g, prefix, grads):
    for i in range(len(layers) - 1, -1, -1):
        layer, y = layers[i], outputs[i]
        if layer.activation == "tanh":
            g = g * (1.0 - y * y)
        elif layer.activation == "sigmoid":
            g = g * y * (1.0 - y)
        grads[f"{prefix}.{i}.weight"] = inputs[i].T @ g
        grads[f"{prefix}.{i}.bias"] = g.sum(axis=0)
        g = g @ layer.weight.T
    return g


def backward(tape: Tape, loss: LossBreakdown) -> dict:
    """Gradients of ``loss.total`` for every entry of ``net.parameters()``."""
    net = tape.net
    if tape.version != net.version:
        raise UsageError("tape is stale: parameters changed after the forward pass")
    if tape.consumed:
        raise UsageError("tape was already used for a backward pass")
    if loss.kind != tape.kind:
        raise UsageError(f"{loss.kind} loss cannot be backpropagated through a {tape.kind} tape")
    tape.consumed = True
    b = tape.x.shape[0]
    g_xhat = _recon_grad(tape.x, tape.x_hat, loss.recon)
    grads = {k: np.zeros_like(v) for k, v in net.parameters().items()}

    if tape.kind == "wvae":
        s = tape.sample
        # IDWT is orthonormal, so its adjoint is the forward DWT
        g_ct, _ = pyramid_flatten(dwt2d_multi(g_xhat, tape.layout.levels))
        if net.noise.learnable:
            contrib = g_ct * s.noise * s.scale
            grads["noise.rho"] = np.array([contrib[:, ~s.detail_mask].sum(),
                                           contrib[:, s.detail_mask].sum()])
        if not tape.bypass:
            # subgradient of |c| at 0 is 0
            g_c = g_ct + (loss.lam / b) * np.sign(s.c_nn) * s.detail_mask
            _mlp_backward(net.encoder, tape.enc_inputs, tape.enc_outputs, g_c, "encoder", grads)
        return grads

    k = net.arch.latent_dim
    post = tape.posterior
    g_z = _mlp_backward(net.decoder, tape.dec_inputs, tape.dec_outputs,
                        g_xhat.reshape(b, -1), "decoder", grads)
    g_mu = g_z + (loss.beta / b) * post.mu
    g_lv = g_z * tape.eps * 0.5 * post.sigma + (loss.beta / b) * 0.5 * (np.exp(post.logvar) - 1.0)
    g_head = np.empty((b, 2 * k))
    g_head[:, :k] = g_mu
    g_head[:, k:] = g_lv
    _mlp_backward(net.encoder, tape.enc_inputs, tape.enc_outputs, g_head, "encoder", grads)
    return grads


# --- optimizer -------------------------------------------------------------


@dataclass
class OptimizerState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def hyper(self) -> dict:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2,
                "eps": self.eps, "step": self.step}


def adam_step(params, grads: dict, state: OptimizerState, frozen=()) -> None:
    """In-place Adam update.

    ``params`` may be a :class:`Network` (its frozen parameters are skipped
    and its tapes invalidated) or a plain ``name -> array`` dict.
    """
    net = None
    if isinstance(params, Network):
        net = params
        frozen = set(frozen) | net.frozen()
        params = net.parameters()
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, p in params.items():
        if name in frozen or name not in grads:
            continue
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, expected {p.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    if net is not None:
        net.touch()
