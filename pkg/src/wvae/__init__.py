"""Wavelet-VAE: Haar wavelet coefficients as a VAE latent space."""
from wvae.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
