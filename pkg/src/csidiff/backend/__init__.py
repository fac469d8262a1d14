from .conformance import LatentBackendProtocol, assert_conformant, check_backend
from .denoiser import DenoiserConfig, LatentDenoiser, sinusoidal_embedding, train_denoiser
from .pipeline import BackendHandle, load_backend, save_backend, train_backend
from .sampler import add_noise, ddim_denoise
from .schedule import DiffusionSchedule
from .text import MAX_TOKENS, TEXT_DIM, TextEncoder
from .vae import KL_WEIGHT, ImageVae, VaeConfig, gaussian_kl, train_vae, vae_loss

__all__ = [
    "BackendHandle",
    "DenoiserConfig",
    "DiffusionSchedule",
    "ImageVae",
    "KL_WEIGHT",
    "LatentBackendProtocol",
    "LatentDenoiser",
    "MAX_TOKENS",
    "TEXT_DIM",
    "TextEncoder",
    "VaeConfig",
    "add_noise",
    "assert_conformant",
    "check_backend",
    "ddim_denoise",
    "gaussian_kl",
    "load_backend",
    "save_backend",
    "sinusoidal_embedding",
    "train_backend",
    "train_denoiser",
    "train_vae",
    "vae_loss",
]
