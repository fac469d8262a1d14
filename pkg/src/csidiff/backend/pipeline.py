"""Bundled latent image backend.

A :class:`BackendHandle` owns the schedule, autoencoder, denoiser, and
prompt encoder, and exposes the four operations everything else is written
against: encode an image, decode a latent, embed a prompt, and run the
strength-controlled image-to-image loop.  Images cross this boundary as
(H, W, 3) float32 arrays in [0, 1]; latents as (C, h, w) float32.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from ..data import DatasetManifest, image_array
from ..models.weights_io import load_state, save_state
from .denoiser import DenoiserConfig, LatentDenoiser, train_denoiser
from .sampler import add_noise, ddim_denoise
from .schedule import DiffusionSchedule
from .text import TextEncoder
from .vae import ImageVae, VaeConfig, train_vae

_META_FILE = "backend.json"
_VAE_FILE = "vae.csdw"
_DENOISER_FILE = "denoiser.csdw"


class BackendHandle:
    def __init__(
        self,
        schedule: DiffusionSchedule,
        vae: ImageVae,
        denoiser: LatentDenoiser,
        text_encoder: TextEncoder,
        latent_scale: float = 1.0,
    ):
        self.schedule = schedule
        self.vae = vae.eval()
        self.denoiser = denoiser.eval()
        self.text_encoder = text_encoder
        self.latent_scale = latent_scale

    @property
    def image_size(self) -> int:
        return self.vae.cfg.image_size

    @property
    def latent_shape(self) -> tuple[int, int, int]:
        cfg = self.vae.cfg
        return (cfg.latent_channels, cfg.latent_size, cfg.latent_size)

    def encode_image(self, image: np.ndarray) -> np.ndarray:
        """Posterior mean of one (H, W, 3) image, scaled to latent units."""
        if image.shape != (self.image_size, self.image_size, 3):
            raise ValueError(f"expected image of shape ({self.image_size}, {self.image_size}, 3)")
        x = torch.from_numpy(np.ascontiguousarray(image, dtype=np.float32)).permute(2, 0, 1)[None]
        with torch.no_grad():
            mu, _ = self.vae.encode(x)
        return (mu[0] * self.latent_scale).numpy()

    def decode_latent(self, z: np.ndarray) -> np.ndarray:
        if tuple(z.shape) != self.latent_shape:
            raise ValueError(f"expected latent of shape {self.latent_shape}")
        zt = torch.from_numpy(np.ascontiguousarray(z, dtype=np.float32))[None] / self.latent_scale
        with torch.no_grad():
            img = self.vae.decode(zt)
        return img[0].permute(1, 2, 0).numpy()

    def embed_text(self, prompt: str) -> np.ndarray:
        return self.text_encoder.embed(prompt)

    def _eps_fn(self, z: np.ndarray, t: int, tokens: np.ndarray) -> np.ndarray:
        zt = torch.from_numpy(z)[None]
        tt = torch.tensor([t], dtype=torch.long)
        tok = torch.from_numpy(tokens)[None]
        with torch.no_grad():
            return self.denoiser(zt, tt, tok)[0].numpy()

    def img2img(
        self,
        latent: np.ndarray,
        prompt: str,
        *,
        strength: float,
        steps: int,
        seed: int,
        guidance: float = 1.0,
    ) -> np.ndarray:
        """Noise a latent to ``t_start(strength)``, denoise, and decode.

        ``strength == 0`` performs no diffusion at all and decodes the
        latent directly.
        """
        t0 = self.schedule.t_start(strength)
        if t0 == 0:
            return self.decode_latent(latent)
        z_t = add_noise(self.schedule, latent, t0, seed=seed)
        z0 = ddim_denoise(
            self.schedule,
            z_t,
            self._eps_fn,
            t_start=t0,
            n_steps=steps,
            cond=self.embed_text(prompt),
            uncond=self.embed_text(""),
            guidance=guidance,
        )
        return self.decode_latent(z0)

    def identity_hash(self) -> str:
        """Digest of everything that affects outputs: schedule and weights."""
        h = hashlib.sha256()
        h.update(json.dumps(self._meta(), sort_keys=True).encode())
        for module in (self.vae, self.denoiser):
            for name, value in module.state_dict().items():
                h.update(name.encode())
                h.update(value.detach().cpu().numpy().astype(np.float32).tobytes())
        return h.hexdigest()

    def _meta(self) -> dict:
        return {
            "schedule": self.schedule.to_dict(),
            "latent_scale": self.latent_scale,
            "text": {"dim": self.text_encoder.dim, "max_tokens": self.text_encoder.max_tokens},
            "vae": asdict(self.vae.cfg),
            "denoiser": asdict(self.denoiser.cfg),
        }


def save_backend(handle: BackendHandle, out_dir: Path | str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / _META_FILE).write_text(json.dumps(handle._meta(), indent=2, sort_keys=True) + "\n")
    save_state(out_dir / _VAE_FILE, "vae", asdict(handle.vae.cfg), 0, handle.vae.state_dict())
    save_state(out_dir / _DENOISER_FILE, "denoiser", asdict(handle.denoiser.cfg), 0, handle.denoiser.state_dict())
    return out_dir


def load_backend(path: Path | str) -> BackendHandle:
    path = Path(path)
    meta_path = path / _META_FILE
    if not meta_path.exists():
        raise FileNotFoundError(f"no backend at {path}")
    meta = json.loads(meta_path.read_text())
    schedule = DiffusionSchedule(**meta["schedule"])
    text_encoder = TextEncoder(dim=meta["text"]["dim"], max_tokens=meta["text"]["max_tokens"])
    kind, vae_cfg, _, vae_state = load_state(path / _VAE_FILE)
    if kind != "vae":
        raise ValueError(f"{_VAE_FILE}: expected kind 'vae', got {kind!r}")
    vae = ImageVae(VaeConfig(**vae_cfg))
    vae.load_state_dict(vae_state)
    kind, den_cfg, _, den_state = load_state(path / _DENOISER_FILE)
    if kind != "denoiser":
        raise ValueError(f"{_DENOISER_FILE}: expected kind 'denoiser', got {kind!r}")
    denoiser = LatentDenoiser(DenoiserConfig(**den_cfg))
    denoiser.load_state_dict(den_state)
    return BackendHandle(schedule, vae, denoiser, text_encoder, latent_scale=meta["latent_scale"])


def train_backend(
    manifest: DatasetManifest,
    *,
    vae_epochs: int = 20,
    denoiser_epochs: int = 20,
    vae_width: int = 16,
    denoiser_width: int = 64,
    seed: int = 0,
    batch_size: int = 32,
) -> tuple[BackendHandle, dict[str, list[float]]]:
    """Fit the autoencoder and denoiser on a dataset's train split."""
    entries = manifest.split_entries("train")
    if not entries:
        raise ValueError("manifest has no train entries")
    size = manifest.image_size[0]
    images = image_array(manifest, "train")[0].transpose(0, 3, 1, 2)
    schedule = DiffusionSchedule()
    text_encoder = TextEncoder()
    vae, vae_hist = train_vae(
        images,
        VaeConfig(image_size=size, base_width=vae_width),
        epochs=vae_epochs,
        batch_size=batch_size,
        seed=seed,
    )
    with torch.no_grad():
        latents = []
        data = torch.from_numpy(images)
        for start in range(0, len(entries), batch_size):
            mu, _ = vae.encode(data[start : start + batch_size])
            latents.append(mu.numpy())
    latents = np.concatenate(latents)
    captions = [e.caption or "" for e in entries]
    denoiser, den_hist = train_denoiser(
        latents,
        captions,
        schedule,
        text_encoder,
        DenoiserConfig(latent_channels=4, latent_size=size // 8, width=denoiser_width),
        epochs=denoiser_epochs,
        batch_size=batch_size,
        seed=seed,
    )
    handle = BackendHandle(schedule, vae, denoiser, text_encoder)
    return handle, {"vae": vae_hist, "denoiser": den_hist}
