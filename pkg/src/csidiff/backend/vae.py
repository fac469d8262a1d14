"""Small KL-regularized image autoencoder.

Compresses RGB images by a factor of 8 per side into a 4-channel latent
grid.  The posterior is diagonal Gaussian; downstream code treats the
posterior mean as "the latent" and never samples at inference time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

KL_WEIGHT = 1e-4


@dataclass(frozen=True)
class VaeConfig:
    image_size: int = 64
    latent_channels: int = 4
    base_width: int = 16

    def __post_init__(self):
        if self.image_size % 8 != 0:
            raise ValueError("image_size must be a multiple of 8")

    @property
    def latent_size(self) -> int:
        return self.image_size // 8


class ImageVae(nn.Module):
    def __init__(self, cfg: VaeConfig):
        super().__init__()
        self.cfg = cfg
        w = cfg.base_width
        act = nn.SiLU()
        self.encoder = nn.Sequential(
            nn.Conv2d(3, w, 3, stride=2, padding=1), act,
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1), act,
            nn.Conv2d(2 * w, 4 * w, 3, stride=2, padding=1), act,
            nn.Conv2d(4 * w, 2 * cfg.latent_channels, 3, padding=1),
        )
        self.decoder = nn.Sequential(
            nn.Conv2d(cfg.latent_channels, 4 * w, 3, padding=1), act,
            nn.ConvTranspose2d(4 * w, 2 * w, 4, stride=2, padding=1), act,
            nn.ConvTranspose2d(2 * w, w, 4, stride=2, padding=1), act,
            nn.ConvTranspose2d(w, w, 4, stride=2, padding=1), act,
            nn.Conv2d(w, 3, 3, padding=1),
        )

    def encode(self, images: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        mu, logvar = self.encoder(images).chunk(2, dim=1)
        return mu, logvar

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.decoder(z))

    def forward(self, images: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        mu, logvar = self.encode(images)
        eps = torch.randn_like(mu)
        z = mu + torch.exp(0.5 * logvar) * eps
        return self.decode(z), mu, logvar


def gaussian_kl(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """Mean over all elements of KL(N(mu, exp(logvar)) || N(0, 1))."""
    return 0.5 * (mu.pow(2) + logvar.exp() - 1.0 - logvar).mean()


def vae_loss(recon: torch.Tensor, images: torch.Tensor, mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    return nn.functional.mse_loss(recon, images) + KL_WEIGHT * gaussian_kl(mu, logvar)


def train_vae(
    images: np.ndarray,
    cfg: VaeConfig | None = None,
    *,
    epochs: int = 20,
    batch_size: int = 32,
    lr: float = 1e-3,
    seed: int = 0,
) -> tuple[ImageVae, list[float]]:
    """Fit the autoencoder on an (N, 3, H, W) float32 array in [0, 1].

    Returns the trained model in eval mode and the per-epoch mean loss.
    """
    cfg = cfg or VaeConfig(image_size=images.shape[-1])
    if images.ndim != 4 or images.shape[1] != 3 or images.shape[-1] != cfg.image_size:
        raise ValueError(f"expected images of shape (n, 3, {cfg.image_size}, {cfg.image_size})")
    torch.manual_seed(seed)
    model = ImageVae(cfg)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    data = torch.from_numpy(np.ascontiguousarray(images, dtype=np.float32))
    n = data.shape[0]
    history = []
    generator = torch.Generator().manual_seed(seed)
    for _ in range(epochs):
        order = torch.randperm(n, generator=generator)
        total = 0.0
        for start in range(0, n, batch_size):
            batch = data[order[start : start + batch_size]]
            recon, mu, logvar = model(batch)
            loss = vae_loss(recon, batch, mu, logvar)
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * batch.shape[0]
        history.append(total / n)
    model.eval()
    return model, history
