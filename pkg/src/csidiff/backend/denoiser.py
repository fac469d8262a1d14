"""Noise-prediction network for the latent reverse process.

A deliberately small conv net: timestep information enters through a
sinusoidal embedding added channel-wise inside each residual block, prompt
tokens enter through one cross-attention layer between the blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .schedule import DiffusionSchedule
from .text import TextEncoder


@dataclass(frozen=True)
class DenoiserConfig:
    latent_channels: int = 4
    latent_size: int = 8
    width: int = 64
    time_dim: int = 64
    text_dim: int = 32
    embed_dim: int = 64


def sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=torch.float32) / (half - 1))
    args = t.float()[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class TimeResBlock(nn.Module):
    def __init__(self, channels: int, time_dim: int):
        super().__init__()
        groups = 8 if channels % 8 == 0 else 1
        self.norm1 = nn.GroupNorm(groups, channels)
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.time_proj = nn.Linear(time_dim, channels)
        self.norm2 = nn.GroupNorm(groups, channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.act = nn.SiLU()

    def forward(self, x: torch.Tensor, t_emb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(self.act(self.norm1(x)))
        h = h + self.time_proj(t_emb)[:, :, None, None]
        h = self.conv2(self.act(self.norm2(h)))
        return x + h


class TextAttention(nn.Module):
    def __init__(self, channels: int, text_dim: int, embed_dim: int):
        super().__init__()
        groups = 8 if channels % 8 == 0 else 1
        self.embed_dim = embed_dim
        self.norm = nn.GroupNorm(groups, channels)
        self.to_q = nn.Linear(channels, embed_dim)
        self.to_k = nn.Linear(text_dim, embed_dim)
        self.to_v = nn.Linear(text_dim, embed_dim)
        self.to_out = nn.Linear(embed_dim, channels)

    def forward(self, x: torch.Tensor, tokens: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        q = self.to_q(self.norm(x).permute(0, 2, 3, 1).reshape(b, h * w, c))
        k = self.to_k(tokens)
        v = self.to_v(tokens)
        weights = torch.softmax(q @ k.transpose(1, 2) / math.sqrt(self.embed_dim), dim=-1)
        out = self.to_out(weights @ v)
        return x + out.reshape(b, h, w, c).permute(0, 3, 1, 2)


class LatentDenoiser(nn.Module):
    def __init__(self, cfg: DenoiserConfig):
        super().__init__()
        self.cfg = cfg
        self.time_mlp = nn.Sequential(
            nn.Linear(cfg.time_dim, cfg.time_dim), nn.SiLU(), nn.Linear(cfg.time_dim, cfg.time_dim)
        )
        self.proj_in = nn.Conv2d(cfg.latent_channels, cfg.width, 3, padding=1)
        self.block1 = TimeResBlock(cfg.width, cfg.time_dim)
        self.attn = TextAttention(cfg.width, cfg.text_dim, cfg.embed_dim)
        self.block2 = TimeResBlock(cfg.width, cfg.time_dim)
        self.norm_out = nn.GroupNorm(8 if cfg.width % 8 == 0 else 1, cfg.width)
        self.proj_out = nn.Conv2d(cfg.width, cfg.latent_channels, 3, padding=1)
        self.act = nn.SiLU()

    def forward(self, z: torch.Tensor, t: torch.Tensor, tokens: torch.Tensor) -> torch.Tensor:
        t_emb = self.time_mlp(sinusoidal_embedding(t, self.cfg.time_dim))
        h = self.proj_in(z)
        h = self.block1(h, t_emb)
        h = self.attn(h, tokens)
        h = self.block2(h, t_emb)
        return self.proj_out(self.act(self.norm_out(h)))


def train_denoiser(
    latents: np.ndarray,
    captions: list[str],
    schedule: DiffusionSchedule,
    text_encoder: TextEncoder,
    cfg: DenoiserConfig | None = None,
    *,
    epochs: int = 20,
    batch_size: int = 64,
    lr: float = 1e-3,
    seed: int = 0,
    uncond_prob: float = 0.1,
) -> tuple[LatentDenoiser, list[float]]:
    """Fit epsilon prediction on clean latents with paired captions.

    A fraction ``uncond_prob`` of captions is replaced by the empty prompt
    each epoch so the net also learns the unconditional distribution.
    """
    if len(captions) != latents.shape[0]:
        raise ValueError("captions and latents must align")
    cfg = cfg or DenoiserConfig(
        latent_channels=latents.shape[1], latent_size=latents.shape[-1], text_dim=text_encoder.dim
    )
    torch.manual_seed(seed)
    model = LatentDenoiser(cfg)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    data = torch.from_numpy(np.ascontiguousarray(latents, dtype=np.float32))
    embeds = torch.from_numpy(np.stack([text_encoder.embed(c) for c in captions]))
    uncond = torch.from_numpy(text_encoder.embed(""))
    bars = torch.from_numpy(schedule.alpha_bars).float()
    n = data.shape[0]
    g = torch.Generator().manual_seed(seed)
    history = []
    for _ in range(epochs):
        order = torch.randperm(n, generator=g)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            z0 = data[idx]
            tokens = embeds[idx].clone()
            drop = torch.rand(len(idx), generator=g) < uncond_prob
            tokens[drop] = uncond
            t = torch.randint(1, schedule.timesteps + 1, (len(idx),), generator=g)
            eps = torch.randn(z0.shape, generator=g)
            bar = bars[t][:, None, None, None]
            z_t = bar.sqrt() * z0 + (1.0 - bar).sqrt() * eps
            loss = nn.functional.mse_loss(model(z_t, t, tokens), eps)
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        history.append(total / n)
    model.eval()
    return model, history
