"""Building blocks shared by the latent encoder and the pixel baseline."""

from __future__ import annotations

import math

import torch
from torch import nn


def norm_groups(channels: int) -> int:
    """Largest divisor of ``channels`` that is at most 8."""
    for g in range(min(channels, 8), 0, -1):
        if channels % g == 0:
            return g
    return 1


class ResBlock(nn.Module):
    """Two 3x3 convolutions with pre-activation GroupNorm and an identity skip."""

    def __init__(self, channels: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(norm_groups(channels), channels)
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.norm2 = nn.GroupNorm(norm_groups(channels), channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.act = nn.SiLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.conv1(self.act(self.norm1(x)))
        h = self.conv2(self.act(self.norm2(h)))
        return x + h


class CrossAttention(nn.Module):
    """Single-head attention from feature-map positions onto measurement tokens.

    Queries come from the normalized feature map, one per spatial location.
    Keys and values come from a learned token projection of the raw input
    vector, so every block that attends owns its own view of the measurement.
    """

    def __init__(self, channels: int, input_size: int, context_tokens: int, embed_dim: int):
        super().__init__()
        self.context_tokens = context_tokens
        self.embed_dim = embed_dim
        self.norm = nn.GroupNorm(norm_groups(channels), channels)
        self.to_q = nn.Linear(channels, embed_dim)
        self.to_context = nn.Linear(input_size, context_tokens * embed_dim)
        self.to_k = nn.Linear(embed_dim, embed_dim)
        self.to_v = nn.Linear(embed_dim, embed_dim)
        self.to_out = nn.Linear(embed_dim, channels)

    def tokens(self, csi: torch.Tensor) -> torch.Tensor:
        return self.to_context(csi).reshape(csi.shape[0], self.context_tokens, self.embed_dim)

    def attend(self, x: torch.Tensor, tokens: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        q = self.to_q(self.norm(x).permute(0, 2, 3, 1).reshape(b, h * w, c))
        k = self.to_k(tokens)
        v = self.to_v(tokens)
        weights = torch.softmax(q @ k.transpose(1, 2) / math.sqrt(self.embed_dim), dim=-1)
        out = self.to_out(weights @ v)
        return x + out.reshape(b, h, w, c).permute(0, 3, 1, 2)

    def forward(self, x: torch.Tensor, csi: torch.Tensor) -> torch.Tensor:
        return self.attend(x, self.tokens(csi))


class UpBlock(nn.Module):
    """ResBlock pair, optional cross-attention, then a 2x transposed-conv upsample."""

    def __init__(
        self,
        channels: int,
        out_channels: int,
        input_size: int,
        context_tokens: int,
        embed_dim: int,
        with_attention: bool,
    ):
        super().__init__()
        self.res1 = ResBlock(channels)
        self.res2 = ResBlock(channels)
        self.attn = (
            CrossAttention(channels, input_size, context_tokens, embed_dim) if with_attention else None
        )
        self.up = nn.ConvTranspose2d(channels, out_channels, 4, stride=2, padding=1)

    def forward(self, x: torch.Tensor, csi: torch.Tensor) -> torch.Tensor:
        x = self.res2(self.res1(x))
        if self.attn is not None:
            x = self.attn(x, csi)
        return self.up(x)
