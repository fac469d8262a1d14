"""CSI-to-latent encoder and the direct-to-pixel baseline generator.

Both models share the same trunk shape: a linear stem that lifts the
measurement vector onto a 4x4 feature map, followed by upsampling blocks
that halve the channel width while doubling the resolution.  The encoder
stops at the latent grid; the baseline keeps a fixed-width refinement head
running until it reaches full image resolution and emits RGB directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

from .blocks import ResBlock, UpBlock

STEM_GRID = 4


def _default_attention(depth: int) -> tuple[int, ...]:
    return tuple(range(2, depth + 1))


def _check_attention(blocks: tuple[int, ...], depth: int) -> None:
    for k in blocks:
        if not 1 <= k <= depth:
            raise ValueError(f"attention block index {k} outside 1..{depth}")
    if len(set(blocks)) != len(blocks):
        raise ValueError("duplicate attention block index")


@dataclass(frozen=True)
class EncoderConfig:
    """Shape of the latent encoder.

    ``attention_blocks`` lists 1-based upsample-block indices that attend to
    the measurement; by default every block except the first one does.
    """

    s: int
    base_width: int = 256
    depth: int = 4
    latent_channels: int = 4
    latent_size: int = 64
    attention_blocks: tuple[int, ...] | None = None
    context_tokens: int = 16
    embed_dim: int = 128

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be positive")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if self.base_width % (1 << self.depth) != 0:
            raise ValueError("base_width must be divisible by 2**depth")
        if self.latent_size != STEM_GRID << self.depth:
            raise ValueError(
                f"latent_size {self.latent_size} inconsistent with depth {self.depth}"
                f" (expected {STEM_GRID << self.depth})"
            )
        if self.attention_blocks is None:
            object.__setattr__(self, "attention_blocks", _default_attention(self.depth))
        else:
            object.__setattr__(self, "attention_blocks", tuple(self.attention_blocks))
        _check_attention(self.attention_blocks, self.depth)

    def block_channels(self, k: int) -> int:
        """Input width of 1-based upsample block ``k``."""
        return self.base_width >> (k - 1)


@dataclass(frozen=True)
class BaselineConfig:
    """Shape of the direct pixel generator used as a reference point.

    The trunk mirrors :class:`EncoderConfig` but floors channel widths at 4;
    after ``depth`` blocks a transition convolution widens the map to
    ``head_width`` and constant-width blocks upsample the rest of the way to
    ``image_size``.
    """

    s: int
    base_width: int = 8
    depth: int = 4
    image_size: int = 512
    head_width: int = 192
    attention_blocks: tuple[int, ...] | None = None
    context_tokens: int = 16
    embed_dim: int = 128

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be positive")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        trunk_size = STEM_GRID << self.depth
        if self.image_size < trunk_size:
            raise ValueError(f"image_size {self.image_size} smaller than trunk output {trunk_size}")
        size, extra = trunk_size, 0
        while size < self.image_size:
            size, extra = size * 2, extra + 1
        if size != self.image_size:
            raise ValueError(f"image_size {self.image_size} is not {trunk_size} times a power of 2")
        object.__setattr__(self, "_head_depth", extra)
        if self.attention_blocks is None:
            object.__setattr__(self, "attention_blocks", _default_attention(self.depth))
        else:
            object.__setattr__(self, "attention_blocks", tuple(self.attention_blocks))
        _check_attention(self.attention_blocks, self.depth)

    @property
    def head_depth(self) -> int:
        return self._head_depth

    def block_channels(self, k: int) -> int:
        return max(self.base_width >> (k - 1), 4)


class CsiEncoder(nn.Module):
    """Maps a normalized amplitude vector to a latent feature grid."""

    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.stem = nn.Linear(cfg.s, cfg.base_width * STEM_GRID * STEM_GRID)
        self.blocks = nn.ModuleList(
            UpBlock(
                cfg.block_channels(k),
                cfg.block_channels(k) // 2,
                cfg.s,
                cfg.context_tokens,
                cfg.embed_dim,
                with_attention=k in cfg.attention_blocks,
            )
            for k in range(1, cfg.depth + 1)
        )
        self.head = nn.Conv2d(cfg.base_width >> cfg.depth, cfg.latent_channels, 3, padding=1)

    def forward(self, csi: torch.Tensor) -> torch.Tensor:
        if csi.ndim != 2 or csi.shape[1] != self.cfg.s:
            raise ValueError(f"expected input of shape (batch, {self.cfg.s})")
        h = self.stem(csi).reshape(csi.shape[0], self.cfg.base_width, STEM_GRID, STEM_GRID)
        for block in self.blocks:
            h = block(h, csi)
        return self.head(h)


class PixelBaseline(nn.Module):
    """Maps a normalized amplitude vector straight to an RGB image in [0, 1]."""

    def __init__(self, cfg: BaselineConfig):
        super().__init__()
        self.cfg = cfg
        self.stem = nn.Linear(cfg.s, cfg.base_width * STEM_GRID * STEM_GRID)
        self.blocks = nn.ModuleList(
            UpBlock(
                cfg.block_channels(k),
                cfg.block_channels(k + 1),
                cfg.s,
                cfg.context_tokens,
                cfg.embed_dim,
                with_attention=k in cfg.attention_blocks,
            )
            for k in range(1, cfg.depth + 1)
        )
        self.transition = nn.Conv2d(cfg.block_channels(cfg.depth + 1), cfg.head_width, 3, padding=1)
        head = []
        for _ in range(cfg.head_depth):
            head += [ResBlock(cfg.head_width), ResBlock(cfg.head_width)]
            head.append(nn.ConvTranspose2d(cfg.head_width, cfg.head_width, 4, stride=2, padding=1))
        self.refine = nn.ModuleList(head)
        self.to_rgb = nn.Conv2d(cfg.head_width, 3, 3, padding=1)

    def forward(self, csi: torch.Tensor) -> torch.Tensor:
        if csi.ndim != 2 or csi.shape[1] != self.cfg.s:
            raise ValueError(f"expected input of shape (batch, {self.cfg.s})")
        h = self.stem(csi).reshape(csi.shape[0], self.cfg.base_width, STEM_GRID, STEM_GRID)
        for block in self.blocks:
            h = block(h, csi)
        h = self.transition(h)
        for layer in self.refine:
            h = layer(h)
        return self.to_rgb(h).clamp(0.0, 1.0)


def build_encoder(cfg: EncoderConfig, seed: int = 0) -> CsiEncoder:
    torch.manual_seed(seed)
    return CsiEncoder(cfg)


def build_baseline(cfg: BaselineConfig, seed: int = 0) -> PixelBaseline:
    torch.manual_seed(seed)
    model = PixelBaseline(cfg)
    # mid-range bias keeps the clamp from zeroing gradients at init
    with torch.no_grad():
        model.to_rgb.bias.fill_(0.5)
    return model


def _res_params(c: int) -> int:
    return 18 * c * c + 6 * c


def _attn_params(c: int, s: int, m: int, e: int) -> int:
    return 3 * c + 2 * c * e + s * m * e + m * e + 2 * e * e + 3 * e


def _upsample_params(c_in: int, c_out: int) -> int:
    return c_in * c_out * 16 + c_out


def param_count(cfg: EncoderConfig) -> int:
    """Closed-form parameter count of :class:`CsiEncoder`."""
    grid = STEM_GRID * STEM_GRID
    total = cfg.s * cfg.base_width * grid + cfg.base_width * grid
    for k in range(1, cfg.depth + 1):
        c = cfg.block_channels(k)
        total += 2 * _res_params(c)
        if k in cfg.attention_blocks:
            total += _attn_params(c, cfg.s, cfg.context_tokens, cfg.embed_dim)
        total += _upsample_params(c, c // 2)
    c_out = cfg.base_width >> cfg.depth
    total += c_out * cfg.latent_channels * 9 + cfg.latent_channels
    return total


def baseline_param_count(cfg: BaselineConfig) -> int:
    """Closed-form parameter count of :class:`PixelBaseline`."""
    grid = STEM_GRID * STEM_GRID
    total = cfg.s * cfg.base_width * grid + cfg.base_width * grid
    for k in range(1, cfg.depth + 1):
        c = cfg.block_channels(k)
        total += 2 * _res_params(c)
        if k in cfg.attention_blocks:
            total += _attn_params(c, cfg.s, cfg.context_tokens, cfg.embed_dim)
        total += _upsample_params(c, cfg.block_channels(k + 1))
    w = cfg.head_width
    total += cfg.block_channels(cfg.depth + 1) * w * 9 + w
    total += cfg.head_depth * (2 * _res_params(w) + _upsample_params(w, w))
    total += w * 3 * 9 + 3
    return total
