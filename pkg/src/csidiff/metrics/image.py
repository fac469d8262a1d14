"""Pixel-space comparison metrics on the 0..255 intensity scale.

Inputs are (H, W, 3) float32 arrays in [0, 1]; both metrics rescale
internally so reported numbers match the conventional 8-bit ranges.
"""

from __future__ import annotations

import math

import numpy as np
import torch

_L = 255.0
_K1 = 0.01
_K2 = 0.03
_WINDOW = 11
_SIGMA = 1.5


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) images, got {a.shape}")


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    """Root mean squared error over all pixels and channels, 0..255 scale."""
    _check_pair(a, b)
    diff = (a.astype(np.float64) - b.astype(np.float64)) * _L
    return float(np.sqrt(np.mean(diff * diff)))


def _gaussian_window(size: int, sigma: float) -> torch.Tensor:
    half = (size - 1) / 2.0
    coords = torch.arange(size, dtype=torch.float64) - half
    g = torch.exp(-(coords**2) / (2.0 * sigma * sigma))
    g = g / g.sum()
    return g[:, None] @ g[None, :]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    The window is applied in valid mode (no padding), statistics use the
    standard C1 = (0.01 L)^2 and C2 = (0.03 L)^2 stabilizers with L = 255,
    and the map is averaged over the three channels.
    """
    _check_pair(a, b)
    h, w, _ = a.shape
    if h < _WINDOW or w < _WINDOW:
        raise ValueError(f"images must be at least {_WINDOW}x{_WINDOW}")
    c1 = (_K1 * _L) ** 2
    c2 = (_K2 * _L) ** 2
    x = torch.from_numpy(np.ascontiguousarray(a, dtype=np.float64)).permute(2, 0, 1)[None] * _L
    y = torch.from_numpy(np.ascontiguousarray(b, dtype=np.float64)).permute(2, 0, 1)[None] * _L
    kernel = _gaussian_window(_WINDOW, _SIGMA).expand(3, 1, _WINDOW, _WINDOW)

    def filt(t: torch.Tensor) -> torch.Tensor:
        return torch.nn.functional.conv2d(t, kernel, groups=3)

    mu_x = filt(x)
    mu_y = filt(y)
    var_x = filt(x * x) - mu_x * mu_x
    var_y = filt(y * y) - mu_y * mu_y
    cov = filt(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float((num / den).mean().item())
