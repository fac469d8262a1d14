"""Numerical verification of backpropagated gradients.

Runs the model in float64 and compares every selected parameter's autograd
gradient against a central finite difference of the loss.  Slow by design;
meant for small models and CI, not training-time use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn


class LinearLatentModel(nn.Module):
    """Depth-free stand-in: one linear map from measurement to latent grid."""

    def __init__(self, s: int, latent_channels: int = 4, latent_size: int = 8):
        super().__init__()
        self.shape = (latent_channels, latent_size, latent_size)
        self.proj = nn.Linear(s, int(np.prod(self.shape)))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.proj(x).reshape(x.shape[0], *self.shape)


@dataclass
class GradCheckResult:
    """``max_err`` is max over elements of min(absolute, relative) error,
    so tiny gradients are judged absolutely and large ones relatively."""

    max_err: float
    abs_at_worst: float
    rel_at_worst: float
    checked: int
    worst_param: str


def gradient_check(
    model: nn.Module,
    x: np.ndarray,
    y: np.ndarray,
    *,
    eps: float = 1e-3,
    max_per_tensor: int | None = None,
    seed: int = 0,
) -> GradCheckResult:
    """Compare autograd MSE gradients against central differences.

    Checks every element of every parameter unless ``max_per_tensor`` caps
    the count, in which case a seeded subset of each tensor is used.  The
    reported per-element error is ``min(abs_err, rel_err)`` maximized over
    elements: tiny gradients are judged absolutely, large ones relatively.
    """
    model = copy_to_double(model)
    xt = torch.from_numpy(np.ascontiguousarray(x, dtype=np.float64))
    yt = torch.from_numpy(np.ascontiguousarray(y, dtype=np.float64))

    def loss_value() -> float:
        with torch.no_grad():
            return nn.functional.mse_loss(model(xt), yt).item()

    model.zero_grad()
    nn.functional.mse_loss(model(xt), yt).backward()

    rng = np.random.default_rng(seed)
    worst_combined, worst_abs, worst_rel, worst_name, checked = 0.0, 0.0, 0.0, "", 0
    for name, param in model.named_parameters():
        grad = param.grad.detach().numpy().reshape(-1)
        flat = param.data.view(-1)
        n = flat.numel()
        indices = np.arange(n)
        if max_per_tensor is not None and n > max_per_tensor:
            indices = rng.choice(n, size=max_per_tensor, replace=False)
        for i in indices:
            original = flat[i].item()
            flat[i] = original + eps
            plus = loss_value()
            flat[i] = original - eps
            minus = loss_value()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            abs_err = abs(grad[i] - numeric)
            rel_err = abs_err / max(abs(numeric), abs(grad[i]), 1e-12)
            combined = min(abs_err, rel_err)
            checked += 1
            if combined > worst_combined:
                worst_combined = combined
                worst_abs, worst_rel, worst_name = abs_err, rel_err, name
    return GradCheckResult(worst_combined, worst_abs, worst_rel, checked, worst_name)


def copy_to_double(model: nn.Module) -> nn.Module:
    import copy

    clone = copy.deepcopy(model)
    return clone.double()
