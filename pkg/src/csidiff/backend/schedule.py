"""Variance schedule shared by noising and sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DiffusionSchedule:
    """Linear beta schedule over ``timesteps`` discrete steps.

    ``alpha_bars`` has length ``timesteps + 1`` and is indexed directly by
    timestep, with ``alpha_bars[0] == 1`` so t = 0 means a clean latent.
    All derived arrays are float64.
    """

    timesteps: int = 1000
    beta_start: float = 8.5e-4
    beta_end: float = 1.2e-2
    betas: np.ndarray = field(init=False, repr=False, compare=False)
    alpha_bars: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.timesteps < 1:
            raise ValueError("timesteps must be positive")
        if not 0.0 < self.beta_start <= self.beta_end < 1.0:
            raise ValueError("require 0 < beta_start <= beta_end < 1")
        betas = np.linspace(self.beta_start, self.beta_end, self.timesteps, dtype=np.float64)
        bars = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alpha_bars", bars)

    def alpha_bar(self, t: int) -> float:
        if not 0 <= t <= self.timesteps:
            raise ValueError(f"timestep {t} outside 0..{self.timesteps}")
        return float(self.alpha_bars[t])

    def t_start(self, strength: float) -> int:
        """Map an image-to-image strength in [0, 1] to a starting timestep."""
        if not 0.0 <= strength <= 1.0:
            raise ValueError("strength must lie in [0, 1]")
        return int(np.rint(strength * self.timesteps))

    def ddim_grid(self, t_start: int, n_steps: int) -> np.ndarray:
        """Evenly spaced integer timestep grid from ``t_start`` down to 0."""
        if not 0 <= t_start <= self.timesteps:
            raise ValueError(f"t_start {t_start} outside 0..{self.timesteps}")
        if n_steps < 1:
            raise ValueError("n_steps must be positive")
        return np.rint(np.linspace(t_start, 0, n_steps + 1)).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "timesteps": self.timesteps,
            "beta_start": self.beta_start,
            "beta_end": self.beta_end,
        }
