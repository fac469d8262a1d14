"""Forward noising and deterministic DDIM denoising.

Arrays cross this module as float32; the update arithmetic runs in float64
so sampler error stays far below model noise.  The epsilon callback signature
``eps_fn(z, t, tokens) -> eps`` is the only coupling to the denoiser.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .schedule import DiffusionSchedule

EpsFn = Callable[[np.ndarray, int, np.ndarray], np.ndarray]


def add_noise(
    schedule: DiffusionSchedule,
    z0: np.ndarray,
    t: int,
    seed: int | None = None,
    eps: np.ndarray | None = None,
) -> np.ndarray:
    """Diffuse a clean latent to timestep ``t``.

    ``t == 0`` returns the input unchanged.  Noise comes from ``eps`` when
    given, otherwise from a generator seeded with ``seed``.
    """
    if t == 0:
        return np.array(z0, dtype=np.float32, copy=True)
    bar = schedule.alpha_bar(t)
    if eps is None:
        if seed is None:
            raise ValueError("need either eps or seed")
        eps = np.random.default_rng(seed).standard_normal(z0.shape).astype(np.float32)
    if eps.shape != z0.shape:
        raise ValueError("eps shape does not match latent shape")
    out = np.sqrt(bar) * z0.astype(np.float64) + np.sqrt(1.0 - bar) * eps.astype(np.float64)
    return out.astype(np.float32)


def ddim_denoise(
    schedule: DiffusionSchedule,
    z: np.ndarray,
    eps_fn: EpsFn,
    *,
    t_start: int,
    n_steps: int,
    cond: np.ndarray,
    uncond: np.ndarray | None = None,
    guidance: float = 1.0,
) -> np.ndarray:
    """Run the deterministic (eta = 0) reverse process from ``t_start`` to 0.

    ``cond`` is the prompt token array fed to ``eps_fn``; when ``guidance``
    differs from 1 the unconditional prediction on ``uncond`` is blended in
    as ``eps_u + guidance * (eps_c - eps_u)``.
    """
    if t_start == 0:
        return np.array(z, dtype=np.float32, copy=True)
    if guidance != 1.0 and uncond is None:
        raise ValueError("guidance != 1 requires an unconditional token array")
    grid = schedule.ddim_grid(t_start, n_steps)
    cur = z.astype(np.float64)
    for t_cur, t_next in zip(grid[:-1], grid[1:]):
        if t_cur == t_next:
            continue
        eps_hat = np.asarray(eps_fn(cur.astype(np.float32), int(t_cur), cond), dtype=np.float64)
        if guidance != 1.0:
            eps_u = np.asarray(eps_fn(cur.astype(np.float32), int(t_cur), uncond), dtype=np.float64)
            eps_hat = eps_u + guidance * (eps_hat - eps_u)
        bar_cur = schedule.alpha_bar(int(t_cur))
        bar_next = schedule.alpha_bar(int(t_next))
        z0_hat = (cur - np.sqrt(1.0 - bar_cur) * eps_hat) / np.sqrt(bar_cur)
        cur = np.sqrt(bar_next) * z0_hat + np.sqrt(1.0 - bar_next) * eps_hat
    return cur.astype(np.float32)
