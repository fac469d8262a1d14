"""Amplitude extraction and per-subcarrier standardization."""
from __future__ import annotations

import numpy as np

from .types import ComplexCsiFrame, DatasetManifest, NormStats

STD_FLOOR = 1e-6


def amplitude(frame: ComplexCsiFrame) -> np.ndarray:
    """Per-subcarrier magnitude sqrt(re^2 + im^2) of a complex frame."""
    re, im = frame.re, frame.im
    bad = ~(np.isfinite(re) & np.isfinite(im))
    if bad.any():
        k = int(np.argmax(bad))
        raise ValueError(f"non-finite CSI value at subcarrier {k}")
    return np.sqrt(re * re + im * im)


def normalize(x: np.ndarray, stats: NormStats) -> np.ndarray:
    """Standardize an amplitude vector (or batch, last axis = subcarrier)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != stats.s:
        raise ValueError(f"amplitude length {x.shape[-1]} != stats length {stats.s}")
    return (x - stats.mean) / np.maximum(stats.std, STD_FLOOR)


def denormalize(x: np.ndarray, stats: NormStats) -> np.ndarray:
    """Inverse of normalize for the same stats."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != stats.s:
        raise ValueError(f"amplitude length {x.shape[-1]} != stats length {stats.s}")
    return x * np.maximum(stats.std, STD_FLOOR) + stats.mean


def compute_norm_stats(amplitudes: np.ndarray) -> NormStats:
    """Mean/std per subcarrier from the training split, std clamped to the floor."""
    amps = np.asarray(amplitudes, dtype=np.float64)
    if amps.ndim != 2 or amps.shape[0] < 1:
        raise ValueError("need a nonempty (n, s) amplitude matrix")
    mean = amps.mean(axis=0)
    std = np.maximum(amps.std(axis=0), STD_FLOOR)
    return NormStats(mean=mean, std=std)


def refresh_stats(manifest: DatasetManifest) -> DatasetManifest:
    """Recompute manifest.stats from the current training split."""
    from .io import amplitude_matrix

    amps, _ = amplitude_matrix(manifest, "train")
    manifest.stats = compute_norm_stats(amps)
    return manifest
