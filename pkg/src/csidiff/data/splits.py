"""Seeded train/val/test assignment."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .types import DatasetManifest


def split_counts(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Floor-then-remainder sizes: train and val take floor(ratio*n), test the rest."""
    n_train = math.floor(ratios[0] * n)
    n_val = math.floor(ratios[1] * n)
    return n_train, n_val, n - n_train - n_val


def split_dataset(
    manifest: DatasetManifest,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> DatasetManifest:
    """Assign splits by a seeded uniform shuffle; returns a new manifest.

    Stats are not recomputed here; call csi.refresh_stats afterwards if the
    training split changed.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios {ratios} do not sum to 1")
    if any(r < 0 for r in ratios):
        raise ValueError(f"split ratios {ratios} must be nonnegative")
    n = len(manifest)
    if n < 3:
        raise ValueError(f"need at least 3 samples to split, got {n}")

    n_train, n_val, _ = split_counts(n, ratios)
    order = np.random.default_rng(seed).permutation(n)
    labels = [""] * n
    for rank, idx in enumerate(order):
        if rank < n_train:
            labels[idx] = "train"
        elif rank < n_train + n_val:
            labels[idx] = "val"
        else:
            labels[idx] = "test"

    entries = [replace(e, split=labels[i]) for i, e in enumerate(manifest.entries)]
    return DatasetManifest(
        root=manifest.root,
        entries=entries,
        s=manifest.s,
        image_size=manifest.image_size,
        stats=manifest.stats,
        split_seed=seed,
        sync_tolerance=manifest.sync_tolerance,
    )
