"""Latent regression targets, cached per backend.

Encoding every training image through the autoencoder is the slow part of
preparing a run, and the result only changes when the backend weights do.
Targets are therefore stored one file per sample under a directory named
by the backend's identity hash, so stale caches can never be served.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import DatasetManifest, ManifestEntry, load_image, normalize


@dataclass
class LatentTargets:
    backend_hash: str
    latents: dict[str, np.ndarray]
    hits: int = 0
    recomputed: int = 0

    def array(self, manifest: DatasetManifest, split: str) -> np.ndarray:
        entries = manifest.split_entries(split)
        return np.stack([self.latents[e.sample_id] for e in entries])


def precompute_latent_targets(
    manifest: DatasetManifest,
    backend,
    cache_dir: Path | str,
    splits: tuple[str, ...] = ("train", "val", "test"),
) -> LatentTargets:
    """Encode dataset images to latents, reusing any cached results.

    The cache key is (backend identity hash, sample id); hits and
    recomputations are counted on the returned object.
    """
    cache_root = Path(cache_dir) / backend.identity_hash()
    cache_root.mkdir(parents=True, exist_ok=True)
    result = LatentTargets(backend_hash=backend.identity_hash(), latents={})
    expected = tuple(backend.latent_shape)
    for split in splits:
        for entry in manifest.split_entries(split):
            path = cache_root / f"{entry.sample_id}.npy"
            if path.exists():
                z = np.load(path)
                if tuple(z.shape) != expected:
                    raise ValueError(f"cached latent {path} has shape {z.shape}, expected {expected}")
                result.hits += 1
            else:
                z = backend.encode_image(load_image(manifest, entry))
                np.save(path, z)
                result.recomputed += 1
            result.latents[entry.sample_id] = z.astype(np.float32)
    return result


def normalized_inputs(manifest: DatasetManifest, split: str) -> np.ndarray:
    """Normalized amplitude rows for one split, aligned with split order."""
    from ..data import amplitude_matrix

    if manifest.stats is None:
        raise ValueError("manifest has no normalization stats; run refresh_stats first")
    raw, _ = amplitude_matrix(manifest, split)
    return np.stack([normalize(row, manifest.stats) for row in raw]).astype(np.float32)
