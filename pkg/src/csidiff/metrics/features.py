"""Frozen random feature extractor for distribution metrics.

Distribution distances need a feature space, not a particular one.  A
conv net with weights drawn once from a fixed seed gives a deterministic,
dependency-free embedding that still responds to structure: blurring,
recoloring, or displacing content all move the features.

Plain random init followed by global mean pooling collapses almost all
inter-image variance, so the convs use orthogonal weights with gain 2 to
keep activations live, and the head concatenates per-channel spatial mean
and max so both diffuse and localized differences survive pooling.
"""

from __future__ import annotations

import hashlib

import numpy as np
import torch
from torch import nn

FEATURE_DIM = 64
_FROZEN_SEED = 7741
_INIT_GAIN = 2.0


class FrozenFeatures:
    """Maps (n, H, W, 3) images in [0, 1] to (n, 64) float32 features."""

    def __init__(self):
        torch.manual_seed(_FROZEN_SEED)
        self.convs = nn.ModuleList([
            nn.Conv2d(3, 16, 3, stride=2, padding=1),
            nn.Conv2d(16, 32, 3, stride=2, padding=1),
            nn.Conv2d(32, FEATURE_DIM // 2, 3, stride=2, padding=1),
        ]).eval()
        for conv in self.convs:
            nn.init.orthogonal_(conv.weight.view(conv.weight.shape[0], -1), gain=_INIT_GAIN)
            nn.init.zeros_(conv.bias)
            for p in conv.parameters():
                p.requires_grad_(False)

    def extract(self, images: np.ndarray, batch_size: int = 64) -> np.ndarray:
        if images.ndim != 4 or images.shape[-1] != 3:
            raise ValueError(f"expected (n, h, w, 3) images, got {images.shape}")
        data = torch.from_numpy(np.ascontiguousarray(images, dtype=np.float32)).permute(0, 3, 1, 2)
        chunks = []
        with torch.no_grad():
            for start in range(0, len(data), batch_size):
                x = data[start : start + batch_size]
                for conv in self.convs:
                    x = torch.nn.functional.silu(conv(x))
                pooled = torch.cat([x.mean(dim=(2, 3)), x.amax(dim=(2, 3))], dim=1)
                chunks.append(pooled.numpy())
        return np.concatenate(chunks)

    def identity_hash(self) -> str:
        h = hashlib.sha256()
        for index, conv in enumerate(self.convs):
            for name, value in conv.state_dict().items():
                h.update(f"{index}.{name}".encode())
                h.update(value.numpy().astype(np.float32).tobytes())
        return h.hexdigest()
