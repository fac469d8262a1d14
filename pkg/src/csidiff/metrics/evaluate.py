"""Dataset-level evaluation orchestration."""

from __future__ import annotations

import numpy as np
import torch

from ..data import DatasetManifest, image_array
from ..train.targets import normalized_inputs
from .crop import MetricReport, crop_pairs, evaluate_pairs
from .features import FrozenFeatures


def predict_latents(model: torch.nn.Module, inputs: np.ndarray, batch_size: int = 32) -> np.ndarray:
    model.eval()
    data = torch.from_numpy(np.ascontiguousarray(inputs, dtype=np.float32))
    out = []
    with torch.no_grad():
        for start in range(0, len(data), batch_size):
            out.append(model(data[start : start + batch_size]).numpy())
    return np.concatenate(out)


def generate_split(
    manifest: DatasetManifest,
    split: str,
    model: torch.nn.Module,
    backend,
    *,
    strength: float = 0.0,
    steps: int = 1,
    seed: int = 0,
    prompt: str = "",
) -> tuple[np.ndarray, np.ndarray]:
    """References and model generations for one split, aligned by sample.

    ``strength`` 0 decodes predicted latents directly; larger values run the
    diffusion loop per sample with per-sample seeds ``seed + index``.
    """
    refs, _ = image_array(manifest, split)
    latents = predict_latents(model, normalized_inputs(manifest, split))
    gens = np.stack(
        [
            backend.img2img(z, prompt, strength=strength, steps=steps, seed=seed + i)
            for i, z in enumerate(latents)
        ]
    )
    return refs, gens


def render_baseline_split(manifest: DatasetManifest, split: str, model: torch.nn.Module) -> tuple[np.ndarray, np.ndarray]:
    """References and direct pixel-model renderings for one split."""
    refs, _ = image_array(manifest, split)
    inputs = normalized_inputs(manifest, split)
    model.eval()
    data = torch.from_numpy(inputs)
    out = []
    with torch.no_grad():
        for start in range(0, len(data), 32):
            out.append(model(data[start : start + 32]).permute(0, 2, 3, 1).numpy())
    return refs, np.concatenate(out)


def evaluate_images(
    manifest: DatasetManifest,
    split: str,
    references: np.ndarray,
    generated: np.ndarray,
    features: FrozenFeatures | None = None,
    crop_size: int = 64,
) -> dict[str, MetricReport]:
    """Full-image metrics plus subject-crop metrics where boxes exist."""
    features = features or FrozenFeatures()
    out = {"full": evaluate_pairs(references, generated, features)}
    boxes = [e.box for e in manifest.split_entries(split)]
    if any(b is not None for b in boxes):
        ref_crops, gen_crops, skipped = crop_pairs(references, generated, boxes, crop_size)
        out["crop"] = evaluate_pairs(ref_crops, gen_crops, features, skipped=skipped)
    return out
