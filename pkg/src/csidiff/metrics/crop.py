"""Subject-region evaluation: compare crops around the annotated box.

The reference image's box is applied to both images of a pair, so the
comparison measures how well the generated image renders the subject where
the reference says it is.  Crops are resized to a common square before any
metric so box size does not change the statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .fid import frechet_distance
from .image import rmse, ssim


@dataclass
class MetricReport:
    rmse: float
    ssim: float
    fid: float
    n: int
    skipped: int = 0

    @staticmethod
    def csv_header() -> str:
        return "n,skipped,rmse,ssim,fid"

    def csv_row(self) -> str:
        return f"{self.n},{self.skipped},{self.rmse:.6f},{self.ssim:.6f},{self.fid:.6f}"


def crop_box(image: np.ndarray, box: tuple[int, int, int, int], out_size: int = 64) -> np.ndarray:
    """Crop (x, y, w, h) from an (H, W, 3) image and bilinear-resize square."""
    x, y, w, h = (int(v) for v in box)
    height, width, _ = image.shape
    if w < 1 or h < 1 or x < 0 or y < 0 or x + w > width or y + h > height:
        raise ValueError(f"box {box} outside {width}x{height} image")
    patch = np.ascontiguousarray(image[y : y + h, x : x + w], dtype=np.float32)
    if patch.shape[0] == out_size and patch.shape[1] == out_size:
        return patch.copy()
    t = torch.from_numpy(patch).permute(2, 0, 1)[None]
    resized = torch.nn.functional.interpolate(t, size=(out_size, out_size), mode="bilinear", align_corners=False)
    return resized[0].permute(1, 2, 0).numpy()


def crop_pairs(
    references: np.ndarray,
    generated: np.ndarray,
    boxes: list[tuple[int, int, int, int] | None],
    out_size: int = 64,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Crop every boxed pair; returns (ref_crops, gen_crops, skipped_count)."""
    if not (len(references) == len(generated) == len(boxes)):
        raise ValueError("references, generated and boxes must align")
    refs, gens, skipped = [], [], 0
    for ref, gen, box in zip(references, generated, boxes):
        if box is None:
            skipped += 1
            continue
        refs.append(crop_box(ref, box, out_size))
        gens.append(crop_box(gen, box, out_size))
    if not refs:
        raise ValueError("every sample was skipped: no boxes available")
    return np.stack(refs), np.stack(gens), skipped


def evaluate_pairs(references: np.ndarray, generated: np.ndarray, features, skipped: int = 0) -> MetricReport:
    """Mean RMSE/SSIM over pairs plus feature-space Frechet distance."""
    if references.shape != generated.shape:
        raise ValueError("reference and generated stacks must have identical shape")
    rmses = [rmse(r, g) for r, g in zip(references, generated)]
    ssims = [ssim(r, g) for r, g in zip(references, generated)]
    fid = frechet_distance(features.extract(references), features.extract(generated))
    return MetricReport(
        rmse=float(np.mean(rmses)),
        ssim=float(np.mean(ssims)),
        fid=fid,
        n=len(references),
        skipped=skipped,
    )
