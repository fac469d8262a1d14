from .crop import MetricReport, crop_box, crop_pairs, evaluate_pairs
from .evaluate import evaluate_images, generate_split, predict_latents, render_baseline_split
from .features import FEATURE_DIM, FrozenFeatures
from .fid import fid_from_moments, frechet_distance, moments
from .image import rmse, ssim

__all__ = [
    "FEATURE_DIM",
    "FrozenFeatures",
    "MetricReport",
    "crop_box",
    "crop_pairs",
    "evaluate_images",
    "evaluate_pairs",
    "fid_from_moments",
    "frechet_distance",
    "generate_split",
    "moments",
    "predict_latents",
    "render_baseline_split",
    "rmse",
    "ssim",
]
