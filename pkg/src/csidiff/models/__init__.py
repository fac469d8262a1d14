from .blocks import CrossAttention, ResBlock, UpBlock, norm_groups
from .encoder import (
    BaselineConfig,
    CsiEncoder,
    EncoderConfig,
    PixelBaseline,
    baseline_param_count,
    build_baseline,
    build_encoder,
    param_count,
)
from .weights_io import config_to_dict, load_model, load_state, save_model, save_state

__all__ = [
    "BaselineConfig",
    "CrossAttention",
    "CsiEncoder",
    "EncoderConfig",
    "PixelBaseline",
    "ResBlock",
    "UpBlock",
    "baseline_param_count",
    "build_baseline",
    "build_encoder",
    "config_to_dict",
    "load_model",
    "load_state",
    "norm_groups",
    "param_count",
    "save_model",
    "save_state",
]
