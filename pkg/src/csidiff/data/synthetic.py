"""Synthetic paired dataset: rendered scenes plus a multipath channel response.

Each sample draws a scene state (subject position and heading), renders a
64x64 image of a plain background with a filled oriented rectangle, and
synthesizes the matching channel response as a sum of P path components whose
delays are affine in the subject position and whose gains depend on heading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csi import compute_norm_stats
from .io import amplitude_matrix, save_manifest, save_png, write_csif
from .splits import split_dataset
from .types import ComplexCsiFrame, DatasetManifest, ManifestEntry, SceneState


@dataclass
class SyntheticConfig:
    image_size: int = 64
    s: int = 64                 # subcarriers
    paths: int = 8              # multipath components
    csi_noise: float = 0.01     # complex noise std per component
    subject_w: float = 20.0     # rectangle extent in pixels at image_size
    subject_h: float = 9.0
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    frame_interval: float = 0.1  # seconds between captures

    def __post_init__(self):
        if self.s < 1 or self.paths < 1 or self.image_size < 16:
            raise ValueError("invalid synthetic config")
        if self.csi_noise < 0:
            raise ValueError("csi_noise must be >= 0")


@dataclass(frozen=True)
class PathModel:
    """Frozen multipath constants drawn once per dataset."""

    base_delay: np.ndarray   # (P,)
    dx: np.ndarray           # delay slope vs pos_x
    dy: np.ndarray           # delay slope vs pos_y
    gain: np.ndarray         # (P,)
    heading_phase: np.ndarray  # (P,) gain modulation offsets
    freqs: np.ndarray        # (s,) subcarrier frequencies

    @staticmethod
    def draw(rng: np.random.Generator, cfg: SyntheticConfig) -> "PathModel":
        p = cfg.paths
        return PathModel(
            base_delay=rng.uniform(0.0, 1.0, p),
            dx=rng.uniform(-0.5, 0.5, p),
            dy=rng.uniform(-0.5, 0.5, p),
            gain=rng.uniform(0.5, 1.5, p),
            heading_phase=rng.uniform(0.0, 2 * math.pi, p),
            freqs=2.0 + 6.0 * np.arange(cfg.s) / cfg.s,
        )


def multipath_response(model: PathModel, state: SceneState) -> np.ndarray:
    """Noise-free complex response for one scene state."""
    delays = model.base_delay + model.dx * state.pos_x + model.dy * state.pos_y
    gains = model.gain * (1.0 + 0.5 * np.cos(state.theta - model.heading_phase))
    phases = 2.0 * math.pi * np.outer(model.freqs, delays)  # (s, P)
    return (gains * np.exp(1j * phases)).sum(axis=1)


def render_scene(
    state: SceneState, size: int, subject_w: float, subject_h: float
) -> tuple[np.ndarray, np.ndarray, tuple[int, int, int, int]]:
    """Render (image, subject mask, bounding box) for one state.

    The subject is a filled rectangle centered at (pos_x*W, pos_y*H) rotated by
    theta; its fill color shifts slightly with heading so orientation remains
    recoverable from pixels even though the rectangle is symmetric under a
    half turn.
    """
    cx, cy = state.pos_x * size, state.pos_y * size
    cos_t, sin_t = math.cos(state.theta), math.sin(state.theta)

    u = np.arange(size) + 0.5
    px, py = np.meshgrid(u, u)  # pixel centers
    rx = (px - cx) * cos_t + (py - cy) * sin_t
    ry = -(px - cx) * sin_t + (py - cy) * cos_t
    mask = (np.abs(rx) <= subject_w / 2.0) & (np.abs(ry) <= subject_h / 2.0)

    image = np.empty((size, size, 3), dtype=np.float32)
    image[..., 0] = 0.85
    image[..., 1] = 0.87
    image[..., 2] = 0.90
    color = np.array(
        [0.15 + 0.10 * cos_t, 0.18 + 0.10 * sin_t, 0.50], dtype=np.float32
    )
    image[mask] = color

    # axis-aligned bbox over the rectangle corners, clamped, at least 8 px wide
    half_diag_x = abs(cos_t) * subject_w / 2 + abs(sin_t) * subject_h / 2
    half_diag_y = abs(sin_t) * subject_w / 2 + abs(cos_t) * subject_h / 2
    x0 = max(0, math.floor(cx - half_diag_x))
    y0 = max(0, math.floor(cy - half_diag_y))
    x1 = min(size, math.ceil(cx + half_diag_x))
    y1 = min(size, math.ceil(cy + half_diag_y))
    w, h = max(x1 - x0, 8), max(y1 - y0, 8)
    x0, y0 = min(x0, size - w), min(y0, size - h)
    return image, mask, (x0, y0, w, h)


_COLS = ("left", "center", "right")
_ROWS = ("top", "middle", "bottom")
_DIRS = ("east", "northeast", "north", "northwest", "west", "southwest", "south", "southeast")


def describe_state(state: SceneState) -> str:
    col = _COLS[min(int(state.pos_x * 3), 2)]
    row = _ROWS[min(int(state.pos_y * 3), 2)]
    heading = _DIRS[int(((state.theta + math.pi / 8) % (2 * math.pi)) / (math.pi / 4)) % 8]
    return f"subject at {row} {col} facing {heading}"


def generate_synthetic(
    n: int, seed: int, cfg: SyntheticConfig, out_dir: str | Path
) -> DatasetManifest:
    """Create a paired dataset on disk; deterministic down to the byte for a
    fixed (n, seed, cfg)."""
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    model = PathModel.draw(rng, cfg)

    frames: list[ComplexCsiFrame] = []
    entries: list[ManifestEntry] = []
    # keep the subject fully inside the frame so mask centroids track the state
    lo, hi = 0.2, 0.8
    for i in range(n):
        state = SceneState(
            pos_x=float(rng.uniform(lo, hi)),
            pos_y=float(rng.uniform(lo, hi)),
            theta=float(rng.uniform(0.0, 2 * math.pi)),
        )
        response = multipath_response(model, state)
        if cfg.csi_noise > 0:
            noise = rng.normal(0.0, cfg.csi_noise, cfg.s) + 1j * rng.normal(
                0.0, cfg.csi_noise, cfg.s
            )
            response = response + noise
        t = i * cfg.frame_interval
        frames.append(ComplexCsiFrame(re=response.real, im=response.imag, timestamp=t))

        image, _, box = render_scene(state, cfg.image_size, cfg.subject_w, cfg.subject_h)
        sid = f"s{i:06d}"
        image_path = f"images/{sid}.png"
        save_png(out / image_path, image)
        entries.append(
            ManifestEntry(
                sample_id=sid,
                csi_ref=f"frames.csif#{i}",
                image_path=image_path,
                t_csi=t,
                t_img=t,
                box=box,
                state=state,
                caption=describe_state(state),
            )
        )

    write_csif(out / "frames.csif", frames)
    manifest = DatasetManifest(
        root=out,
        entries=entries,
        s=cfg.s,
        image_size=(cfg.image_size, cfg.image_size),
    )
    manifest = split_dataset(manifest, cfg.ratios, seed=seed)
    amps, _ = amplitude_matrix(manifest, "train")
    manifest.stats = compute_norm_stats(amps)
    save_manifest(manifest)
    return manifest
