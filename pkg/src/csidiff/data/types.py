"""Core dataset types: CSI frames, scene states, manifests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class ComplexCsiFrame:
    """One complex channel estimate across s subcarriers."""

    re: np.ndarray
    im: np.ndarray
    timestamp: float
    link_id: str = "0"

    def __post_init__(self):
        re = np.asarray(self.re, dtype=np.float64)
        im = np.asarray(self.im, dtype=np.float64)
        if re.ndim != 1 or im.ndim != 1 or re.shape != im.shape:
            raise ValueError(
                f"re/im must be equal-length 1D vectors, got {re.shape} and {im.shape}"
            )
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @property
    def s(self) -> int:
        return int(self.re.shape[0])


@dataclass(frozen=True)
class SceneState:
    """Normalized subject position and heading used by the synthetic generator."""

    pos_x: float
    pos_y: float
    theta: float

    def __post_init__(self):
        if not (0.0 <= self.pos_x <= 1.0 and 0.0 <= self.pos_y <= 1.0):
            raise ValueError(f"position ({self.pos_x}, {self.pos_y}) outside [0,1]")
        if not (0.0 <= self.theta < 2.0 * math.pi):
            raise ValueError(f"theta {self.theta} outside [0, 2*pi)")


@dataclass(frozen=True)
class NormStats:
    """Per-subcarrier standardization statistics, computed on the training split only."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean/std must be equal-length 1D vectors")
        if np.any(std < 1e-6):
            # callers clamp before constructing; a violation here is a bug upstream
            raise ValueError("std entries must be >= 1e-6")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def s(self) -> int:
        return int(self.mean.shape[0])


@dataclass
class ManifestEntry:
    """One paired (CSI, image) sample. csi_ref is '<file>.csif#<index>' or a CSV path."""

    sample_id: str
    csi_ref: str
    image_path: str
    split: str = "train"
    t_csi: float = 0.0
    t_img: float = 0.0
    box: tuple[int, int, int, int] | None = None  # x, y, w, h of the subject
    state: SceneState | None = None
    caption: str | None = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r} for sample {self.sample_id}")


@dataclass
class DatasetManifest:
    """Paired dataset: entries plus shape metadata and normalization statistics.

    Immutable by convention after construction; split assignment produces a new
    manifest rather than mutating in place.
    """

    root: Path
    entries: list[ManifestEntry]
    s: int
    image_size: tuple[int, int]  # (height, width)
    stats: NormStats | None = None
    split_seed: int | None = None
    sync_tolerance: float = 0.05  # seconds

    _by_id: dict[str, ManifestEntry] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.root = Path(self.root)
        self._by_id = {e.sample_id: e for e in self.entries}
        if len(self._by_id) != len(self.entries):
            raise ValueError("duplicate sample_id in manifest")
        if self.stats is not None and self.stats.s != self.s:
            raise ValueError(f"stats length {self.stats.s} != subcarrier count {self.s}")
        for e in self.entries:
            if abs(e.t_csi - e.t_img) > self.sync_tolerance + 1e-12:
                raise ValueError(
                    f"sample {e.sample_id}: CSI/image timestamps differ by "
                    f"{abs(e.t_csi - e.t_img):.4f}s, above the {self.sync_tolerance}s tolerance"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, sample_id: str) -> ManifestEntry:
        try:
            return self._by_id[sample_id]
        except KeyError:
            raise KeyError(f"unknown sample_id {sample_id!r}") from None

    def split_entries(self, split: str) -> list[ManifestEntry]:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [e for e in self.entries if e.split == split]

    def split_sizes(self) -> dict[str, int]:
        sizes = {name: 0 for name in SPLITS}
        for e in self.entries:
            sizes[e.split] += 1
        return sizes
