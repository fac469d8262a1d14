"""Shared fixtures: a tiny end-to-end environment for fast contract tests
and a larger one for the learning-signal and comparison suites, plus a
terminal summary that prints one line per acceptance criterion."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import pytest
import torch

from csidiff.backend import BackendHandle, save_backend, train_backend
from csidiff.data import DatasetManifest, SyntheticConfig, generate_synthetic
from csidiff.models import EncoderConfig, build_encoder
from csidiff.models.weights_io import save_model
from csidiff.train import (
    TrainConfig,
    TrainData,
    normalized_inputs,
    precompute_latent_targets,
    train_model,
)

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Recorder for acceptance tests; results feed the terminal summary."""

    def record(criterion: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE[criterion] = (bool(passed), detail)
        assert passed, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def key(name: str):
        digits = "".join(ch for ch in name if ch.isdigit())
        return (name[:1], int(digits) if digits else 0)
    for criterion in sorted(_ACCEPTANCE, key=key):
        passed, detail = _ACCEPTANCE[criterion]
        terminalreporter.write_line(
            f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
        )


@dataclass
class Env:
    """A dataset with a trained backend and a trained encoder checkpoint."""

    manifest: DatasetManifest
    backend: BackendHandle
    backend_dir: Path
    encoder_path: Path
    encoder_cfg: EncoderConfig
    cache_dir: Path
    build_seconds: float = 0.0

    @property
    def data_dir(self) -> Path:
        return Path(self.manifest.root)


def _build_env(
    root: Path,
    *,
    n: int,
    image_size: int,
    s: int,
    backend_epochs: int,
    encoder_cfg: EncoderConfig,
    encoder_epochs: int,
) -> Env:
    t0 = time.perf_counter()
    data_dir = root / "data"
    manifest = generate_synthetic(n, 0, SyntheticConfig(image_size=image_size, s=s), data_dir)
    backend, _ = train_backend(
        manifest, vae_epochs=backend_epochs, denoiser_epochs=backend_epochs, seed=0
    )
    backend_dir = root / "backend"
    save_backend(backend, backend_dir)
    cache_dir = root / "cache"
    targets = precompute_latent_targets(manifest, backend, cache_dir)
    data = TrainData(
        train_x=normalized_inputs(manifest, "train"),
        train_y=targets.array(manifest, "train"),
        val_x=normalized_inputs(manifest, "val"),
        val_y=targets.array(manifest, "val"),
        test_x=normalized_inputs(manifest, "test"),
        test_y=targets.array(manifest, "test"),
    )
    model = build_encoder(encoder_cfg, seed=0)
    model, _ = train_model(model, data, TrainConfig(max_epochs=encoder_epochs, patience=5), seed=0)
    encoder_path = root / "encoder.csdw"
    save_model(encoder_path, model, "encoder", encoder_cfg, 0)
    return Env(
        manifest, backend, backend_dir, encoder_path, encoder_cfg, cache_dir,
        build_seconds=time.perf_counter() - t0,
    )


@pytest.fixture(scope="session")
def tiny_env(tmp_path_factory) -> Env:
    """60 samples at 64 px with a briefly trained backend and encoder."""
    torch.set_num_threads(1)
    root = tmp_path_factory.mktemp("tiny_env")
    cfg = EncoderConfig(
        s=16, base_width=16, depth=1, latent_channels=4, latent_size=8,
        attention_blocks=(1,), context_tokens=4, embed_dim=16,
    )
    return _build_env(
        root, n=60, image_size=64, s=16, backend_epochs=3, encoder_cfg=cfg, encoder_epochs=3
    )


@pytest.fixture(scope="session")
def desk_env(tmp_path_factory) -> Env:
    """2000 samples at 64 px; the setting for learning-signal and comparison runs."""
    torch.set_num_threads(1)
    root = tmp_path_factory.mktemp("desk_env")
    cfg = EncoderConfig(
        s=64, base_width=32, depth=1, latent_channels=4, latent_size=8,
        attention_blocks=(1,), context_tokens=8, embed_dim=32,
    )
    return _build_env(
        root, n=2000, image_size=64, s=64, backend_epochs=30, encoder_cfg=cfg, encoder_epochs=30
    )


@pytest.fixture(scope="session")
def desk_targets(desk_env):
    targets = precompute_latent_targets(desk_env.manifest, desk_env.backend, desk_env.cache_dir)
    assert targets.recomputed == 0, "desk cache should already be populated"
    return targets
