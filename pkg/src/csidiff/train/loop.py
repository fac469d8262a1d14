"""Regression training loop with early stopping, plus the multi-seed protocol."""

from __future__ import annotations

import copy
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..models.weights_io import save_state


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 5

    def __post_init__(self):
        if self.patience < 1 or self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("patience, max_epochs and batch_size must be positive")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    seconds: float


class EarlyStopper:
    """Stops after ``patience`` consecutive epochs without strict improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_val = float("inf")
        self.best_epoch = 0
        self.since_improvement = 0
        self.should_stop = False

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record one epoch; returns True when it strictly improved the best."""
        if val_loss < self.best_val:
            self.best_val = val_loss
            self.best_epoch = epoch
            self.since_improvement = 0
            return True
        self.since_improvement += 1
        if self.since_improvement >= self.patience:
            self.should_stop = True
        return False


@dataclass
class TrainReport:
    seed: int
    epochs: list[EpochRecord]
    best_epoch: int
    best_val_loss: float
    test_loss: float | None = None
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.epochs)

    @property
    def mean_epoch_seconds(self) -> float:
        return float(np.mean([e.seconds for e in self.epochs]))

    def save(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            for record in self.epochs:
                fh.write(json.dumps({"type": "epoch", **asdict(record)}) + "\n")
            summary = {
                "type": "summary",
                "seed": self.seed,
                "best_epoch": self.best_epoch,
                "best_val_loss": self.best_val_loss,
                "test_loss": self.test_loss,
                "stopped_early": self.stopped_early,
                "epochs_run": self.epochs_run,
                "mean_epoch_seconds": self.mean_epoch_seconds,
            }
            fh.write(json.dumps(summary) + "\n")
        return path

    @classmethod
    def load(cls, path: Path | str) -> "TrainReport":
        epochs, summary = [], None
        for line in Path(path).read_text().splitlines():
            record = json.loads(line)
            if record.pop("type") == "epoch":
                epochs.append(EpochRecord(**record))
            else:
                summary = record
        if summary is None:
            raise ValueError(f"{path}: no summary line")
        return cls(
            seed=summary["seed"],
            epochs=epochs,
            best_epoch=summary["best_epoch"],
            best_val_loss=summary["best_val_loss"],
            test_loss=summary["test_loss"],
            stopped_early=summary["stopped_early"],
        )


@dataclass
class TrainData:
    """Numpy splits; targets may be latents or images depending on the model."""

    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    test_x: np.ndarray | None = None
    test_y: np.ndarray | None = None


def _mse_over(model: nn.Module, x: torch.Tensor, y: torch.Tensor, batch_size: int) -> float:
    total = 0.0
    with torch.no_grad():
        for start in range(0, len(x), batch_size):
            xb, yb = x[start : start + batch_size], y[start : start + batch_size]
            total += nn.functional.mse_loss(model(xb), yb, reduction="sum").item()
    return total / y.numel()


def evaluate_mse(model: nn.Module, x: np.ndarray, y: np.ndarray, batch_size: int = 32) -> float:
    model.eval()
    return _mse_over(model, torch.from_numpy(np.ascontiguousarray(x)), torch.from_numpy(np.ascontiguousarray(y)), batch_size)


def train_model(
    model: nn.Module,
    data: TrainData,
    cfg: TrainConfig = TrainConfig(),
    *,
    seed: int = 0,
) -> tuple[nn.Module, TrainReport]:
    """Minimize MSE with Adam; keep the weights from the best validation epoch.

    Stops once validation loss has gone ``cfg.patience`` consecutive epochs
    without a strict improvement over the best value seen so far.
    """
    train_x = torch.from_numpy(np.ascontiguousarray(data.train_x, dtype=np.float32))
    train_y = torch.from_numpy(np.ascontiguousarray(data.train_y, dtype=np.float32))
    val_x = torch.from_numpy(np.ascontiguousarray(data.val_x, dtype=np.float32))
    val_y = torch.from_numpy(np.ascontiguousarray(data.val_y, dtype=np.float32))
    opt = torch.optim.Adam(
        model.parameters(), lr=cfg.lr, betas=(cfg.beta1, cfg.beta2), eps=cfg.adam_eps
    )
    g = torch.Generator().manual_seed(seed)
    stopper = EarlyStopper(cfg.patience)
    best_state = copy.deepcopy(model.state_dict())
    records: list[EpochRecord] = []
    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        model.train()
        order = torch.randperm(len(train_x), generator=g)
        total = 0.0
        for batch, start in enumerate(range(0, len(train_x), cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            loss = nn.functional.mse_loss(model(train_x[idx]), train_y[idx])
            value = loss.item()
            if not np.isfinite(value):
                raise RuntimeError(f"non-finite loss at epoch {epoch}, batch {batch}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += value * len(idx)
        model.eval()
        val_loss = _mse_over(model, val_x, val_y, cfg.batch_size)
        records.append(
            EpochRecord(epoch, total / len(train_x), val_loss, time.perf_counter() - t0)
        )
        if stopper.update(epoch, val_loss):
            best_state = copy.deepcopy(model.state_dict())
        if stopper.should_stop:
            break
    model.load_state_dict(best_state)
    model.eval()
    report = TrainReport(
        seed=seed,
        epochs=records,
        best_epoch=stopper.best_epoch,
        best_val_loss=stopper.best_val,
        stopped_early=stopper.should_stop,
    )
    if data.test_x is not None and data.test_y is not None:
        report.test_loss = evaluate_mse(model, data.test_x, data.test_y, cfg.batch_size)
    return model, report


@dataclass
class ProtocolResult:
    reports: list[TrainReport]
    best_seed: int
    best_model_path: Path

    @property
    def test_losses(self) -> list[float]:
        return [r.test_loss for r in self.reports]

    @property
    def mean_epoch_seconds(self) -> float:
        return float(np.mean([r.mean_epoch_seconds for r in self.reports]))


def run_protocol(
    builder,
    model_kind: str,
    model_cfg,
    data: TrainData,
    out_dir: Path | str,
    cfg: TrainConfig = TrainConfig(),
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4),
) -> ProtocolResult:
    """Train one model per seed, persist every run, pick the best by test loss.

    ``builder(model_cfg, seed)`` must return a fresh model.  Each seed gets
    ``out_dir/seed_<k>/model.csdw`` and ``report.jsonl``; a ``summary.json``
    at the top level records the selection.
    """
    if data.test_x is None:
        raise ValueError("protocol selection needs a test split")
    from ..models.weights_io import config_to_dict

    out_dir = Path(out_dir)
    reports = []
    for seed in seeds:
        model = builder(model_cfg, seed)
        model, report = train_model(model, data, cfg, seed=seed)
        run_dir = out_dir / f"seed_{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        save_state(run_dir / "model.csdw", model_kind, config_to_dict(model_cfg), seed, model.state_dict())
        report.save(run_dir / "report.jsonl")
        reports.append(report)
    best = min(range(len(seeds)), key=lambda i: reports[i].test_loss)
    best_seed = seeds[best]
    summary = {
        "seeds": list(seeds),
        "test_losses": [r.test_loss for r in reports],
        "best_seed": best_seed,
        "best_test_loss": reports[best].test_loss,
        "mean_epoch_seconds": float(np.mean([r.mean_epoch_seconds for r in reports])),
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return ProtocolResult(reports, best_seed, out_dir / f"seed_{best_seed}" / "model.csdw")
