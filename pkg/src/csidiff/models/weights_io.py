"""Self-describing weight container.

Layout: magic ``CSDW``, u32 format version, u32 header length, then a JSON
header followed by the concatenated little-endian float32 tensor data in
header order.  The header echoes the model kind, its config, and the seed
it was built from, so a file is enough to reconstruct the module.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path
from typing import Any

import numpy as np
import torch

from .encoder import BaselineConfig, CsiEncoder, EncoderConfig, PixelBaseline

_MAGIC = b"CSDW"
_VERSION = 1
_PREFIX = struct.Struct("<4sII")

_KINDS = {
    "encoder": (EncoderConfig, CsiEncoder),
    "baseline": (BaselineConfig, PixelBaseline),
}


def config_to_dict(cfg: Any) -> dict:
    out = dataclasses.asdict(cfg)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}


def save_state(path: Path | str, kind: str, config: dict, seed: int, state: dict) -> Path:
    path = Path(path)
    tensors = []
    blobs = []
    for name, value in state.items():
        arr = value.detach().cpu().numpy() if isinstance(value, torch.Tensor) else np.asarray(value)
        if arr.dtype != np.float32:
            raise ValueError(f"tensor {name} is {arr.dtype}; container stores float32 only")
        tensors.append({"name": name, "shape": list(arr.shape)})
        blobs.append(np.ascontiguousarray(arr).tobytes())
    header = json.dumps(
        {"kind": kind, "config": config, "seed": seed, "tensors": tensors},
        sort_keys=True,
    ).encode()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(_MAGIC, _VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)
    return path


def load_state(path: Path | str) -> tuple[str, dict, int, dict[str, torch.Tensor]]:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _PREFIX.size:
        raise ValueError(f"{path}: truncated container")
    magic, version, header_len = _PREFIX.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    header = json.loads(raw[_PREFIX.size : _PREFIX.size + header_len])
    offset = _PREFIX.size + header_len
    state: dict[str, torch.Tensor] = {}
    for spec in header["tensors"]:
        count = int(np.prod(spec["shape"], dtype=np.int64)) if spec["shape"] else 1
        end = offset + 4 * count
        if end > len(raw):
            raise ValueError(f"{path}: tensor {spec['name']} extends past end of file")
        arr = np.frombuffer(raw[offset:end], dtype="<f4").reshape(spec["shape"])
        state[spec["name"]] = torch.from_numpy(arr.copy())
        offset = end
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes")
    return header["kind"], header["config"], header["seed"], state


def save_model(path: Path | str, model: torch.nn.Module, kind: str, cfg: Any, seed: int) -> Path:
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    return save_state(path, kind, config_to_dict(cfg), seed, model.state_dict())


def _config_from_dict(cls: type, data: dict) -> Any:
    if data.get("attention_blocks") is not None:
        data = {**data, "attention_blocks": tuple(data["attention_blocks"])}
    return cls(**data)


def load_model(path: Path | str) -> tuple[torch.nn.Module, str, Any, int]:
    kind, config, seed, state = load_state(path)
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    cfg_cls, model_cls = _KINDS[kind]
    cfg = _config_from_dict(cfg_cls, config)
    model = model_cls(cfg)
    model.load_state_dict(state)
    model.eval()
    return model, kind, cfg, seed
