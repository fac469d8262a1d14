"""File formats: CSV capture import, the CSIF frame container, PNG images,
and line-delimited manifest persistence with a stats sidecar."""
from __future__ import annotations

import json
import struct
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from .types import ComplexCsiFrame, DatasetManifest, ManifestEntry, NormStats, SceneState
from .csi import amplitude

CSIF_MAGIC = b"CSIF"
CSIF_VERSION = 1
_CSIF_HEADER = struct.Struct("<4sIIQ")  # magic, version, s, frame count

MANIFEST_NAME = "manifest.jsonl"
STATS_NAME = "stats.json"


# ---------------------------------------------------------------------------
# CSV import (timestamp, re0, im0, re1, im1, ...)
# ---------------------------------------------------------------------------

def import_csv(path: str | Path, s: int) -> list[ComplexCsiFrame]:
    """Parse a capture CSV into complex frames. Each row: timestamp then 2s
    interleaved re/im values, '.' decimal, comma separated."""
    frames: list[ComplexCsiFrame] = []
    expected = 2 * s + 1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != expected:
                raise ValueError(
                    f"row {lineno}: expected {expected} values (timestamp + {2 * s} re/im), "
                    f"got {len(parts)}"
                )
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"row {lineno}: malformed number ({exc})") from None
            interleaved = np.asarray(values[1:], dtype=np.float64).reshape(s, 2)
            frames.append(
                ComplexCsiFrame(re=interleaved[:, 0], im=interleaved[:, 1], timestamp=values[0])
            )
    return frames


# ---------------------------------------------------------------------------
# CSIF binary container
# ---------------------------------------------------------------------------

def write_csif(path: str | Path, frames: list[ComplexCsiFrame]) -> None:
    if not frames:
        raise ValueError("refusing to write an empty CSIF file")
    s = frames[0].s
    with open(path, "wb") as fh:
        fh.write(_CSIF_HEADER.pack(CSIF_MAGIC, CSIF_VERSION, s, len(frames)))
        for i, f in enumerate(frames):
            if f.s != s:
                raise ValueError(f"frame {i} has {f.s} subcarriers, expected {s}")
            inter = np.empty(2 * s, dtype="<f4")
            inter[0::2] = f.re
            inter[1::2] = f.im
            fh.write(struct.pack("<d", f.timestamp))
            fh.write(inter.tobytes())


def read_csif(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a CSIF file; returns (timestamps (n,), complex values (n, s))."""
    raw = Path(path).read_bytes()
    if len(raw) < _CSIF_HEADER.size:
        raise ValueError(f"{path}: truncated CSIF header")
    magic, version, s, count = _CSIF_HEADER.unpack_from(raw, 0)
    if magic != CSIF_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != CSIF_VERSION:
        raise ValueError(f"{path}: unsupported CSIF version {version}")
    frame_size = 8 + 8 * s
    body = raw[_CSIF_HEADER.size:]
    if len(body) != count * frame_size:
        raise ValueError(
            f"{path}: body is {len(body)} bytes, expected {count} frames of {frame_size}"
        )
    ts = np.empty(count, dtype=np.float64)
    values = np.empty((count, s), dtype=np.complex64)
    for i in range(count):
        off = i * frame_size
        ts[i] = struct.unpack_from("<d", body, off)[0]
        inter = np.frombuffer(body, dtype="<f4", count=2 * s, offset=off + 8)
        values[i] = inter[0::2] + 1j * inter[1::2]
    return ts, values


@lru_cache(maxsize=16)
def _csif_cache(resolved: str) -> tuple[np.ndarray, np.ndarray]:
    return read_csif(resolved)


def load_csi_frame(manifest: DatasetManifest, entry: ManifestEntry) -> ComplexCsiFrame:
    """Resolve an entry's csi_ref against the manifest root."""
    ref = entry.csi_ref
    if "#" not in ref:
        raise ValueError(f"sample {entry.sample_id}: csi_ref {ref!r} lacks a frame index")
    file_part, idx_part = ref.rsplit("#", 1)
    idx = int(idx_part)
    path = (manifest.root / file_part).resolve()
    if path.suffix == ".csif":
        ts, values = _csif_cache(str(path))
    elif path.suffix == ".csv":
        frames = import_csv(path, manifest.s)
        ts = np.array([f.timestamp for f in frames])
        values = np.array([f.re + 1j * f.im for f in frames], dtype=np.complex64)
    else:
        raise ValueError(f"sample {entry.sample_id}: unsupported csi_ref {ref!r}")
    if not (0 <= idx < len(ts)):
        raise ValueError(f"sample {entry.sample_id}: frame index {idx} out of range")
    v = values[idx]
    return ComplexCsiFrame(re=v.real.astype(np.float64), im=v.imag.astype(np.float64),
                           timestamp=float(ts[idx]))


def load_amplitude(manifest: DatasetManifest, entry: ManifestEntry) -> np.ndarray:
    return amplitude(load_csi_frame(manifest, entry))


def amplitude_matrix(manifest: DatasetManifest, split: str) -> tuple[np.ndarray, list[str]]:
    """Raw (unnormalized) amplitude rows for one split, in manifest order."""
    entries = manifest.split_entries(split)
    if not entries:
        raise ValueError(f"split {split!r} is empty")
    out = np.empty((len(entries), manifest.s), dtype=np.float64)
    for i, e in enumerate(entries):
        out[i] = load_amplitude(manifest, e)
    return out, [e.sample_id for e in entries]


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

def save_png(path: str | Path, image: np.ndarray) -> None:
    """Write a float image in [0,1], shape (h, w, 3), as 8-bit PNG."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) image, got {arr.shape}")
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


def load_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float32)
    return arr / 255.0


def load_image(manifest: DatasetManifest, entry: ManifestEntry) -> np.ndarray:
    img = load_png(manifest.root / entry.image_path)
    h, w = manifest.image_size
    if img.shape[:2] != (h, w):
        raise ValueError(
            f"sample {entry.sample_id}: image is {img.shape[1]}x{img.shape[0]}, "
            f"manifest says {w}x{h}"
        )
    return img


def image_array(manifest: DatasetManifest, split: str) -> tuple[np.ndarray, list[str]]:
    """All images of one split as a (n, h, w, 3) float32 array."""
    entries = manifest.split_entries(split)
    if not entries:
        raise ValueError(f"split {split!r} is empty")
    h, w = manifest.image_size
    out = np.empty((len(entries), h, w, 3), dtype=np.float32)
    for i, e in enumerate(entries):
        out[i] = load_image(manifest, e)
    return out, [e.sample_id for e in entries]


# ---------------------------------------------------------------------------
# Manifest persistence
# ---------------------------------------------------------------------------

def _entry_record(e: ManifestEntry) -> dict:
    rec = {
        "sample_id": e.sample_id,
        "csi": e.csi_ref,
        "image": e.image_path,
        "split": e.split,
        "t_csi": e.t_csi,
        "t_img": e.t_img,
    }
    if e.box is not None:
        rec["box"] = list(e.box)
    if e.state is not None:
        rec["state"] = [e.state.pos_x, e.state.pos_y, e.state.theta]
    if e.caption is not None:
        rec["caption"] = e.caption
    return rec


def save_manifest(manifest: DatasetManifest, out_dir: str | Path | None = None) -> Path:
    """Write manifest.jsonl plus the stats.json sidecar; returns the manifest path."""
    out = Path(out_dir) if out_dir is not None else manifest.root
    out.mkdir(parents=True, exist_ok=True)
    mpath = out / MANIFEST_NAME
    with open(mpath, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            fh.write(json.dumps(_entry_record(e)) + "\n")
    sidecar = {
        "s": manifest.s,
        "image_size": list(manifest.image_size),
        "split_seed": manifest.split_seed,
        "sync_tolerance": manifest.sync_tolerance,
        "stats": None
        if manifest.stats is None
        else {"mean": manifest.stats.mean.tolist(), "std": manifest.stats.std.tolist()},
    }
    with open(out / STATS_NAME, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1)
        fh.write("\n")
    return mpath


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load a manifest directory or a manifest.jsonl path."""
    path = Path(path)
    root = path.parent if path.is_file() else path
    mpath = path if path.is_file() else root / MANIFEST_NAME
    if not mpath.exists():
        raise FileNotFoundError(f"no manifest at {mpath}")
    spath = root / STATS_NAME
    if not spath.exists():
        raise FileNotFoundError(f"manifest sidecar missing: {spath}")
    sidecar = json.loads(spath.read_text())

    entries = []
    with open(mpath, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{mpath}: line {lineno}: {exc}") from None
            state = rec.get("state")
            entries.append(
                ManifestEntry(
                    sample_id=rec["sample_id"],
                    csi_ref=rec["csi"],
                    image_path=rec["image"],
                    split=rec["split"],
                    t_csi=rec.get("t_csi", 0.0),
                    t_img=rec.get("t_img", 0.0),
                    box=tuple(rec["box"]) if rec.get("box") is not None else None,
                    state=SceneState(*state) if state is not None else None,
                    caption=rec.get("caption"),
                )
            )

    stats = None
    if sidecar.get("stats") is not None:
        stats = NormStats(
            mean=np.asarray(sidecar["stats"]["mean"]),
            std=np.asarray(sidecar["stats"]["std"]),
        )
    return DatasetManifest(
        root=root,
        entries=entries,
        s=int(sidecar["s"]),
        image_size=tuple(sidecar["image_size"]),
        stats=stats,
        split_seed=sidecar.get("split_seed"),
        sync_tolerance=float(sidecar.get("sync_tolerance", 0.05)),
    )
