"""Run configuration with INI persistence.

One flat dataclass covers dataset location, encoder shape, training, backend
training, generation defaults, and service binding.  Every field has a
default so a partial file (or none at all) is valid.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from pathlib import Path

_SECTIONS = {
    "paths": ("data_dir", "work_dir", "backend_dir"),
    "encoder": ("base_width", "depth", "attention_blocks", "context_tokens", "embed_dim", "head_width"),
    "training": ("lr", "batch_size", "max_epochs", "patience", "seeds"),
    "backend": ("vae_epochs", "denoiser_epochs", "vae_width", "denoiser_width", "backend_seed"),
    "generate": ("strength", "steps", "guidance"),
    "service": ("host", "port", "max_concurrency"),
}


@dataclass
class RunConfig:
    data_dir: str = "data"
    work_dir: str = "work"
    backend_dir: str = "work/backend"

    base_width: int = 64
    depth: int = 1
    # None selects the model default (every upsample block except the first);
    # in INI form, "none" means no attention and "1,2" lists block indices
    attention_blocks: tuple[int, ...] | None = None
    context_tokens: int = 16
    embed_dim: int = 128
    # refinement width of the pixel-target variant; unused for latent targets
    head_width: int = 24

    lr: float = 5e-4
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 5
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)

    vae_epochs: int = 30
    denoiser_epochs: int = 30
    vae_width: int = 16
    denoiser_width: int = 64
    backend_seed: int = 0

    strength: float = 0.6
    steps: int = 100
    guidance: float = 1.0

    host: str = "127.0.0.1"
    port: int = 8765
    max_concurrency: int = 2

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError("strength must lie in [0, 1]")
        if self.steps < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("steps, max_epochs and patience must be positive")
        if isinstance(self.attention_blocks, list):
            self.attention_blocks = tuple(self.attention_blocks)
        if isinstance(self.seeds, list):
            self.seeds = tuple(self.seeds)


def _parse_value(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    raw = raw.strip()
    if name == "attention_blocks":
        if raw.lower() == "none":
            return ()
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if name == "seeds":
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def load_config(path: Path | str | None) -> RunConfig:
    """Read an INI file; missing file, sections, or keys fall back to defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} does not exist")
    parser = configparser.ConfigParser()
    parser.read(path)
    values = {}
    for section, names in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for name in names:
            if parser.has_option(section, name):
                values[name] = _parse_value(name, parser.get(section, name))
        for key in parser.options(section):
            if key not in names:
                raise ValueError(f"unknown option [{section}] {key}")
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ValueError(f"unknown section [{section}]")
    return RunConfig(**values)


def save_config(cfg: RunConfig, path: Path | str) -> Path:
    parser = configparser.ConfigParser()
    for section, names in _SECTIONS.items():
        parser.add_section(section)
        for name in names:
            value = getattr(cfg, name)
            if name == "attention_blocks":
                if value is None:
                    continue
                text = "none" if value == () else ",".join(str(v) for v in value)
            elif name == "seeds":
                text = ",".join(str(v) for v in value)
            else:
                text = str(value)
            parser.set(section, name, text)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        parser.write(fh)
    return path
