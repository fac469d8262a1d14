"""Command-line entry points.

Subcommands cover the whole workflow: synthesize or ingest a dataset, fit
the image backend, train the measurement encoder, evaluate it, generate
single images, and serve the HTTP API.  A shared ``--config`` INI provides
defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .data import (
    DatasetManifest,
    ManifestEntry,
    SyntheticConfig,
    generate_synthetic,
    image_array,
    import_csv,
    load_manifest,
    refresh_stats,
    save_manifest,
    save_png,
    split_dataset,
    write_csif,
)
from .models import BaselineConfig, EncoderConfig, build_baseline, build_encoder
from .models.weights_io import load_model


def cmd_synth(args, cfg: RunConfig) -> int:
    syn = SyntheticConfig(image_size=args.size, s=args.subcarriers, csi_noise=args.noise)
    manifest = generate_synthetic(args.count, args.seed, syn, args.out)
    sizes = manifest.split_sizes()
    print(f"wrote {len(manifest.entries)} samples to {args.out} (splits {sizes})")
    return 0


def cmd_ingest(args, cfg: RunConfig) -> int:
    frames = import_csv(args.csv, args.subcarriers)
    if not frames:
        print("error: CSV contains no frames", file=sys.stderr)
        return 1
    image_paths = sorted(Path(args.images).glob("*.png"))
    stamped = []
    for p in image_paths:
        try:
            stamped.append((float(p.stem), p))
        except ValueError:
            print(f"skipping {p.name}: name is not a timestamp")
    if not stamped:
        print("error: no timestamp-named .png files found", file=sys.stderr)
        return 1
    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    times = np.array([t for t, _ in stamped])
    entries, kept_frames, dropped = [], [], 0
    for frame in frames:
        idx = int(np.argmin(np.abs(times - frame.timestamp)))
        t_img, src = stamped[idx]
        if abs(t_img - frame.timestamp) > args.tolerance:
            dropped += 1
            continue
        k = len(entries)
        dst = out / "images" / f"{k:06d}.png"
        shutil.copyfile(src, dst)
        entries.append(
            ManifestEntry(
                sample_id=f"s{k:06d}",
                csi_ref=f"frames.csif#{k}",
                image_path=f"images/{dst.name}",
                t_csi=frame.timestamp,
                t_img=t_img,
            )
        )
        kept_frames.append(frame)
    if len(entries) < 3:
        print(
            f"error: only {len(entries)} synchronized pairs from {len(frames)} frames"
            f" and {len(stamped)} images (need at least 3)",
            file=sys.stderr,
        )
        return 1
    write_csif(out / "frames.csif", kept_frames)
    from PIL import Image

    with Image.open(out / entries[0].image_path) as im:
        size = (im.height, im.width)
    manifest = DatasetManifest(
        root=out, entries=entries, s=len(kept_frames[0].re), image_size=size, sync_tolerance=args.tolerance
    )
    manifest = split_dataset(manifest, seed=args.seed)
    manifest = refresh_stats(manifest)
    save_manifest(manifest)
    print(f"ingested {len(entries)} pairs ({dropped} frames dropped), splits {manifest.split_sizes()}")
    return 0


def cmd_train_backend(args, cfg: RunConfig) -> int:
    from .backend import save_backend, train_backend

    manifest = load_manifest(args.data)
    handle, history = train_backend(
        manifest,
        vae_epochs=args.vae_epochs,
        denoiser_epochs=args.denoiser_epochs,
        vae_width=cfg.vae_width,
        denoiser_width=cfg.denoiser_width,
        seed=args.seed,
        batch_size=cfg.batch_size,
    )
    save_backend(handle, args.out)
    print(
        f"backend saved to {args.out}"
        f" (vae loss {history['vae'][0]:.4f} -> {history['vae'][-1]:.4f},"
        f" denoiser loss {history['denoiser'][0]:.4f} -> {history['denoiser'][-1]:.4f})"
    )
    return 0


def _encoder_config(cfg: RunConfig, manifest, backend) -> EncoderConfig:
    channels, size, _ = backend.latent_shape
    depth = cfg.depth
    base = cfg.base_width
    return EncoderConfig(
        s=manifest.s,
        base_width=base,
        depth=depth,
        latent_channels=channels,
        latent_size=size,
        attention_blocks=cfg.attention_blocks,
        context_tokens=cfg.context_tokens,
        embed_dim=cfg.embed_dim,
    )


def _baseline_config(cfg: RunConfig, manifest) -> BaselineConfig:
    return BaselineConfig(
        s=manifest.s,
        base_width=cfg.base_width,
        depth=cfg.depth,
        image_size=manifest.image_size[0],
        head_width=cfg.head_width,
        attention_blocks=cfg.attention_blocks,
        context_tokens=cfg.context_tokens,
        embed_dim=cfg.embed_dim,
    )


def cmd_train(args, cfg: RunConfig) -> int:
    from .train import TrainConfig, TrainData, normalized_inputs, precompute_latent_targets, run_protocol

    manifest = load_manifest(args.data)
    splits = ("train", "val", "test")
    inputs = {split: normalized_inputs(manifest, split) for split in splits}
    if args.target == "latent":
        from .backend import load_backend

        try:
            backend = load_backend(args.backend)
        except FileNotFoundError as exc:
            print(f"error: {exc} (run train-backend first)", file=sys.stderr)
            return 1
        cache_dir = Path(cfg.work_dir) / "latent_cache"
        targets = precompute_latent_targets(manifest, backend, cache_dir)
        print(f"latent targets ready ({targets.hits} cached, {targets.recomputed} computed)")
        outputs = {split: targets.array(manifest, split) for split in splits}
        builder, kind, model_cfg = build_encoder, "encoder", _encoder_config(cfg, manifest, backend)
    else:
        outputs = {split: image_array(manifest, split)[0].transpose(0, 3, 1, 2) for split in splits}
        builder, kind, model_cfg = build_baseline, "baseline", _baseline_config(cfg, manifest)
    data = TrainData(
        train_x=inputs["train"],
        train_y=outputs["train"],
        val_x=inputs["val"],
        val_y=outputs["val"],
        test_x=inputs["test"],
        test_y=outputs["test"],
    )
    train_cfg = TrainConfig(
        lr=cfg.lr, batch_size=cfg.batch_size, max_epochs=args.max_epochs, patience=cfg.patience
    )
    result = run_protocol(
        builder, kind, model_cfg, data, args.out, train_cfg, seeds=tuple(args.seeds)
    )
    for report in result.reports:
        print(
            f"seed {report.seed}: best epoch {report.best_epoch}/{report.epochs_run},"
            f" val {report.best_val_loss:.6f}, test {report.test_loss:.6f},"
            f" {report.mean_epoch_seconds:.2f}s/epoch"
        )
    print(f"best seed {result.best_seed}; checkpoint {result.best_model_path}")
    return 0


def cmd_eval(args, cfg: RunConfig) -> int:
    from .backend import load_backend
    from .metrics import FrozenFeatures, MetricReport, evaluate_images, generate_split, render_baseline_split

    manifest = load_manifest(args.data)
    backend = load_backend(args.backend)
    features = FrozenFeatures()
    per_scope: dict[str, list[MetricReport]] = {}
    lines = ["model,scope," + MetricReport.csv_header()]
    for model_path in args.model:
        model, kind, _, _ = load_model(model_path)
        if kind == "encoder":
            refs, gens = generate_split(manifest, args.split, model, backend, strength=0.0, steps=1)
            note = "direct decode"
        else:
            refs, gens = render_baseline_split(manifest, args.split, model)
            note = "pixel render"
        path = Path(model_path)
        label = path.parent.name if path.stem == "model" else path.stem
        reports = evaluate_images(manifest, args.split, refs, gens, features)
        for name, report in reports.items():
            per_scope.setdefault(name, []).append(report)
            print(
                f"{label} {name} ({note}): n={report.n} skipped={report.skipped}"
                f" rmse={report.rmse:.3f} ssim={report.ssim:.4f} fid={report.fid:.3f}"
            )
            lines.append(f"{label},{name},{report.csv_row()}")
    if len(args.model) > 1:
        for name, reports in per_scope.items():
            parts = []
            for metric in ("rmse", "ssim", "fid"):
                values = [getattr(r, metric) for r in reports]
                parts.append(f"{metric}={np.mean(values):.3f}±{np.std(values, ddof=1):.3f}")
            print(f"aggregate {name} over {len(reports)} checkpoints: " + " ".join(parts))
    if args.csv:
        Path(args.csv).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.csv}")
    return 0


def cmd_generate(args, cfg: RunConfig) -> int:
    from .backend import load_backend
    from .data import load_amplitude, normalize
    import torch

    manifest = load_manifest(args.data)
    backend = load_backend(args.backend)
    model, kind, _, _ = load_model(args.model)
    if kind != "encoder":
        print(f"error: {args.model} holds a {kind!r} model, expected encoder", file=sys.stderr)
        return 1
    entry = next((e for e in manifest.entries if e.sample_id == args.sample), None)
    if entry is None:
        print(f"error: unknown sample {args.sample!r}", file=sys.stderr)
        return 1
    x = normalize(load_amplitude(manifest, entry), manifest.stats).astype(np.float32)
    with torch.no_grad():
        latent = model(torch.from_numpy(x)[None])[0].numpy()
    image = backend.img2img(
        latent, args.prompt, strength=args.strength, steps=args.steps, seed=args.seed, guidance=args.guidance
    )
    save_png(args.out, image)
    print(
        json.dumps(
            {
                "sample_id": args.sample,
                "prompt": args.prompt,
                "strength": args.strength,
                "steps": args.steps,
                "seed": args.seed,
                "out": str(args.out),
            }
        )
    )
    return 0


def cmd_serve(args, cfg: RunConfig) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    def loader() -> ServiceState:
        from .backend import load_backend

        manifest = load_manifest(args.data)
        backend = load_backend(args.backend)
        model, kind, _, _ = load_model(args.model)
        if kind != "encoder":
            raise ValueError(f"{args.model} holds a {kind!r} model, expected encoder")
        return ServiceState(manifest, model, backend, max_concurrency=args.max_concurrency)

    app = create_app(loader=loader)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser(cfg: RunConfig) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csidiff", description="radio-to-image toolkit")
    parser.add_argument("--config", help="INI file with defaults for all subcommands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic paired dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--subcarriers", type=int, default=64)
    p.add_argument("--noise", type=float, default=0.01)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="build a dataset from a CSV of frames and timestamped images")
    p.add_argument("--csv", required=True)
    p.add_argument("--images", required=True, help="directory of <timestamp>.png files")
    p.add_argument("--out", required=True)
    p.add_argument("--subcarriers", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-backend", help="fit the image autoencoder and denoiser")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=cfg.backend_dir)
    p.add_argument("--vae-epochs", type=int, default=cfg.vae_epochs)
    p.add_argument("--denoiser-epochs", type=int, default=cfg.denoiser_epochs)
    p.add_argument("--seed", type=int, default=cfg.backend_seed)
    p.set_defaults(func=cmd_train_backend)

    p = sub.add_parser("train", help="train the measurement model over several seeds")
    p.add_argument("--data", required=True)
    p.add_argument("--backend", default=cfg.backend_dir)
    p.add_argument("--target", default="latent", choices=("latent", "pixel"),
                   help="latent trains the encoder; pixel trains the direct RGB variant")
    p.add_argument("--out", default=str(Path(cfg.work_dir) / "runs"))
    p.add_argument("--seeds", type=int, nargs="+", default=list(cfg.seeds))
    p.add_argument("--max-epochs", type=int, default=cfg.max_epochs)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score trained checkpoints on one split")
    p.add_argument("--data", required=True)
    p.add_argument("--backend", default=cfg.backend_dir)
    p.add_argument("--model", required=True, nargs="+",
                   help="checkpoint files; several give a mean/std aggregate")
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--csv", help="also write metrics to this CSV file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="generate one image from one sample")
    p.add_argument("--data", required=True)
    p.add_argument("--backend", default=cfg.backend_dir)
    p.add_argument("--model", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--prompt", default="")
    p.add_argument("--strength", type=float, default=cfg.strength)
    p.add_argument("--steps", type=int, default=cfg.steps)
    p.add_argument("--guidance", type=float, default=cfg.guidance)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP generation service")
    p.add_argument("--data", required=True)
    p.add_argument("--backend", default=cfg.backend_dir)
    p.add_argument("--model", required=True)
    p.add_argument("--host", default=cfg.host)
    p.add_argument("--port", type=int, default=cfg.port)
    p.add_argument("--max-concurrency", type=int, default=cfg.max_concurrency)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    cfg = load_config(known.config) if known.config else RunConfig()
    parser = build_parser(cfg)
    args = parser.parse_args(argv)
    return args.func(args, cfg)


if __name__ == "__main__":
    raise SystemExit(main())
