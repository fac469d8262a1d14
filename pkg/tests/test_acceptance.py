"""Release gate: one test per acceptance criterion.

Each test exercises its criterion end to end at the stated tolerance and
reports a PASS/FAIL line through the terminal summary, so a full run shows
the whole scorecard at a glance.
"""

from __future__ import annotations

import threading
import time

import httpx
import numpy as np
import pytest
import torch
import uvicorn

from csidiff.backend import (
    DiffusionSchedule,
    add_noise,
    ddim_denoise,
    load_backend,
)
from csidiff.data import image_array, split_counts
from csidiff.metrics import FrozenFeatures, fid_from_moments, frechet_distance, rmse, ssim
from csidiff.metrics.evaluate import generate_split, render_baseline_split
from csidiff.metrics.fid import _psd_sqrt
from csidiff.models import (
    BaselineConfig,
    EncoderConfig,
    baseline_param_count,
    build_baseline,
    build_encoder,
    param_count,
)
from csidiff.models.weights_io import load_model
from csidiff.service import ServiceState, create_app
from csidiff.train import (
    EarlyStopper,
    TrainConfig,
    TrainData,
    evaluate_mse,
    gradient_check,
    normalized_inputs,
    run_protocol,
    train_model,
)

TINY = EncoderConfig(
    s=8, base_width=8, depth=1, latent_channels=4, latent_size=8,
    context_tokens=2, embed_dim=4,
)
TINY_PARAMS = 4216


def test_p1_gradients_match_finite_differences(acceptance):
    t0 = time.perf_counter()
    torch.set_num_threads(1)
    model = build_encoder(TINY, seed=0)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, TINY.s))
    y = rng.standard_normal((4, TINY.latent_channels, TINY.latent_size, TINY.latent_size))
    result = gradient_check(model, x, y)
    elapsed = time.perf_counter() - t0
    ok = result.max_err < 1e-4 and elapsed < 60.0
    acceptance(
        "P1",
        ok,
        f"max gradient error {result.max_err:.2e} over {result.checked} parameters"
        f" in {elapsed:.1f}s (bounds 1e-4, 60s)",
    )


def test_p2_strength_zero_is_direct_decode(acceptance, tiny_env):
    images, _ = image_array(tiny_env.manifest, "test")
    worst = 0.0
    for index, image in enumerate(images[:3]):
        z = tiny_env.backend.encode_image(image)
        via_pipeline = tiny_env.backend.img2img(z, "a prompt", strength=0.0, steps=8, seed=index)
        direct = tiny_env.backend.decode_latent(z)
        worst = max(worst, float(np.abs(via_pipeline - direct).max()))
    acceptance("P2", worst < 1e-6, f"max |pipeline - decode| = {worst:.2e} (bound 1e-6)")


def test_p3_zero_epsilon_sampler_closed_form(acceptance):
    schedule = DiffusionSchedule()
    rng = np.random.default_rng(5)
    z0 = rng.standard_normal((4, 8, 8)).astype(np.float32)
    tokens = np.zeros((2, 4), dtype=np.float32)

    def zero_eps(z, t, cond):
        return np.zeros_like(z)

    worst = 0.0
    for strength in (0.25, 0.5, 1.0):
        t_start = schedule.t_start(strength)
        z_t = add_noise(schedule, z0, t_start, seed=9)
        expected = z_t.astype(np.float64) / np.sqrt(schedule.alpha_bar(t_start))
        for steps in (1, 10, 50):
            out = ddim_denoise(
                schedule, z_t, zero_eps, t_start=t_start, n_steps=steps, cond=tokens
            )
            rel = float(np.max(np.abs(out - expected) / np.maximum(np.abs(expected), 1e-12)))
            worst = max(worst, rel)
    acceptance(
        "P3",
        worst < 1e-6,
        f"worst relative error {worst:.2e} over strengths x steps grid (bound 1e-6)",
    )


def test_p4_latent_input_matches_composed_image_pipeline(acceptance, tiny_env):
    backend = tiny_env.backend
    image = image_array(tiny_env.manifest, "test")[0][0]
    prompt, strength, steps, seed, guidance = "alpha", 0.7, 6, 77, 2.0

    via_handle = backend.img2img(
        backend.encode_image(image), prompt,
        strength=strength, steps=steps, seed=seed, guidance=guidance,
    )

    def eps_fn(z, t, cond):
        with torch.no_grad():
            return backend.denoiser(
                torch.from_numpy(z)[None],
                torch.tensor([t], dtype=torch.long),
                torch.from_numpy(cond)[None],
            )[0].numpy()

    z = backend.encode_image(image)
    t_start = backend.schedule.t_start(strength)
    z_t = add_noise(backend.schedule, z, t_start, seed=seed)
    z0 = ddim_denoise(
        backend.schedule, z_t, eps_fn, t_start=t_start, n_steps=steps,
        cond=backend.embed_text(prompt), uncond=backend.embed_text(""), guidance=guidance,
    )
    composed = backend.decode_latent(z0)
    identical = via_handle.tobytes() == composed.tobytes()
    acceptance("P4", identical, "latent-fed pipeline and composed image pipeline"
               f" {'are bit-identical' if identical else 'DIFFER'} under a shared seed")


def newton_schulz_sqrt(matrix: np.ndarray, iterations: int = 60) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.float64)
    norm = np.linalg.norm(a)
    y = a / norm
    z = np.eye(a.shape[0])
    for _ in range(iterations):
        t = 0.5 * (3.0 * np.eye(a.shape[0]) - z @ y)
        y = y @ t
        z = t @ z
    return y * np.sqrt(norm)


def test_p5_metric_oracles(acceptance, tiny_env):
    problems = []
    images, _ = image_array(tiny_env.manifest, "test")

    self_ssim = ssim(images[0], images[0])
    if abs(self_ssim - 1.0) > 1e-9:
        problems.append(f"self SSIM {self_ssim!r}")

    u = float(np.float32(0.4)) * 255.0
    v = float(np.float32(0.6)) * 255.0
    c1 = (0.01 * 255.0) ** 2
    expected = (2.0 * u * v + c1) / (u * u + v * v + c1)
    got = ssim(np.full((32, 32, 3), 0.4, np.float32), np.full((32, 32, 3), 0.6, np.float32))
    if abs(got - expected) > 1e-9:
        problems.append(f"constant SSIM {got} vs {expected}")

    feats = FrozenFeatures().extract(images)
    self_fid = frechet_distance(feats, feats)
    if not self_fid < 1e-6:
        problems.append(f"self FID {self_fid}")

    univariate = fid_from_moments(np.array([0.0]), np.array([[1.0]]), np.array([1.0]), np.array([[4.0]]))
    if univariate != 2.0:
        problems.append(f"univariate FID {univariate!r} != 2.0")

    rng = np.random.default_rng(3)
    basis = rng.standard_normal((16, 16))
    psd = basis @ basis.T + 0.5 * np.eye(16)
    gap = float(np.abs(_psd_sqrt(psd, "psd") - newton_schulz_sqrt(psd)).max())
    if not gap < 1e-6:
        problems.append(f"matrix sqrt methods disagree by {gap:.2e}")

    if rmse(images[0], images[0]) != 0.0:
        problems.append("self RMSE nonzero")

    acceptance("P5", not problems, "; ".join(problems) or
               f"SSIM/FID/sqrt oracles agree (sqrt gap {gap:.1e}, univariate FID exactly 2.0)")


def test_p6_encoder_beats_constant_latent_predictor(acceptance, desk_env, desk_targets):
    t0 = time.perf_counter()
    manifest = desk_env.manifest
    model, kind, _, _ = load_model(desk_env.encoder_path)
    assert kind == "encoder"
    test_x = normalized_inputs(manifest, "test")
    test_y = desk_targets.array(manifest, "test")
    encoder_mse = evaluate_mse(model, test_x, test_y)
    mean_latent = desk_targets.array(manifest, "train").mean(axis=0)
    constant_mse = float(np.mean((test_y - mean_latent) ** 2))
    ratio = encoder_mse / constant_mse
    total = desk_env.build_seconds + (time.perf_counter() - t0)
    ok = ratio < 0.5 and total < 15 * 60
    acceptance(
        "P6",
        ok,
        f"test latent MSE {encoder_mse:.4f} vs constant predictor {constant_mse:.4f}"
        f" (ratio {ratio:.3f}, bound 0.5); dataset+training+eval {total:.0f}s (bound 900s)",
    )


DESK_BASELINE = BaselineConfig(s=64, base_width=16, depth=1, image_size=64, head_width=24)


def test_p7_latent_route_beats_pixel_route(acceptance, desk_env, desk_targets):
    t0 = time.perf_counter()
    torch.set_num_threads(1)
    manifest = desk_env.manifest
    enc_params = param_count(desk_env.encoder_cfg)
    base_params = baseline_param_count(DESK_BASELINE)
    budget_ratio = max(enc_params, base_params) / min(enc_params, base_params)
    assert budget_ratio <= 2.0, f"parameter budgets differ by {budget_ratio:.2f}x"

    latent_data = TrainData(
        train_x=normalized_inputs(manifest, "train"),
        train_y=desk_targets.array(manifest, "train"),
        val_x=normalized_inputs(manifest, "val"),
        val_y=desk_targets.array(manifest, "val"),
        test_x=normalized_inputs(manifest, "test"),
        test_y=desk_targets.array(manifest, "test"),
    )
    pixel_data = TrainData(
        train_x=latent_data.train_x,
        train_y=image_array(manifest, "train")[0].transpose(0, 3, 1, 2),
        val_x=latent_data.val_x,
        val_y=image_array(manifest, "val")[0].transpose(0, 3, 1, 2),
        test_x=latent_data.test_x,
        test_y=image_array(manifest, "test")[0].transpose(0, 3, 1, 2),
    )

    features = FrozenFeatures()
    refs, _ = image_array(manifest, "test")
    ref_feats = features.extract(refs)

    wins, rows = 0, []
    enc_epoch_times, base_epoch_times = [], []
    for seed in range(5):
        encoder = build_encoder(desk_env.encoder_cfg, seed=seed)
        encoder, enc_report = train_model(
            encoder, latent_data, TrainConfig(max_epochs=120, patience=5), seed=seed
        )
        baseline = build_baseline(DESK_BASELINE, seed=seed)
        baseline, base_report = train_model(
            baseline, pixel_data, TrainConfig(max_epochs=45, patience=5), seed=seed
        )
        enc_epoch_times.append(enc_report.mean_epoch_seconds)
        base_epoch_times.append(base_report.mean_epoch_seconds)

        # quantitative protocol: strength zero, so images are the direct
        # decode of the predicted latents with no denoising applied
        _, generated = generate_split(
            manifest, "test", encoder, desk_env.backend,
            strength=0.0, steps=1, seed=10_000 * seed, prompt="person at a desk",
        )
        _, rendered = render_baseline_split(manifest, "test", baseline)
        fid_latent = frechet_distance(ref_feats, features.extract(generated))
        fid_pixel = frechet_distance(ref_feats, features.extract(rendered))
        wins += fid_latent < fid_pixel
        rows.append(f"seed {seed}: {fid_latent:.3f} vs {fid_pixel:.3f}")

    mean_enc, mean_base = float(np.mean(enc_epoch_times)), float(np.mean(base_epoch_times))
    elapsed = time.perf_counter() - t0
    ok = wins >= 4 and mean_enc < mean_base and elapsed < 90 * 60
    acceptance(
        "P7",
        ok,
        f"latent route wins {wins}/5 FID pairings ({'; '.join(rows)});"
        f" {mean_enc:.2f} vs {mean_base:.2f} s/epoch; {elapsed:.0f}s total (bound 5400s)",
    )


def test_p8_parameter_budgets(acceptance):
    references = [
        ("latent head, wide input", param_count(
            EncoderConfig(s=1992, base_width=256, depth=4, latent_channels=4, latent_size=64)
        ), 22_914_052),
        ("latent head, narrow input", param_count(
            EncoderConfig(s=342, base_width=256, depth=4, latent_channels=4, latent_size=64)
        ), 13_621_252),
        ("pixel head, wide input", baseline_param_count(
            BaselineConfig(s=1992, base_width=8, depth=4, image_size=512)
        ), 16_434_395),
        ("pixel head, narrow input", baseline_param_count(
            BaselineConfig(s=342, base_width=32, depth=4, image_size=512)
        ), 11_490_275),
    ]
    rows, ok = [], True
    for name, mine, target in references:
        ratio = mine / target
        rows.append(f"{name}: {mine:,} vs {target:,} (x{ratio:.2f})")
        ok = ok and 0.5 <= ratio <= 2.0

    closed_form = param_count(TINY)
    counted = sum(p.numel() for p in build_encoder(TINY, seed=0).parameters())
    if not (closed_form == counted == TINY_PARAMS):
        ok = False
        rows.append(f"tiny config {closed_form} / {counted} != {TINY_PARAMS}")
    acceptance("P8", ok, "; ".join(rows) + f"; tiny config exactly {TINY_PARAMS}")


def test_p9_protocol_mechanics(acceptance, tiny_env, tmp_path):
    problems = []

    stopper = EarlyStopper(patience=5)
    for epoch, val in enumerate([5, 4, 3, 3.1, 3.2, 3.3, 3.4, 3.5], start=1):
        stopper.update(epoch, val)
        if stopper.should_stop:
            break
    if (epoch, stopper.best_epoch, stopper.best_val) != (8, 3, 3):
        problems.append(
            f"early stop at epoch {epoch}, best {stopper.best_epoch} ({stopper.best_val})"
        )

    ratios = (0.8, 0.1, 0.1)
    if split_counts(15_000, ratios) != (12_000, 1_500, 1_500):
        problems.append(f"split of 15000 gave {split_counts(15_000, ratios)}")

    from csidiff.data import SyntheticConfig, generate_synthetic
    from test_cli_service import dir_digest

    digests = []
    for run in ("a", "b"):
        out = tmp_path / f"synth_{run}"
        generate_synthetic(20, 4, SyntheticConfig(image_size=32, s=8), out)
        digests.append(dir_digest(out))
    if digests[0] != digests[1]:
        problems.append("synthetic dataset bytes differ between identical runs")

    rng = np.random.default_rng(2)
    data = TrainData(
        train_x=rng.standard_normal((24, 8)).astype(np.float32),
        train_y=rng.standard_normal((24, 4, 8, 8)).astype(np.float32),
        val_x=rng.standard_normal((8, 8)).astype(np.float32),
        val_y=rng.standard_normal((8, 4, 8, 8)).astype(np.float32),
        test_x=rng.standard_normal((8, 8)).astype(np.float32),
        test_y=rng.standard_normal((8, 4, 8, 8)).astype(np.float32),
    )
    states = []
    for _ in range(2):
        model = build_encoder(TINY, seed=0)
        model, _ = train_model(model, data, TrainConfig(max_epochs=2, patience=5), seed=0)
        states.append(b"".join(v.numpy().tobytes() for v in model.state_dict().values()))
    if states[0] != states[1]:
        problems.append("training twice from the same seed gave different weights")

    z = tiny_env.backend.encode_image(image_array(tiny_env.manifest, "test")[0][0])
    first = tiny_env.backend.img2img(z, "x", strength=0.5, steps=4, seed=3)
    second = tiny_env.backend.img2img(z, "x", strength=0.5, steps=4, seed=3)
    if first.tobytes() != second.tobytes():
        problems.append("img2img not reproducible for a fixed seed")

    runs = tmp_path / "runs"
    result = run_protocol(
        build_encoder, "encoder", TINY, data, runs,
        TrainConfig(max_epochs=2, patience=5), seeds=(0, 1, 2, 3, 4),
    )
    for seed in range(5):
        if not (runs / f"seed_{seed}" / "model.csdw").exists():
            problems.append(f"missing checkpoint for seed {seed}")
        if not (runs / f"seed_{seed}" / "report.jsonl").exists():
            problems.append(f"missing report for seed {seed}")
    losses = result.test_losses
    if result.best_seed != int(np.argmin(losses)):
        problems.append(f"selected seed {result.best_seed}, losses {losses}")

    acceptance("P9", not problems, "; ".join(problems) or
               "early stopping, 80/10/10 split, byte determinism, and 5-seed selection all hold")


def test_p10_service_contract_over_http(acceptance, tiny_env):
    t0 = time.perf_counter()
    model, _, _, _ = load_model(tiny_env.encoder_path)
    backend = load_backend(tiny_env.backend_dir)
    state = ServiceState(tiny_env.manifest, model, backend, max_concurrency=2)
    config = uvicorn.Config(create_app(state=state), host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.time() + 30
        while not server.started:
            if time.time() > deadline:
                pytest.fail("server did not start")
            time.sleep(0.01)
        port = server.servers[0].sockets[0].getsockname()[1]
        problems = []
        with httpx.Client(base_url=f"http://127.0.0.1:{port}", timeout=60) as client:
            health = client.get("/healthz")
            if health.status_code != 200 or health.json() != {"status": "ok"}:
                problems.append(f"health {health.status_code}")

            listing = client.get("/api/samples").json()
            expected = len(tiny_env.manifest.split_entries("test"))
            if listing["count"] != expected:
                problems.append(f"listed {listing['count']} samples, dataset holds {expected}")

            sample = listing["samples"][0]["sample_id"]
            bad = client.post("/api/generate", json={"sample_id": sample, "strength": 1.5})
            if bad.status_code != 400 or bad.json().get("field") != "strength":
                problems.append(f"strength 1.5 gave {bad.status_code} {bad.text[:80]}")

            request = {"sample_id": sample, "strength": 0.7, "steps": 3, "seed": 21}
            first = client.post("/api/generate", json=request)
            second = client.post("/api/generate", json=request)
            if first.headers.get("content-type") != "image/png":
                problems.append(f"content type {first.headers.get('content-type')}")
            if first.content != second.content:
                problems.append("same seed produced different bytes")

            ghost = client.post("/api/generate", json={"sample_id": "ghost"})
            if ghost.status_code != 404:
                problems.append(f"unknown sample gave {ghost.status_code}")
    finally:
        server.should_exit = True
        thread.join(timeout=10)
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 5 * 60
    acceptance("P10", ok, "; ".join(problems) or
               f"health, listing, validation, and seeded generation verified over HTTP in {elapsed:.1f}s")
