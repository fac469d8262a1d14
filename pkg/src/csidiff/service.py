"""HTTP generation service.

The app exposes dataset browsing and image generation over a loaded
encoder + backend pair.  Heavy loading can run in the background: until it
finishes, every data endpoint answers 503 and /healthz reports "loading".
"""

from __future__ import annotations

import base64
import io
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel, Field, model_validator

from .data import DatasetManifest, ManifestEntry, load_amplitude, load_image, normalize

THUMBNAIL_MAX = 128


class GenerateRequest(BaseModel):
    """Generation parameters; the source is a known sample or raw amplitudes."""

    sample_id: str | None = None
    csi: list[float] | None = None
    prompt: str = ""
    strength: float = Field(default=0.6, ge=0.0, le=1.0)
    steps: int = Field(default=100, ge=1, le=1000)
    seed: int | None = None
    guidance: float = Field(default=1.0, ge=0.0, le=30.0)

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.sample_id is None) == (self.csi is None):
            raise ValueError("provide exactly one of sample_id or csi")
        return self


@dataclass
class ServiceState:
    """Everything a request needs; built synchronously or by a loader thread."""

    manifest: DatasetManifest
    model: torch.nn.Module
    backend: object
    max_concurrency: int = 2
    _semaphore: threading.Semaphore = field(init=False)

    def __post_init__(self):
        self._semaphore = threading.Semaphore(self.max_concurrency)
        self.model.eval()
        self._by_id = {e.sample_id: e for e in self.manifest.entries}

    def entry(self, sample_id: str) -> ManifestEntry | None:
        return self._by_id.get(sample_id)

    def generate(self, req: GenerateRequest) -> tuple[bytes, dict]:
        entry = None
        if req.sample_id is not None:
            entry = self.entry(req.sample_id)
            if entry is None:
                raise KeyError(req.sample_id)
        seed = req.seed if req.seed is not None else int(time.time_ns() % (2**31))
        with self._semaphore:
            t0 = time.perf_counter()
            amp = load_amplitude(self.manifest, entry) if entry is not None else np.asarray(req.csi)
            x = normalize(amp, self.manifest.stats).astype(np.float32)
            with torch.no_grad():
                latent = self.model(torch.from_numpy(x)[None])[0].numpy()
            predict_ms = (time.perf_counter() - t0) * 1000.0
            t1 = time.perf_counter()
            image = self.backend.img2img(
                latent,
                req.prompt,
                strength=req.strength,
                steps=req.steps,
                seed=seed,
                guidance=req.guidance,
            )
            diffusion_ms = (time.perf_counter() - t1) * 1000.0
        latent_mse = None
        if entry is not None:
            reference = self.backend.encode_image(load_image(self.manifest, entry))
            latent_mse = round(float(np.mean((latent - reference) ** 2)), 6)
        schedule = getattr(self.backend, "schedule", None)
        meta = {
            "sample_id": req.sample_id,
            "prompt": req.prompt,
            "strength": req.strength,
            "steps": req.steps,
            "seed": seed,
            "guidance": req.guidance,
            "t_start": schedule.t_start(req.strength) if schedule is not None else None,
            "latent_mse": latent_mse,
            "predict_ms": round(predict_ms, 3),
            "diffusion_ms": round(diffusion_ms, 3),
            "elapsed_ms": round(predict_ms + diffusion_ms, 3),
        }
        return png_bytes(image), meta


def png_bytes(image: np.ndarray) -> bytes:
    arr = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, "RGB").save(buf, format="PNG")
    return buf.getvalue()


def thumbnail_b64(image: np.ndarray, max_side: int = THUMBNAIL_MAX) -> str:
    arr = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    img = Image.fromarray(arr, "RGB")
    if max(img.size) > max_side:
        img.thumbnail((max_side, max_side), Image.Resampling.BILINEAR)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def create_app(
    state: ServiceState | None = None,
    loader: Callable[[], ServiceState] | None = None,
) -> FastAPI:
    """Build the app around a ready state or a loader run on a worker thread."""
    if (state is None) == (loader is None):
        raise ValueError("pass exactly one of state or loader")
    app = FastAPI(title="csidiff service")
    holder: dict = {"state": state, "error": None}

    if loader is not None:
        def run_loader():
            try:
                holder["state"] = loader()
            except Exception as exc:  # surfaced via /healthz
                holder["error"] = str(exc)

        threading.Thread(target=run_loader, daemon=True).start()

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        location = [str(part) for part in first.get("loc", []) if part != "body"]
        return JSONResponse(
            status_code=400,
            content={"error": first.get("msg", "invalid request"), "field": ".".join(location) or "body"},
        )

    def current_state() -> ServiceState | None:
        return holder["state"]

    def loading_response() -> JSONResponse:
        return JSONResponse(status_code=503, content={"status": "loading"})

    @app.get("/healthz")
    def healthz():
        if holder["error"] is not None:
            return JSONResponse(status_code=500, content={"status": "error", "detail": holder["error"]})
        if current_state() is None:
            return loading_response()
        return {"status": "ok"}

    @app.get("/api/samples")
    def samples():
        st = current_state()
        if st is None:
            return loading_response()
        out = []
        for entry in st.manifest.split_entries("test"):
            image = load_image(st.manifest, entry)
            out.append(
                {
                    "sample_id": entry.sample_id,
                    "split": entry.split,
                    "caption": entry.caption,
                    "box": list(entry.box) if entry.box else None,
                    "thumbnail": thumbnail_b64(image),
                }
            )
        return {"samples": out, "count": len(out)}

    @app.get("/api/samples/{sample_id}")
    def sample_detail(sample_id: str):
        st = current_state()
        if st is None:
            return loading_response()
        entry = st.entry(sample_id)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": f"unknown sample {sample_id!r}"})
        image = load_image(st.manifest, entry)
        return {
            "sample_id": entry.sample_id,
            "split": entry.split,
            "caption": entry.caption,
            "box": list(entry.box) if entry.box else None,
            "image": base64.b64encode(png_bytes(image)).decode("ascii"),
        }

    @app.post("/api/generate")
    def generate(req: GenerateRequest, request: Request):
        st = current_state()
        if st is None:
            return loading_response()
        if req.csi is not None and len(req.csi) != st.manifest.s:
            return JSONResponse(
                status_code=400,
                content={"error": f"csi must have {st.manifest.s} values, got {len(req.csi)}", "field": "csi"},
            )
        try:
            png, meta = st.generate(req)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": f"unknown sample {req.sample_id!r}"})
        headers = {
            f"X-Generate-{k.replace('_', '-').title()}": str(v)
            for k, v in meta.items()
            if v is not None
        }
        if "application/json" in request.headers.get("accept", ""):
            return JSONResponse(
                content={"image": base64.b64encode(png).decode("ascii"), "meta": meta}, headers=headers
            )
        return Response(content=png, media_type="image/png", headers=headers)

    return app
