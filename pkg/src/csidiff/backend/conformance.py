"""Contract checks for pluggable latent backends.

Any object that quacks like :class:`LatentBackendProtocol` can replace the
bundled backend, including wrappers around large pretrained systems.  The
checker exercises the behavioural clauses the rest of the package relies
on and reports every violation instead of stopping at the first.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class LatentBackendProtocol(Protocol):
    image_size: int
    latent_shape: tuple[int, int, int]

    def encode_image(self, image: np.ndarray) -> np.ndarray: ...

    def decode_latent(self, z: np.ndarray) -> np.ndarray: ...

    def embed_text(self, prompt: str) -> np.ndarray: ...

    def img2img(
        self, latent: np.ndarray, prompt: str, *, strength: float, steps: int, seed: int, guidance: float = 1.0
    ) -> np.ndarray: ...


def check_backend(backend, seed: int = 0) -> list[str]:
    """Return a list of contract violations; an empty list means conformant."""
    failures: list[str] = []

    def check(condition: bool, message: str):
        if not condition:
            failures.append(message)

    size = getattr(backend, "image_size", None)
    shape = getattr(backend, "latent_shape", None)
    if not isinstance(size, int) or size < 8:
        return [f"image_size must be an int >= 8, got {size!r}"]
    if not (isinstance(shape, tuple) and len(shape) == 3 and all(isinstance(v, int) for v in shape)):
        return [f"latent_shape must be a 3-tuple of ints, got {shape!r}"]

    rng = np.random.default_rng(seed)
    image = rng.uniform(0.0, 1.0, (size, size, 3)).astype(np.float32)

    z = backend.encode_image(image)
    check(tuple(z.shape) == shape, f"encode_image returned shape {z.shape}, declared {shape}")
    check(z.dtype == np.float32, f"encode_image returned dtype {z.dtype}, expected float32")
    check(np.isfinite(z).all(), "encode_image returned non-finite values")
    z2 = backend.encode_image(image)
    check(np.array_equal(z, z2), "encode_image is not deterministic")

    img = backend.decode_latent(z)
    check(img.shape == (size, size, 3), f"decode_latent returned shape {img.shape}")
    check(np.isfinite(img).all(), "decode_latent returned non-finite values")
    check(img.min() >= 0.0 and img.max() <= 1.0, "decode_latent output leaves [0, 1]")
    check(np.array_equal(img, backend.decode_latent(z)), "decode_latent is not deterministic")

    emb = backend.embed_text("subject near the window")
    check(np.array_equal(emb, backend.embed_text("subject near the window")), "embed_text is not deterministic")
    check(not np.array_equal(emb, backend.embed_text("")), "empty prompt must embed differently")

    direct = backend.img2img(z, "anything", strength=0.0, steps=4, seed=seed)
    check(
        np.abs(direct.astype(np.float64) - img.astype(np.float64)).max() < 1e-6,
        "img2img at strength 0 must reproduce decode_latent",
    )

    a = backend.img2img(z, "subject", strength=0.5, steps=2, seed=seed)
    b = backend.img2img(z, "subject", strength=0.5, steps=2, seed=seed)
    check(np.array_equal(a, b), "img2img is not deterministic under a fixed seed")
    c = backend.img2img(z, "subject", strength=1.0, steps=2, seed=seed + 1)
    d = backend.img2img(z, "subject", strength=1.0, steps=2, seed=seed + 2)
    check(not np.array_equal(c, d), "img2img ignores the seed at strength 1")

    return failures


def assert_conformant(backend, seed: int = 0) -> None:
    failures = check_backend(backend, seed=seed)
    if failures:
        raise AssertionError("backend contract violations:\n- " + "\n- ".join(failures))
