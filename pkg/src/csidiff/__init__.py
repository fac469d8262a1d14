"""csidiff: image synthesis from WiFi channel state information.

A lightweight encoder maps per-subcarrier CSI amplitudes into the latent
space of a diffusion image model; the latent is then optionally noised,
denoised under text conditioning, and decoded to pixels.
"""

__version__ = "0.1.0"
