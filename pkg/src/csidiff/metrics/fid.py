"""Frechet distance between feature distributions.

The matrix square roots go through symmetric eigendecomposition of
``sqrt(A) B sqrt(A)``, which keeps everything in real arithmetic for
positive semi-definite inputs.  Tiny negative eigenvalues from roundoff
are clamped to zero; anything materially negative is an input error.
"""

from __future__ import annotations

import numpy as np

_EIG_FLOOR = -1e-8
_RIDGE = 1e-6


def _psd_sqrt(matrix: np.ndarray, label: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    scale = max(1.0, float(vals.max(initial=0.0)))
    if vals.min(initial=0.0) < _EIG_FLOOR * scale:
        raise ValueError(f"{label} is not positive semi-definite (min eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid_from_moments(
    mu_a: np.ndarray, cov_a: np.ndarray, mu_b: np.ndarray, cov_b: np.ndarray
) -> float:
    """Squared Frechet distance between two Gaussians given their moments."""
    mu_a = np.asarray(mu_a, dtype=np.float64).reshape(-1)
    mu_b = np.asarray(mu_b, dtype=np.float64).reshape(-1)
    cov_a = np.atleast_2d(np.asarray(cov_a, dtype=np.float64))
    cov_b = np.atleast_2d(np.asarray(cov_b, dtype=np.float64))
    if mu_a.shape != mu_b.shape or cov_a.shape != cov_b.shape:
        raise ValueError("moment shapes do not match")
    if cov_a.shape != (mu_a.size, mu_a.size):
        raise ValueError("covariance shape does not match mean dimension")
    diff = mu_a - mu_b
    root_a = _psd_sqrt(cov_a, "cov_a")
    cross = _psd_sqrt(root_a @ cov_b @ root_a, "sqrt(cov_a) cov_b sqrt(cov_a)")
    value = diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross)
    # roundoff can leave a tiny negative residue when the distributions match
    return float(max(value, 0.0))


def moments(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased covariance of an (n, k) feature array.

    When n <= k the covariance is rank-deficient; a small ridge keeps the
    distance well defined.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise ValueError("need an (n, k) array with n >= 2")
    mu = features.mean(axis=0)
    cov = np.cov(features, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    if features.shape[0] <= features.shape[1]:
        cov = cov + _RIDGE * np.eye(cov.shape[0])
    return mu, cov


def frechet_distance(features_a: np.ndarray, features_b: np.ndarray) -> float:
    """Squared Frechet distance between two feature samples."""
    mu_a, cov_a = moments(features_a)
    mu_b, cov_b = moments(features_b)
    return fid_from_moments(mu_a, cov_a, mu_b, cov_b)
