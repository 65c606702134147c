"""Self-contained default models for contour and feature extraction.

Both registries are pluggable: callers can register heavier external
models under new version identifiers. The defaults keep the adapters
runnable offline and fully deterministic, so every output is a pure
function of (image bytes, model version).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

WORKING_LEN = 500


def to_grayscale(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image, dtype=float)
    if img.ndim == 3:
        img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
    return img


def gradient_contour_map(image, sigma: float = 1.4, threshold: float = 0.05) -> np.ndarray:
    """Smoothed gradient magnitude, rescaled to contour weights in [0, 1].

    ``sigma`` and ``threshold`` are exposed because the reference
    hierarchical-segmentation settings are not published; they control
    the smoothing scale and the weight floor below which pixels are
    zeroed.
    """
    img = to_grayscale(image)
    smoothed = ndimage.gaussian_filter(img, sigma)
    gx = ndimage.sobel(smoothed, axis=1)
    gy = ndimage.sobel(smoothed, axis=0)
    mag = np.hypot(gx, gy)
    peak = float(mag.max())
    if peak <= 0.0:
        return np.zeros_like(mag)
    weights = mag / peak
    weights[weights < threshold] = 0.0
    return weights


def histogram_embedding(image, n_bins: int = 16) -> np.ndarray:
    """Deterministic stand-in for a learned embedding.

    Concatenates an intensity histogram, a gradient-orientation
    histogram, and coarse 4x4 mean-intensity pooling, then normalizes to
    unit length.
    """
    img = to_grayscale(image)
    span = float(img.max() - img.min())
    norm_img = (img - img.min()) / span if span > 0 else np.zeros_like(img)
    intensity, _ = np.histogram(norm_img, bins=n_bins, range=(0.0, 1.0))

    gx = ndimage.sobel(norm_img, axis=1)
    gy = ndimage.sobel(norm_img, axis=0)
    mag = np.hypot(gx, gy)
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    orient, _ = np.histogram(angle, bins=n_bins, range=(0.0, np.pi), weights=mag)

    h, w = norm_img.shape
    pooled = norm_img[: h - h % 4, : w - w % 4]
    pooled = pooled.reshape(4, pooled.shape[0] // 4, 4, pooled.shape[1] // 4).mean(axis=(1, 3))

    vec = np.concatenate([
        intensity / max(intensity.sum(), 1),
        orient / max(orient.sum(), 1.0),
        pooled.ravel(),
    ])
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec = np.zeros_like(vec)
        vec[0] = 1.0
        return vec
    return vec / norm


CONTOUR_MODELS = {
    "gradient-v1": gradient_contour_map,
}

FEATURE_MODELS = {
    "hist-embed-v1": histogram_embedding,
}
