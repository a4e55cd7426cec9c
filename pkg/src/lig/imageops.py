"""Dense image-plane helpers: resampling, sampling, and quality metrics.

Images are (H, W, C) float arrays.  Targets loaded from 8-bit files live in
[0, 1]; renders and residuals may not.
"""

from __future__ import annotations

import numpy as np


def downsample(img: np.ndarray, factor: int) -> np.ndarray:
    """Box/area average with ceil(dim / factor) output; edge blocks average
    only the in-bounds pixels."""
    if factor < 2:
        raise ValueError("factor must be >= 2")
    h, w, c = img.shape
    oh = -(-h // factor)
    ow = -(-w // factor)
    out = np.empty((oh, ow, c), dtype=img.dtype)
    for oy in range(oh):
        ys = slice(oy * factor, min((oy + 1) * factor, h))
        for ox in range(ow):
            xs = slice(ox * factor, min((ox + 1) * factor, w))
            out[oy, ox] = img[ys, xs].mean(axis=(0, 1))
    return out


def bilinear_sample(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample at continuous pixel coordinates (half-pixel centers): the sample
    point (x, y) interpolates the four pixel centers around (x - 0.5, y - 0.5)
    in index space, clamped at the borders.  Returns (len(xs), C)."""
    h, w, _ = img.shape
    fx = np.clip(np.asarray(xs, dtype=np.float64) - 0.5, 0.0, w - 1.0)
    fy = np.clip(np.asarray(ys, dtype=np.float64) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(fx).astype(np.intp)
    y0 = np.floor(fy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    tx = (fx - x0)[:, None]
    ty = (fy - y0)[:, None]
    top = img[y0, x0] * (1.0 - tx) + img[y0, x1] * tx
    bot = img[y1, x0] * (1.0 - tx) + img[y1, x1] * tx
    return top * (1.0 - ty) + bot * ty


def upsample(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear upsampling with half-pixel-center alignment.  Constant images
    map to constant images exactly."""
    h, w, c = img.shape
    if out_w < w or out_h < h:
        raise ValueError("output dimensions must be >= input dimensions")
    sx = w / out_w
    sy = h / out_h
    xs = (np.arange(out_w) + 0.5) * sx
    ys = (np.arange(out_h) + 0.5) * sy
    gx, gy = np.meshgrid(xs, ys)
    flat = bilinear_sample(img, gx.ravel(), gy.ravel())
    return flat.reshape(out_h, out_w, c).astype(img.dtype)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1 / MSE) with peak 1.0; `a` (the reconstruction side) is
    clamped to [0, 1] first.  Identical inputs give +inf."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = np.clip(np.asarray(a, dtype=np.float64), 0.0, 1.0) - np.asarray(b, dtype=np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)
