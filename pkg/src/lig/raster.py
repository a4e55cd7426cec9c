"""Tile-based forward renderer, analytic backward pass, and a naive oracle.

The forward pass gathers per tile: each tile accumulates the Gaussians binned
to it in ascending index order, so the per-pixel accumulation order is fixed
regardless of thread count.  The backward pass scatters per Gaussian: each
Gaussian owns its gradient row and scans its own bounding box, which visits
exactly the (Gaussian, pixel) pairs the forward pass summed.  Both directions
are therefore deterministic by construction.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .core import GaussianCloud, invert_cov, is_positive_definite

_env_threads = os.environ.get("LIG_THREADS")
if _env_threads:
    numba.set_num_threads(max(1, min(int(_env_threads), numba.config.NUMBA_NUM_THREADS)))


@dataclass
class TileGrid:
    """CSR-style binning of Gaussian indices into fixed-size screen tiles."""

    tile_size: int
    tiles_x: int
    tiles_y: int
    bin_start: np.ndarray  # (tiles_x * tiles_y + 1,) int64 prefix offsets
    bin_idx: np.ndarray    # flat Gaussian indices, ascending within each tile

    def bins(self):
        """Per-tile index lists in row-major tile order."""
        return [
            self.bin_idx[self.bin_start[t]:self.bin_start[t + 1]]
            for t in range(self.tiles_x * self.tiles_y)
        ]


@dataclass
class ParamGrads:
    """Gradients aligned with a cloud: d_mu (n,2), d_cov (n,3), d_color (n,C)."""

    d_mu: np.ndarray
    d_cov: np.ndarray
    d_color: np.ndarray


def _bounding_extents(cov, sigma_cut):
    # AABB of the ellipse {sigma <= sigma_cut}: half-extents R*sqrt(a), R*sqrt(c).
    r = np.sqrt(2.0 * sigma_cut)
    ex = r * np.sqrt(np.maximum(cov[:, 0], 0.0))
    ey = r * np.sqrt(np.maximum(cov[:, 2], 0.0))
    return ex, ey


@njit(cache=True)
def _tile_ranges(mu, ex, ey, valid, tile_size, tiles_x, tiles_y):
    n = mu.shape[0]
    ranges = np.empty((n, 4), dtype=np.int64)  # tx0, tx1, ty0, ty1 inclusive
    counts = np.zeros(n, dtype=np.int64)
    for g in range(n):
        if not valid[g]:
            ranges[g, 0], ranges[g, 1] = 0, -1
            ranges[g, 2], ranges[g, 3] = 0, -1
            continue
        tx0 = int(np.floor((mu[g, 0] - ex[g]) / tile_size))
        tx1 = int(np.floor((mu[g, 0] + ex[g]) / tile_size))
        ty0 = int(np.floor((mu[g, 1] - ey[g]) / tile_size))
        ty1 = int(np.floor((mu[g, 1] + ey[g]) / tile_size))
        tx0 = max(tx0, 0)
        ty0 = max(ty0, 0)
        tx1 = min(tx1, tiles_x - 1)
        ty1 = min(ty1, tiles_y - 1)
        ranges[g, 0], ranges[g, 1] = tx0, tx1
        ranges[g, 2], ranges[g, 3] = ty0, ty1
        if tx1 >= tx0 and ty1 >= ty0:
            counts[g] = (tx1 - tx0 + 1) * (ty1 - ty0 + 1)
    return ranges, counts


@njit(cache=True)
def _fill_bins(ranges, counts, tiles_x, tiles_y):
    ntiles = tiles_x * tiles_y
    tile_counts = np.zeros(ntiles, dtype=np.int64)
    n = ranges.shape[0]
    for g in range(n):
        if counts[g] == 0:
            continue
        for ty in range(ranges[g, 2], ranges[g, 3] + 1):
            for tx in range(ranges[g, 0], ranges[g, 1] + 1):
                tile_counts[ty * tiles_x + tx] += 1
    bin_start = np.zeros(ntiles + 1, dtype=np.int64)
    for t in range(ntiles):
        bin_start[t + 1] = bin_start[t] + tile_counts[t]
    bin_idx = np.empty(bin_start[ntiles], dtype=np.int64)
    cursor = bin_start[:ntiles].copy()
    for g in range(n):  # ascending g keeps each bin sorted
        if counts[g] == 0:
            continue
        for ty in range(ranges[g, 2], ranges[g, 3] + 1):
            for tx in range(ranges[g, 0], ranges[g, 1] + 1):
                t = ty * tiles_x + tx
                bin_idx[cursor[t]] = g
                cursor[t] += 1
    return bin_start, bin_idx


def bin_gaussians(cloud: GaussianCloud, width: int, height: int,
                  tile_size: int = 16, sigma_cut: float = 9.21,
                  eps_psd: float = 1e-4) -> TileGrid:
    """Bin each strictly-PD Gaussian into every tile its cutoff box overlaps.

    The axis-aligned box bounds the sigma <= sigma_cut ellipse exactly, so the
    binning is a superset of the exact ellipse-tile overlap set.  Non-PD
    Gaussians appear in no bin.
    """
    tiles_x = -(-width // tile_size)
    tiles_y = -(-height // tile_size)
    valid = np.ascontiguousarray(is_positive_definite(cloud.cov, eps_psd))
    ex, ey = _bounding_extents(np.asarray(cloud.cov, dtype=np.float64), sigma_cut)
    mu = np.ascontiguousarray(cloud.mu, dtype=np.float64)
    ranges, counts = _tile_ranges(mu, ex, ey, valid, tile_size, tiles_x, tiles_y)
    bin_start, bin_idx = _fill_bins(ranges, counts, tiles_x, tiles_y)
    return TileGrid(tile_size, tiles_x, tiles_y, bin_start, bin_idx)


@njit(cache=True, parallel=True, fastmath=True)
def _forward_kernel(mu, icov, color, out, bin_start, bin_idx,
                    ex, ey, tile_size, tiles_x, tiles_y, sigma_cut):
    height, width, channels = out.shape
    for t in prange(tiles_x * tiles_y):
        ty = t // tiles_x
        tx = t % tiles_x
        px0 = tx * tile_size
        py0 = ty * tile_size
        px1 = min(px0 + tile_size, width)
        py1 = min(py0 + tile_size, height)
        for k in range(bin_start[t], bin_start[t + 1]):
            g = bin_idx[k]
            mx, my = mu[g, 0], mu[g, 1]
            ia, ib, ic = icov[g, 0], icov[g, 1], icov[g, 2]
            # pixels whose centers can satisfy sigma <= sigma_cut
            x0 = max(px0, int(np.ceil(mx - ex[g] - 0.5)))
            x1 = min(px1 - 1, int(np.floor(mx + ex[g] - 0.5)))
            y0 = max(py0, int(np.ceil(my - ey[g] - 0.5)))
            y1 = min(py1 - 1, int(np.floor(my + ey[g] - 0.5)))
            for y in range(y0, y1 + 1):
                dy = y + 0.5 - my
                for x in range(x0, x1 + 1):
                    dx = x + 0.5 - mx
                    s = 0.5 * (ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy)
                    if s >= 0.0 and s <= sigma_cut:
                        e = np.exp(-s)
                        for ch in range(channels):
                            out[y, x, ch] += color[g, ch] * e


@njit(cache=True, parallel=True, fastmath=True)
def _backward_kernel(mu, icov, color, valid, d_image,
                     d_mu, d_cov, d_color, ex, ey, sigma_cut):
    height, width, channels = d_image.shape
    n = mu.shape[0]
    for g in prange(n):
        if not valid[g]:
            continue
        mx, my = mu[g, 0], mu[g, 1]
        ia, ib, ic = icov[g, 0], icov[g, 1], icov[g, 2]
        x0 = max(0, int(np.ceil(mx - ex[g] - 0.5)))
        x1 = min(width - 1, int(np.floor(mx + ex[g] - 0.5)))
        y0 = max(0, int(np.ceil(my - ey[g] - 0.5)))
        y1 = min(height - 1, int(np.floor(my + ey[g] - 0.5)))
        # local accumulators keep the inner loop out of memory traffic
        zero = mu[g, 0] * 0
        amx = zero
        amy = zero
        aa = zero
        ab = zero
        ac = zero
        acol = np.zeros(channels, dtype=color.dtype)
        for y in range(y0, y1 + 1):
            dy = y + 0.5 - my
            for x in range(x0, x1 + 1):
                dx = x + 0.5 - mx
                s = 0.5 * (ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy)
                if s >= 0.0 and s <= sigma_cut:
                    e = np.exp(-s)
                    w = zero
                    for ch in range(channels):
                        di = d_image[y, x, ch]
                        acol[ch] += di * e
                        w += di * color[g, ch]
                    w *= e
                    qx = ia * dx + ib * dy
                    qy = ib * dx + ic * dy
                    amx += w * qx
                    amy += w * qy
                    aa += 0.5 * w * qx * qx
                    ab += w * qx * qy
                    ac += 0.5 * w * qy * qy
        d_mu[g, 0] = amx
        d_mu[g, 1] = amy
        d_cov[g, 0] = aa
        d_cov[g, 1] = ab
        d_cov[g, 2] = ac
        for ch in range(channels):
            d_color[g, ch] = acol[ch]


def _prep(cloud: GaussianCloud, cfg):
    dtype = cloud.mu.dtype
    valid = np.ascontiguousarray(is_positive_definite(cloud.cov, cfg.eps_psd))
    icov = np.zeros_like(np.asarray(cloud.cov))
    if np.any(valid):
        icov[valid], _ = invert_cov(np.asarray(cloud.cov)[valid])
    ex, ey = _bounding_extents(np.asarray(cloud.cov, dtype=np.float64), cfg.sigma_cut)
    mu = np.ascontiguousarray(cloud.mu, dtype=dtype)
    icov = np.ascontiguousarray(icov, dtype=dtype)
    color = np.ascontiguousarray(cloud.color, dtype=dtype)
    return mu, icov, color, valid, ex, ey


def render(cloud: GaussianCloud, width: int, height: int, cfg=None) -> np.ndarray:
    """Filtered accumulated summation: C_i = sum over kept Gaussians of
    color * exp(-sigma), tile by tile.  Output is not clamped."""
    from .optim import FitConfig

    cfg = cfg or FitConfig()
    mu, icov, color, valid, ex, ey = _prep(cloud, cfg)
    out = np.zeros((height, width, cloud.channels), dtype=cloud.mu.dtype)
    if cloud.n == 0:
        return out
    grid = bin_gaussians(cloud, width, height, cfg.tile_size, cfg.sigma_cut, cfg.eps_psd)
    _forward_kernel(mu, icov, color, out, grid.bin_start, grid.bin_idx,
                    ex, ey, grid.tile_size, grid.tiles_x, grid.tiles_y,
                    float(cfg.sigma_cut))
    return out


def naive_render(cloud: GaussianCloud, width: int, height: int, cfg=None) -> np.ndarray:
    """Per-pixel all-Gaussians oracle: no tiling, no cutoff, only the
    per-pixel sigma >= 0 filter.  Keeps indefinite covariances alive where
    their quadratic form is nonnegative."""
    from .optim import FitConfig
    from .core import cov_det

    cfg = cfg or FitConfig()
    out = np.zeros((height, width, cloud.channels), dtype=np.float64)
    if cloud.n == 0:
        return out.astype(cloud.mu.dtype)
    ys, xs = np.mgrid[0:height, 0:width]
    px = xs + 0.5
    py = ys + 0.5
    det = cov_det(np.asarray(cloud.cov, dtype=np.float64))
    for g in range(cloud.n):
        if abs(det[g]) < 1e-12:
            continue
        a, b, c = np.asarray(cloud.cov[g], dtype=np.float64)
        ia, ib, ic = c / det[g], -b / det[g], a / det[g]
        dx = px - float(cloud.mu[g, 0])
        dy = py - float(cloud.mu[g, 1])
        s = 0.5 * (ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy)
        w = np.where(s >= 0.0, np.exp(-np.minimum(s, 700.0)), 0.0)
        out += w[:, :, None] * np.asarray(cloud.color[g], dtype=np.float64)
    return out.astype(cloud.mu.dtype)


def render_backward(cloud: GaussianCloud, cfg, d_image: np.ndarray) -> ParamGrads:
    """Analytic gradients of sum(d_image * render(cloud)) w.r.t. mu, cov, color.

    Visits exactly the (Gaussian, pixel) pairs the paired forward pass kept;
    PD-filtered Gaussians get exactly-zero rows.
    """
    d_image = np.asarray(d_image)
    if d_image.ndim != 3 or d_image.shape[2] != cloud.channels:
        raise ValueError(
            f"d_image shape {d_image.shape} does not match cloud with "
            f"{cloud.channels} channels"
        )
    mu, icov, color, valid, ex, ey = _prep(cloud, cfg)
    dtype = cloud.mu.dtype
    d_mu = np.zeros((cloud.n, 2), dtype=dtype)
    d_cov = np.zeros((cloud.n, 3), dtype=dtype)
    d_color = np.zeros((cloud.n, cloud.channels), dtype=dtype)
    if cloud.n:
        _backward_kernel(mu, icov, color, valid,
                         np.ascontiguousarray(d_image, dtype=dtype),
                         d_mu, d_cov, d_color, ex, ey, float(cfg.sigma_cut))
    return ParamGrads(d_mu, d_cov, d_color)


def benchmark_render(obj, repeats: int = 9, width: int | None = None,
                     height: int | None = None, cfg=None) -> float:
    """Median full renders per second over `repeats` timed runs (one untimed
    warm-up).  `obj` is a GaussianCloud (width/height required) or a LogModel
    (timed as its full reconstruction)."""
    if repeats < 3:
        raise ValueError("repeats must be >= 3")
    from .pipeline import LogModel, reconstruct

    if isinstance(obj, LogModel):
        def run():
            reconstruct(obj, cfg)
    else:
        if width is None or height is None:
            raise ValueError("width and height are required for a bare cloud")

        def run():
            render(obj, width, height, cfg)

    run()  # warm-up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    return 1.0 / float(np.median(times))
