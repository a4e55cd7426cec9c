"""Two-level orchestration: point allocation, residual normalization,
two-stage fitting, and reconstruction.

Level 0 (a small fraction of the point budget) fits a box-downsampled copy of
the image at low resolution.  Its upsampled render is subtracted from the
image and the residual, squashed into [0, 1] by a global min-max scaler, is
fit by level 1 at full resolution with level 0 frozen.  The two scaler bounds
are part of the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GaussianCloud
from .imageops import downsample, upsample, psnr  # noqa: F401  (psnr re-exported)
from .optim import FitConfig, fit_level
from .raster import render

DEGENERATE_SPAN = 1e-12


@dataclass
class Level:
    cloud: GaussianCloud
    width: int
    height: int


@dataclass
class LogModel:
    """A fitted image: one or two Gaussian levels plus the residual bounds."""

    full_w: int
    full_h: int
    channels: int
    levels: list[Level]
    res_min: float
    res_max: float

    def __post_init__(self):
        if not 1 <= len(self.levels) <= 2:
            raise ValueError("a model has one or two levels")
        if self.res_min > self.res_max:
            raise ValueError("res_min must not exceed res_max")


@dataclass
class LogConfig:
    total_points: int
    ratio_r: float = 0.125
    down_factor: int = 4
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.total_points < 2:
            raise ValueError("total_points must be >= 2")
        if not 0 < self.ratio_r < 1:
            raise ValueError("ratio_r must lie in (0, 1)")
        if self.down_factor < 2:
            raise ValueError("down_factor must be >= 2")


def allocate_points(total: int, r: float):
    """Split the point budget: n0 = round(r * total) for the coarse level,
    the rest for the fine level, each clamped to at least 1."""
    if total < 2:
        raise ValueError("total must be >= 2")
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    n0 = int(np.floor(r * total + 0.5))
    n0 = min(max(n0, 1), total - 1)
    return n0, total - n0


def normalize_residual(residual: np.ndarray):
    """Min-max scale into [0, 1] using two global scalars.

    A degenerate (constant) residual maps to all zeros with res_max recorded
    equal to res_min, so denormalization reproduces the constant.
    """
    if not np.all(np.isfinite(residual)):
        raise ValueError("residual contains non-finite samples")
    res_min = float(residual.min())
    res_max = float(residual.max())
    if res_max - res_min < DEGENERATE_SPAN:
        return np.zeros_like(residual), res_min, res_min
    out = (residual - res_min) / (res_max - res_min)
    return out.astype(residual.dtype), res_min, res_max


def denormalize_residual(img: np.ndarray, res_min: float, res_max: float) -> np.ndarray:
    return img * (res_max - res_min) + res_min


def fit_log(image: np.ndarray, cfg: LogConfig, return_history: bool = False):
    """Two-stage fit: coarse level on the downsampled image, then the fine
    level on the normalized residual with the coarse level frozen.  Both
    stages run the same number of iterations."""
    h, w, c = image.shape
    if w < cfg.down_factor or h < cfg.down_factor:
        raise ValueError("image dimensions must be >= down_factor")
    n0, n1 = allocate_points(cfg.total_points, cfg.ratio_r)
    t0 = downsample(image, cfg.down_factor)
    low_h, low_w, _ = t0.shape
    cloud0, hist0 = fit_level(t0, n0, cfg.fit)
    coarse = upsample(render(cloud0, low_w, low_h, cfg.fit), w, h)
    residual = image.astype(coarse.dtype) - coarse
    t1, res_min, res_max = normalize_residual(residual)
    cloud1, hist1 = fit_level(t1, n1, cfg.fit)
    model = LogModel(w, h, c,
                     [Level(cloud0, low_w, low_h), Level(cloud1, w, h)],
                     res_min, res_max)
    if return_history:
        return model, [hist0, hist1]
    return model


def fit_single_level(image: np.ndarray, cfg: LogConfig, return_history: bool = False):
    """Ablation path: the whole point budget in one level at full resolution.

    The stored bounds (0, 1) make denormalization the identity, so a
    single-level model reconstructs as a plain render.
    """
    h, w, c = image.shape
    cloud, hist = fit_level(image, cfg.total_points, cfg.fit)
    model = LogModel(w, h, c, [Level(cloud, w, h)], 0.0, 1.0)
    if return_history:
        return model, [hist]
    return model


def reconstruct(model: LogModel, cfg: FitConfig | None = None) -> np.ndarray:
    """Upsampled coarse render plus denormalized fine render; unclamped."""
    cfg = cfg or FitConfig()
    if len(model.levels) == 1:
        lvl = model.levels[0]
        out = render(lvl.cloud, lvl.width, lvl.height, cfg)
        return denormalize_residual(out, model.res_min, model.res_max)
    l0, l1 = model.levels
    coarse = upsample(render(l0.cloud, l0.width, l0.height, cfg),
                      model.full_w, model.full_h)
    fine = render(l1.cloud, model.full_w, model.full_h, cfg)
    return coarse + denormalize_residual(fine, model.res_min, model.res_max)
