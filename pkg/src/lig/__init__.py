"""Images as clouds of 2D Gaussians.

A differentiable CPU splatting engine that fits an image as a set of 2D
Gaussian points (position, symmetric covariance, weighted color) via Adam,
plus a two-level coarse/residual pipeline for large targets.
"""

__version__ = "0.1.0"

from .core import (DegenerateCovarianceError, GaussianCloud, invert_cov,
                   is_positive_definite, repair_covariance, sigma)
from .imageio import ImageFormatError, load_image, save_image
from .imageops import downsample, psnr, upsample
from .modelio import ModelFormatError, load_model, save_model
from .optim import (AdamState, FitConfig, NonFiniteGradientError,
                    NonFiniteLossError, adam_step, fit_level, init_cloud,
                    mse_loss)
from .pipeline import (Level, LogConfig, LogModel, allocate_points, fit_log,
                       fit_single_level, normalize_residual, reconstruct)
from .raster import (ParamGrads, TileGrid, benchmark_render, bin_gaussians,
                     naive_render, render, render_backward)

__all__ = [
    "AdamState", "DegenerateCovarianceError", "FitConfig", "GaussianCloud",
    "ImageFormatError", "Level", "LogConfig", "LogModel", "ModelFormatError",
    "NonFiniteGradientError", "NonFiniteLossError", "ParamGrads", "TileGrid",
    "adam_step", "allocate_points", "benchmark_render", "bin_gaussians",
    "downsample", "fit_level", "fit_log", "fit_single_level", "init_cloud",
    "invert_cov", "is_positive_definite", "load_image", "load_model",
    "mse_loss", "naive_render", "normalize_residual", "psnr",
    "reconstruct", "render", "render_backward", "repair_covariance",
    "save_image", "save_model", "sigma", "upsample",
]
