"""MSE loss, Adam over cloud parameters, and the single-level fit loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GaussianCloud, repair_covariance
from .imageops import bilinear_sample
from .raster import render, render_backward


class NonFiniteGradientError(RuntimeError):
    """A gradient entry went non-finite; the step is aborted."""


class NonFiniteLossError(RuntimeError):
    """The training loss went non-finite at some iteration."""


@dataclass
class FitConfig:
    iters: int = 30000
    lr: float = 0.018
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    sigma_cut: float = 9.21
    eps_psd: float = 1e-4
    tile_size: int = 16
    seed: int = 0
    init_sigma_scale: float = 1.0

    def __post_init__(self):
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


@dataclass
class AdamState:
    """First/second moments per parameter group, plus the shared step counter."""

    m_mu: np.ndarray
    v_mu: np.ndarray
    m_cov: np.ndarray
    v_cov: np.ndarray
    m_color: np.ndarray
    v_color: np.ndarray
    t: int = 0

    @staticmethod
    def for_cloud(cloud: GaussianCloud) -> "AdamState":
        z = lambda a: np.zeros_like(a)
        return AdamState(z(cloud.mu), z(cloud.mu), z(cloud.cov), z(cloud.cov),
                         z(cloud.color), z(cloud.color))


def mse_loss(rendered: np.ndarray, target: np.ndarray):
    """Mean squared error over all samples and its gradient w.r.t. `rendered`."""
    if rendered.shape != target.shape:
        raise ValueError(f"shape mismatch: {rendered.shape} vs {target.shape}")
    diff = rendered - target
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    d_image = (2.0 / diff.size) * diff
    return loss, d_image


def adam_update(param: np.ndarray, grad: np.ndarray, m: np.ndarray,
                v: np.ndarray, t: int, cfg: FitConfig) -> None:
    """One bias-corrected Adam update, in place.  t is the post-increment step."""
    one = param.dtype.type(1.0)
    b1 = param.dtype.type(cfg.beta1)
    b2 = param.dtype.type(cfg.beta2)
    m *= b1
    m += (one - b1) * grad
    v *= b2
    v += (one - b2) * grad * grad
    m_hat = m / (one - b1 ** t)
    v_hat = v / (one - b2 ** t)
    param -= param.dtype.type(cfg.lr) * m_hat / (np.sqrt(v_hat) + param.dtype.type(cfg.adam_eps))


def adam_step(cloud: GaussianCloud, grads, state: AdamState, cfg: FitConfig) -> None:
    """Apply one Adam step to all three parameter groups with the shared lr.

    Aborts (no state or parameter mutation) if any gradient entry is
    non-finite, naming the offending group.
    """
    for name, g in (("mu", grads.d_mu), ("cov", grads.d_cov), ("color", grads.d_color)):
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient in parameter group '{name}'")
    state.t += 1
    adam_update(cloud.mu, grads.d_mu, state.m_mu, state.v_mu, state.t, cfg)
    adam_update(cloud.cov, grads.d_cov, state.m_cov, state.v_cov, state.t, cfg)
    adam_update(cloud.color, grads.d_color, state.m_color, state.v_color, state.t, cfg)


def init_cloud(n: int, target: np.ndarray, seed: int, cfg: FitConfig,
               dtype=np.float32, zero_color: bool = False) -> GaussianCloud:
    """Seeded initialization: uniform positions, isotropic covariance sized to
    the expected per-point footprint, colors from the target sample scaled down
    by the expected local overlap count."""
    if n < 1:
        raise ValueError("n must be >= 1")
    h, w, c = target.shape
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.0, 1.0, size=(n, 2))
    mu[:, 0] *= w
    mu[:, 1] *= h
    s = cfg.init_sigma_scale * np.sqrt(w * h / n)
    cov = np.zeros((n, 3))
    cov[:, 0] = s * s
    cov[:, 2] = s * s
    if zero_color:
        color = np.zeros((n, c))
    else:
        k0 = max(np.pi * (2.0 * cfg.sigma_cut) * s * s * n / (w * h), 1.0)
        color = bilinear_sample(target, mu[:, 0], mu[:, 1]) / k0
    return GaussianCloud(mu.astype(dtype), cov.astype(dtype), color.astype(dtype))


def fit_level(target: np.ndarray, n: int, cfg: FitConfig,
              init: GaussianCloud | None = None, dtype=np.float32):
    """Fit one Gaussian cloud to `target` by full-image gradient descent.

    Each iteration renders, takes the MSE gradient, backpropagates through the
    rasterizer, applies Adam, then repairs every covariance back to strict
    positive definiteness.  Returns (cloud, per-iteration loss array).
    """
    if not np.all(np.isfinite(target)):
        raise ValueError("target contains non-finite samples")
    h, w, _ = target.shape
    cloud = init if init is not None else init_cloud(n, target, cfg.seed, cfg, dtype=dtype)
    target = np.ascontiguousarray(target, dtype=cloud.mu.dtype)
    state = AdamState.for_cloud(cloud)
    history = np.empty(cfg.iters, dtype=np.float64)
    for it in range(cfg.iters):
        rendered = render(cloud, w, h, cfg)
        loss, d_image = mse_loss(rendered, target)
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"loss became non-finite at iteration {it}")
        history[it] = loss
        grads = render_backward(cloud, cfg, d_image)
        adam_step(cloud, grads, state, cfg)
        cloud.cov[:] = repair_covariance(cloud.cov, cfg.eps_psd)
    return cloud, history
