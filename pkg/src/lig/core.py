"""Per-Gaussian math: quadratic forms, covariance checks, inversion and repair.

A 2x2 symmetric covariance is stored as the triple (a, b, c) for the matrix
[[a, b], [b, c]].  All functions accept either a single triple of shape (3,)
or a batch of shape (n, 3) and broadcast accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_PSD_DEFAULT = 1e-4
EPS_DET_DEFAULT = 1e-8


class DegenerateCovarianceError(ValueError):
    """Covariance determinant too small to invert safely."""


@dataclass
class GaussianCloud:
    """Structure-of-arrays cloud of 2D Gaussians.

    mu:    (n, 2) centers, pixel units, in the render frame of its level.
    cov:   (n, 3) symmetric covariance triples (a, b, c).
    color: (n, C) weighted colors; unbounded sign and magnitude (opacity is
           folded in, there is no separate opacity field).
    """

    mu: np.ndarray
    cov: np.ndarray
    color: np.ndarray

    def __post_init__(self):
        self.mu = np.atleast_2d(np.asarray(self.mu))
        self.cov = np.atleast_2d(np.asarray(self.cov))
        self.color = np.atleast_2d(np.asarray(self.color))
        n = self.mu.shape[0]
        if self.mu.shape != (n, 2):
            raise ValueError(f"mu must have shape (n, 2), got {self.mu.shape}")
        if self.cov.shape != (n, 3):
            raise ValueError(f"cov must have shape (n, 3), got {self.cov.shape}")
        if self.color.shape[0] != n:
            raise ValueError("color length does not match mu/cov")

    @property
    def n(self) -> int:
        return self.mu.shape[0]

    @property
    def channels(self) -> int:
        return self.color.shape[1]

    def astype(self, dtype) -> "GaussianCloud":
        return GaussianCloud(
            self.mu.astype(dtype), self.cov.astype(dtype), self.color.astype(dtype)
        )

    @staticmethod
    def empty(channels: int, dtype=np.float32) -> "GaussianCloud":
        return GaussianCloud(
            np.zeros((0, 2), dtype), np.zeros((0, 3), dtype), np.zeros((0, channels), dtype)
        )


def cov_det(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov)
    return cov[..., 0] * cov[..., 2] - cov[..., 1] ** 2


def is_positive_definite(cov: np.ndarray, eps: float = EPS_PSD_DEFAULT):
    """Sylvester criterion for the 2x2 symmetric triple: a >= eps and det >= eps."""
    cov = np.asarray(cov)
    return (cov[..., 0] >= eps) & (cov_det(cov) >= eps)


def invert_cov(cov: np.ndarray, eps_det: float = EPS_DET_DEFAULT):
    """Closed-form inverse of the symmetric 2x2.  Returns (inverse triple, det).

    Raises DegenerateCovarianceError when any |det| < eps_det.
    """
    cov = np.asarray(cov)
    if cov.dtype.kind != "f":
        cov = cov.astype(np.float64)
    det = cov_det(cov)
    if np.any(np.abs(det) < eps_det):
        raise DegenerateCovarianceError(
            f"covariance determinant below {eps_det}: min |det| = {np.min(np.abs(det))}"
        )
    inv = np.empty_like(cov)
    inv[..., 0] = cov[..., 2] / det
    inv[..., 1] = -cov[..., 1] / det
    inv[..., 2] = cov[..., 0] / det
    return inv, det


def sigma(mu: np.ndarray, cov: np.ndarray, p: np.ndarray,
          eps_det: float = EPS_DET_DEFAULT):
    """Quadratic form 0.5 * d^T Sigma^-1 d with d = p - mu.

    May be negative when the covariance is indefinite; callers filter.
    """
    inv, _ = invert_cov(cov, eps_det)
    d = np.asarray(p, dtype=float) - np.asarray(mu, dtype=float)
    dx, dy = d[..., 0], d[..., 1]
    return 0.5 * (inv[..., 0] * dx * dx + 2.0 * inv[..., 1] * dx * dy
                  + inv[..., 2] * dy * dy)


def repair_covariance(cov: np.ndarray, eps_psd: float = EPS_PSD_DEFAULT) -> np.ndarray:
    """Project a covariance triple back to the strictly-PD region.

    a and c are floored at eps_psd; |b| is capped at (1 - eps_psd) * sqrt(a*c).
    Idempotent, and the identity on triples already satisfying the bounds.
    """
    cov = np.asarray(cov)
    out = np.empty_like(cov)
    a = np.maximum(cov[..., 0], eps_psd)
    c = np.maximum(cov[..., 2], eps_psd)
    b_cap = (1.0 - eps_psd) * np.sqrt(a * c)
    out[..., 0] = a
    out[..., 1] = np.sign(cov[..., 1]) * np.minimum(np.abs(cov[..., 1]), b_cap)
    out[..., 2] = c
    return out


def repair_cloud(cloud: GaussianCloud, eps_psd: float = EPS_PSD_DEFAULT) -> None:
    """In-place covariance repair of every Gaussian in the cloud."""
    cloud.cov[:] = repair_covariance(cloud.cov, eps_psd)
