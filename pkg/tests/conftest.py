import numpy as np
import pytest

import lig


def natural_image(size=256, seed=42, channels=3):
    """Deterministic 1/f^2-spectrum random image in [0,1], 8-bit quantized.

    Mimics natural-image statistics: energy concentrated at low frequencies
    with progressively weaker fine detail.
    """
    rng = np.random.default_rng(seed)
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.fftfreq(size)[None, :]
    f = np.sqrt(fx * fx + fy * fy)
    f[0, 0] = 1.0
    amp = 1.0 / f ** 2.0
    chans = []
    for _ in range(channels):
        phase = rng.uniform(0, 2 * np.pi, (size, size))
        x = np.real(np.fft.ifft2(amp * np.exp(1j * phase)))
        x = (x - x.min()) / (x.max() - x.min())
        chans.append(x)
    img = np.stack(chans, axis=-1)
    return (np.floor(img * 255 + 0.5) / 255.0).astype(np.float32)


def random_pd_cloud(rng, n, width, height, channels=3, dtype=np.float64):
    """Random cloud with comfortably positive-definite covariances."""
    a = rng.uniform(1.0, 6.0, n)
    c = rng.uniform(1.0, 6.0, n)
    b = rng.uniform(-0.8, 0.8, n) * np.sqrt(a * c)
    return lig.GaussianCloud(
        rng.uniform(0, [width, height], (n, 2)).astype(dtype),
        np.column_stack([a, b, c]).astype(dtype),
        rng.normal(0, 1.0, (n, channels)).astype(dtype),
    )


@pytest.fixture(scope="session")
def crop256():
    return natural_image(256, seed=42)
