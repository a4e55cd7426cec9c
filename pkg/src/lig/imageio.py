"""8-bit PNG ingestion and export."""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageFormatError(ValueError):
    """The file exists but is not an 8-bit grayscale or RGB PNG."""


def load_image(path) -> np.ndarray:
    """Load an 8-bit grayscale or RGB PNG as (H, W, C) float32 in [0, 1].

    Alpha channels, palettes, and higher bit depths are rejected; missing and
    corrupt files raise their own distinct errors.
    """
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise ImageFormatError(f"corrupt image stream in {path}: {exc}") from exc
    if img.mode in ("RGBA", "LA", "PA"):
        raise ImageFormatError(f"{path}: alpha channels are not supported")
    if img.mode not in ("L", "RGB"):
        raise ImageFormatError(
            f"{path}: unsupported mode {img.mode!r} (8-bit L or RGB required)"
        )
    data = np.asarray(img, dtype=np.float32) / 255.0
    if data.ndim == 2:
        data = data[:, :, None]
    return data


def save_image(img: np.ndarray, path) -> None:
    """Clamp to [0, 1], quantize with round-half-up, write an 8-bit PNG."""
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    q = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    if q.shape[2] == 1:
        Image.fromarray(q[:, :, 0], mode="L").save(path, format="PNG")
    elif q.shape[2] == 3:
        Image.fromarray(q, mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported channel count {q.shape[2]}")
