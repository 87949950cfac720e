"""Pixel buffers, raster I/O and per-channel dynamic-range normalization.

Images are plain ``float64`` numpy arrays of shape ``(H, W, C)`` with
``C`` in ``{1, 3}``.  Functions here never modify their inputs.  The
reductions in :func:`channel_stats` and :func:`normalize` act over the two
spatial axes only, so they also accept a stack of images with extra leading
axes ``(..., H, W, C)``; the optimizer's grid oracle relies on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

#: channels whose max - min falls below this are treated as constant
EPS_RANGE = 1e-6

_SPATIAL = (-3, -2)


class ImageFormatError(ValueError):
    """Raised when a raster file cannot be represented as an 8-bit image."""


def as_image(data) -> np.ndarray:
    """Coerce array-like data to an ``(H, W, C)`` float64 image.

    2-D input becomes a single-channel image.  Non-finite values and channel
    counts other than 1 or 3 are rejected.
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3:
        raise ValueError(f"image must be 2-D or 3-D, got shape {img.shape}")
    if img.shape[2] not in (1, 3):
        raise ValueError(f"image must have 1 or 3 channels, got {img.shape[2]}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError("image must be non-empty")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite intensities")
    return img


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if np.shape(a)[-3:] != np.shape(b)[-3:]:
        raise ValueError(
            f"dimension mismatch: {np.shape(a)[-3:]} vs {np.shape(b)[-3:]}"
        )


def load_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB raster (PNG, PGM, PPM) into [0, 1]."""
    path = Path(path)
    try:
        with PILImage.open(path) as pil:
            pil.load()
            mode = pil.mode
            if mode == "P":
                if "transparency" in pil.info:
                    raise ImageFormatError(f"{path}: alpha channel unsupported")
                pil = pil.convert("RGB")
                mode = "RGB"
            if mode in ("RGBA", "LA", "PA", "La", "RGBa"):
                raise ImageFormatError(f"{path}: alpha channel unsupported")
            if mode not in ("L", "RGB"):
                raise ImageFormatError(
                    f"{path}: unsupported bit depth or channel layout (mode {mode!r});"
                    " expected 8-bit grayscale or RGB"
                )
            raw = np.array(pil, dtype=np.uint8)
    except ImageFormatError:
        raise
    except OSError as exc:
        raise OSError(f"cannot read image {path}: {exc}") from exc
    return as_image(raw.astype(np.float64) / 255.0)


def to_bytes(img: np.ndarray) -> np.ndarray:
    """Quantize intensities to uint8 as ``round(clamp(v, 0, 1) * 255)``."""
    # half rounds up (np.rint would round half to even)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path) -> None:
    """Write an 8-bit file; the format follows the path suffix."""
    img = as_image(img)
    data = to_bytes(img)
    if data.shape[2] == 1:
        pil = PILImage.fromarray(data[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(data, mode="RGB")
    try:
        pil.save(Path(path))
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot write image {path}: {exc}") from exc


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel extrema; ``minimum`` and ``maximum`` have shape ``(..., C)``."""

    minimum: np.ndarray
    maximum: np.ndarray

    @property
    def span(self) -> np.ndarray:
        return self.maximum - self.minimum


def channel_stats(img: np.ndarray) -> ChannelStats:
    img = np.asarray(img, dtype=np.float64)
    return ChannelStats(img.min(axis=_SPATIAL), img.max(axis=_SPATIAL))


def normalize(img: np.ndarray) -> np.ndarray:
    """Stretch each channel to span exactly [0, 1].

    Constant channels (span below ``EPS_RANGE``) map to all zeros.
    """
    img = np.asarray(img, dtype=np.float64)
    stats = channel_stats(img)
    lo = stats.minimum[..., None, None, :]
    span = stats.span[..., None, None, :]
    degenerate = span < EPS_RANGE
    out = (img - lo) / np.where(degenerate, 1.0, span)
    return np.where(degenerate, 0.0, out)
