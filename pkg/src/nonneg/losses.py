"""Perceptual similarity, soft constraint penalty, combined objective, metrics.

Every term is a per-entry *mean* over the pixel-channel entries of an
image, so ``gamma`` and learning rates do not depend on resolution.  The
reductions run over the last three axes; leading axes are treated as a
batch of images (used by the grid oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .device_model import DeviceParams, Theta, affine_target, compose_output, residual
from .image_core import check_same_shape, normalize

#: PSNR reported when the normalized MSE falls below ``PSNR_MSE_FLOOR``
PSNR_CAP_DB = 99.0
PSNR_MSE_FLOOR = 1e-10

_ENTRIES = (-3, -2, -1)


class LossVariant(str, Enum):
    FULL = "full"
    NO_NORM = "no_norm"
    NO_CONST = "no_const"
    NO_SIM = "no_sim"


@dataclass(frozen=True)
class LossBreakdown:
    sim: float
    constr: float

    @property
    def total(self) -> float:
        return self.sim + self.constr


@dataclass(frozen=True)
class ViolationStats:
    """Clamp distances of a residual against its feasible band.

    ``mean_magnitude`` averages over *all* entries, feasible ones included.
    """

    fraction: float
    mean_magnitude: float
    max_magnitude: float


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def perceptual_loss(a: np.ndarray, b: np.ndarray, normalized: bool = True):
    """Mean squared difference between ``N(a)`` and ``N(b)``.

    With ``normalized=False`` the raw images are compared instead.
    """
    check_same_shape(a, b)
    if normalized:
        a, b = normalize(a), normalize(b)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return _scalar(np.mean(diff * diff, axis=_ENTRIES))


def clamp_distance(r: np.ndarray, lo: float, hi: float) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    return np.abs(np.clip(r, lo, hi) - r)


def soft_constraint_loss(r: np.ndarray, lo: float, hi: float, gamma: float = 1.0):
    """``gamma`` times the mean distance of ``r`` from ``[lo, hi]``."""
    if lo > hi:
        raise ValueError(f"empty band: lo={lo} > hi={hi}")
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    return _scalar(gamma * np.mean(clamp_distance(r, lo, hi), axis=_ENTRIES))


def breakdown_from_target(
    x: np.ndarray,
    y: np.ndarray,
    target: np.ndarray,
    device: DeviceParams,
    gamma: float = 1.0,
    variant: LossVariant | str = LossVariant.FULL,
):
    """Objective terms for an arbitrary (possibly batched) target image."""
    variant = LossVariant(variant)
    out = compose_output(x, target, device)
    if variant is LossVariant.NO_SIM:
        sim = np.zeros(np.shape(out)[:-3]) if np.ndim(out) > 3 else 0.0
    else:
        sim = perceptual_loss(out, np.broadcast_to(y, np.shape(out)), variant is not LossVariant.NO_NORM)
    if variant is LossVariant.NO_CONST:
        constr = np.zeros(np.shape(out)[:-3]) if np.ndim(out) > 3 else 0.0
    else:
        constr = soft_constraint_loss(residual(x, target, device), 0.0, device.beta, gamma)
    return sim, constr


def objective(
    x: np.ndarray,
    y: np.ndarray,
    theta: Theta,
    device: DeviceParams,
    gamma: float = 1.0,
    variant: LossVariant | str = LossVariant.FULL,
) -> LossBreakdown:
    """Similarity of the realizable output to ``y`` plus the soft constraint on ``F - alpha x``."""
    check_same_shape(x, y)
    sim, constr = breakdown_from_target(x, y, affine_target(y, theta), device, gamma, variant)
    return LossBreakdown(float(sim), float(constr))


def psnr_from_mse(mse: float) -> float:
    if mse < PSNR_MSE_FLOOR:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


def n_psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB between the range-normalized images (peak 1, capped at 99)."""
    return psnr_from_mse(perceptual_loss(a, b, normalized=True))


def violation_stats(r: np.ndarray, lo: float, hi: float) -> ViolationStats:
    if lo > hi:
        raise ValueError(f"empty band: lo={lo} > hi={hi}")
    dist = clamp_distance(r, lo, hi)
    return ViolationStats(
        fraction=float(np.count_nonzero(dist) / dist.size),
        mean_magnitude=float(dist.mean()),
        max_magnitude=float(dist.max()),
    )
