"""Optical-combiner model: feasible residual band and output composition.

A see-through combiner passes ``alpha * x`` of the scene and lets the
display add at most ``beta`` of light per pixel.  A target image is
realizable only when ``target - alpha * x`` lies in ``[0, beta]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .image_core import check_same_shape

#: lower bound enforced on the contrast gain
EPS_GAIN = 1e-3


@dataclass(frozen=True)
class DeviceParams:
    """Transmittance ``alpha`` and display budget ``beta``.

    With ``beta`` omitted the optical see-through coupling ``beta = 1 - alpha``
    is used.
    """

    alpha: float
    beta: float | None = None

    def __post_init__(self):
        alpha = float(self.alpha)
        beta = 1.0 - alpha if self.beta is None else float(self.beta)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class Theta:
    """Affine gain/offset.  Per-channel thetas hold length-C vectors."""

    theta1: float | np.ndarray = 1.0
    theta2: float | np.ndarray = 0.0
    per_channel: bool = field(default=False)

    def __post_init__(self):
        if self.per_channel:
            t1 = np.atleast_1d(np.asarray(self.theta1, dtype=np.float64)).copy()
            t2 = np.atleast_1d(np.asarray(self.theta2, dtype=np.float64)).copy()
            if t1.shape != t2.shape or t1.ndim != 1:
                raise ValueError("per-channel theta1/theta2 must be equal-length vectors")
            t1.flags.writeable = False
            t2.flags.writeable = False
        else:
            t1, t2 = float(self.theta1), float(self.theta2)
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @classmethod
    def identity(cls, channels: int | None = None) -> "Theta":
        if channels is None:
            return cls(1.0, 0.0)
        return cls(np.ones(channels), np.zeros(channels), per_channel=True)

    def as_vector(self) -> np.ndarray:
        """Flat parameter vector ``[theta1..., theta2...]``."""
        return np.concatenate([np.atleast_1d(self.theta1), np.atleast_1d(self.theta2)])

    @classmethod
    def from_vector(cls, vec, per_channel: bool = False) -> "Theta":
        vec = np.asarray(vec, dtype=np.float64)
        half = vec.size // 2
        if per_channel:
            return cls(vec[:half], vec[half:], per_channel=True)
        return cls(vec[0], vec[1])

    def projected(self, min_gain: float = EPS_GAIN) -> "Theta":
        return Theta(np.maximum(self.theta1, min_gain), self.theta2, self.per_channel)


def affine_target(y: np.ndarray, theta: Theta) -> np.ndarray:
    """``theta1 * y + theta2``, unclamped."""
    y = np.asarray(y, dtype=np.float64)
    if theta.per_channel and np.size(theta.theta1) != y.shape[-1]:
        raise ValueError(
            f"per-channel theta has {np.size(theta.theta1)} entries for {y.shape[-1]} channels"
        )
    return theta.theta1 * y + theta.theta2


def residual(x: np.ndarray, target: np.ndarray, device: DeviceParams) -> np.ndarray:
    """Light the display must add: ``target - alpha * x``."""
    check_same_shape(x, target)
    return np.asarray(target, dtype=np.float64) - device.alpha * np.asarray(x, dtype=np.float64)


def compose_output(x: np.ndarray, target: np.ndarray, device: DeviceParams) -> np.ndarray:
    """Physically realizable output ``clamp(target - alpha x, 0, beta) + alpha x``."""
    r = residual(x, target, device)
    floor = device.alpha * np.asarray(x, dtype=np.float64)
    return _snap_into_band(np.clip(r, 0.0, device.beta) + floor, floor, device.beta)


def _snap_into_band(out: np.ndarray, floor: np.ndarray, beta: float) -> np.ndarray:
    # (c + floor) - floor can miss c by an ulp; step toward the band until the
    # float difference itself lies in [0, beta]
    out = np.array(out, dtype=np.float64)
    for _ in range(64):
        added = out - floor
        high = added > beta
        low = added < 0.0
        if not (high.any() or low.any()):
            break
        out[high] = np.nextafter(out[high], -np.inf)
        out[low] = np.nextafter(out[low], np.inf)
    return out


def heuristic_baseline(x: np.ndarray, y: np.ndarray, device: DeviceParams) -> np.ndarray:
    """Clip the raw difference ``y - alpha x`` into the band; no optimization."""
    return compose_output(x, affine_target(y, Theta.identity()), device)
