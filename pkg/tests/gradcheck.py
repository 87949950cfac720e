"""Central-difference reference for the objective gradient."""

import numpy as np

from nonneg.device_model import DeviceParams, Theta, affine_target, compose_output, residual
from nonneg.losses import objective


def central_difference(x, y, theta, device, gamma, variant, h=1e-5):
    vec = theta.as_vector()
    grad = np.empty_like(vec)
    for i in range(vec.size):
        step = np.zeros_like(vec)
        step[i] = h
        up = objective(x, y, Theta.from_vector(vec + step, theta.per_channel), device, gamma, variant).total
        down = objective(x, y, Theta.from_vector(vec - step, theta.per_channel), device, gamma, variant).total
        grad[i] = (up - down) / (2 * h)
    return grad


def kink_free(x, y, theta, device: DeviceParams, margin=1e-3, gap=1e-4) -> bool:
    """True when no residual entry sits near a band edge and the output extrema are unambiguous."""
    r = residual(x, affine_target(y, theta), device)
    if np.min(np.abs(r)) < margin or np.min(np.abs(r - device.beta)) < margin:
        return False
    out = compose_output(x, affine_target(y, theta), device)
    for ch in range(out.shape[2]):
        vals = np.sort(out[:, :, ch].ravel())
        if vals[1] - vals[0] < gap or vals[-1] - vals[-2] < gap or vals[-1] - vals[0] < 1e-3:
            return False
    return True


def relative_error(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12))
