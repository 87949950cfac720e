"""Synthetic scene/proposal pairs shared by the demo scripts."""

import numpy as np


def bright_scene(size=64, seed=0):
    """A daylight-like input: bright, smoothly shaded, with a few objects."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    base = 0.65 + 0.25 * xx
    for _ in range(4):
        cy, cx, r = rng.uniform(0.2, 0.8, 2).tolist() + [rng.uniform(0.08, 0.2)]
        base = np.where((yy - cy) ** 2 + (xx - cx) ** 2 < r * r, base - 0.2, base)
    rgb = np.stack([base, base * 0.95, base * 0.9], axis=-1)
    return np.clip(rgb + rng.normal(scale=0.02, size=rgb.shape), 0, 1)


def night_proposal(scene, seed=1):
    """A dark re-rendering of ``scene`` standing in for a translation model's output."""
    rng = np.random.default_rng(seed)
    dark = 0.3 * scene ** 2 * np.array([0.7, 0.8, 1.0])
    return np.clip(dark + rng.normal(scale=0.01, size=scene.shape), 0, 1)
