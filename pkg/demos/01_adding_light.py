"""
Showing an image by only adding light
=====================================

An optical see-through display cannot darken the world: it passes a
fraction ``alpha`` of the scene and adds at most ``beta`` of its own light.
This script composes a dark proposal over a bright scene with the naive
clipping baseline and measures how much of the proposal survives.
"""

import numpy as np

from nonneg import DeviceParams, heuristic_baseline, n_psnr, residual, violation_stats
from _scenes import bright_scene, night_proposal

x = bright_scene()
y = night_proposal(x)

for alpha in (0.0, 0.3, 0.6, 0.9):
    device = DeviceParams(alpha)  # beta = 1 - alpha
    out = heuristic_baseline(x, y, device)
    v = violation_stats(residual(x, y, device), 0.0, device.beta)
    print(
        f"alpha={alpha:.1f}  N-PSNR={n_psnr(out, y):6.2f} dB  "
        f"infeasible entries={v.fraction:6.1%}  mean clamp={v.mean_magnitude:.3f}"
    )

# %%
# The output never drops below the attenuated scene: light is only added.
device = DeviceParams(0.6)
out = heuristic_baseline(x, y, device)
assert np.all(out - device.alpha * x >= 0) and np.all(out - device.alpha * x <= device.beta)
