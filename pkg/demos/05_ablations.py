"""
Ablations
=========

Dropping the normalization, either loss term, or swapping the affine
family for a per-pixel target.
"""

from nonneg import DeviceParams, OptimConfig, optimize
from _scenes import bright_scene, night_proposal

x = bright_scene(32)
y = night_proposal(x)
device = DeviceParams(0.6)

for variant in ("affine", "no_norm", "no_const", "no_sim", "per_pixel"):
    res = optimize(x, y, device, OptimConfig(variant=variant))
    print(f"{variant:10s} N-PSNR {res.metrics.n_psnr:6.2f} dB  "
          f"infeasible {res.metrics.violations.fraction:6.1%}")
