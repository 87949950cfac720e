"""
Sweeping the combiner transmittance
===================================

As ``alpha`` grows the display budget ``1 - alpha`` shrinks.  Both methods
are compared at every point of the sweep.
"""

from nonneg import alpha_sweep
from _scenes import bright_scene, night_proposal

x = bright_scene(32)
y = night_proposal(x)

print("alpha  method     N-PSNR   infeasible")
for p in alpha_sweep(x, y, [i / 10 for i in range(11)]):
    print(f"{p.alpha:4.1f}   {p.method:9s} {p.n_psnr:7.2f}   {p.violations.fraction:7.1%}")
