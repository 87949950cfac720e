"""
Loss landscape with and without normalization
=============================================

Brute-force evaluation of the objective over a (theta1, theta2) grid.
Without normalization the best point sits on the edge of the feasible
region; with it the minimum valley moves into the feasible set.
Writes ``landscape.png`` when matplotlib is available.
"""

import numpy as np

from nonneg import DeviceParams, GridSpec, grid_oracle
from _scenes import bright_scene, night_proposal

x = bright_scene(32)
y = night_proposal(x)
device = DeviceParams(0.6)
spec = GridSpec(0.1, 2.0, 0.02, -1.0, 1.0, 0.02)

results = {v: grid_oracle(x, y, device, 1.0, spec, v) for v in ("no_norm", "full")}
for v, g in results.items():
    print(f"{v:8s} argmin theta=({g.theta.theta1:.2f}, {g.theta.theta2:.2f})  "
          f"sim={g.breakdown.sim:.4f} constr={g.breakdown.constr:.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for ax, (v, g) in zip(axes, results.items()):
        s = g.surface
        feasible = s.constr == 0
        ax.contourf(s.theta2, s.theta1, np.log10(s.total + 1e-6), levels=30)
        ax.contour(s.theta2, s.theta1, feasible.astype(float), levels=[0.5], colors="red")
        ax.plot(g.theta.theta2, g.theta.theta1, "w*", ms=12)
        ax.set_title(v)
        ax.set_xlabel("theta2")
    axes[0].set_ylabel("theta1")
    fig.savefig("landscape.png", dpi=120, bbox_inches="tight")
