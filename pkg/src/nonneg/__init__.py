"""Non-negative image synthesis: re-target a proposal so it can be shown by only adding light."""

from .device_model import (
    EPS_GAIN,
    DeviceParams,
    Theta,
    affine_target,
    compose_output,
    heuristic_baseline,
    residual,
)
from .image_core import (
    EPS_RANGE,
    ChannelStats,
    ImageFormatError,
    as_image,
    channel_stats,
    load_image,
    normalize,
    save_image,
)
from .losses import (
    LossBreakdown,
    LossVariant,
    ViolationStats,
    n_psnr,
    objective,
    perceptual_loss,
    soft_constraint_loss,
    violation_stats,
)
from .optimizer import (
    GridSpec,
    OptimConfig,
    RunResult,
    Variant,
    alpha_sweep,
    grid_oracle,
    loss_gradient,
    optimize,
    run,
    run_heuristic,
)

__version__ = "0.1.0"
