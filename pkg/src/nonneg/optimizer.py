"""Adam minimization of the realizable-output objective over affine parameters.

The default search space is the two-scalar affine family ``theta1 * y +
theta2`` started from the identity.  ``per_channel_affine`` gives every
channel its own pair and ``per_pixel`` optimizes the whole target image.
A brute-force grid evaluator serves as an independent check of the
optimizer and as a loss-landscape exporter.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .device_model import (
    EPS_GAIN,
    DeviceParams,
    Theta,
    affine_target,
    compose_output,
    residual,
)
from .image_core import EPS_RANGE, as_image, check_same_shape, normalize
from .losses import (
    LossBreakdown,
    LossVariant,
    ViolationStats,
    breakdown_from_target,
    n_psnr,
    violation_stats,
)

#: trailing window (in iterations) for the plateau test
CONVERGENCE_WINDOW = 10


class Variant(str, Enum):
    AFFINE = "affine"
    PER_CHANNEL_AFFINE = "per_channel_affine"
    PER_PIXEL = "per_pixel"
    HEURISTIC = "heuristic"
    NO_NORM = "no_norm"
    NO_CONST = "no_const"
    NO_SIM = "no_sim"

    @property
    def loss_variant(self) -> LossVariant:
        if self.value in ("no_norm", "no_const", "no_sim"):
            return LossVariant(self.value)
        return LossVariant.FULL


@dataclass(frozen=True)
class OptimConfig:
    learning_rate: float = 0.05
    max_iters: int = 500
    rel_tol: float = 1e-6
    gamma: float = 1.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    variant: Variant = Variant.AFFINE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if self.rel_tol < 0 or self.gamma < 0:
            raise ValueError("rel_tol and gamma must be non-negative")


@dataclass(frozen=True)
class Metrics:
    n_psnr: float
    violations: ViolationStats


@dataclass
class RunResult:
    """Outcome of one run.  ``theta_final`` is the full target image for ``per_pixel``."""

    theta_final: Theta | np.ndarray
    output: np.ndarray
    target: np.ndarray
    loss_trace: list[LossBreakdown]
    iterations_run: int
    converged: bool
    metrics: Metrics
    runtime_ms: float = 0.0

    @property
    def final_loss(self) -> LossBreakdown:
        """Loss of the returned (best) iterate."""
        return min(self.loss_trace, key=lambda b: b.total)


class Adam:
    """Plain Adam on a single flat parameter vector."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


# -- gradients ---------------------------------------------------------------


def _normalize_backward(out: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Pull ``dL/dN(out)`` back to ``dL/dout`` with frozen extrema locations.

    Within each channel ``N_k = (o_k - o_a) / (o_b - o_a)`` where ``a``/``b``
    are the first flat indices of the minimum/maximum.  Constant channels
    have zero gradient.
    """
    h, w, c = out.shape
    grad = np.zeros_like(out)
    for ch in range(c):
        o = out[:, :, ch].ravel()
        g = upstream[:, :, ch].ravel()
        a, b = int(np.argmin(o)), int(np.argmax(o))
        span = o[b] - o[a]
        if span < EPS_RANGE:
            continue
        n = (o - o[a]) / span
        gc = g / span
        gc[a] += np.sum(g * (n - 1.0)) / span
        gc[b] -= np.sum(g * n) / span
        grad[:, :, ch] = gc.reshape(h, w)
    return grad


def residual_gradient(
    x: np.ndarray,
    y: np.ndarray,
    target: np.ndarray,
    device: DeviceParams,
    gamma: float,
    variant: LossVariant | str = LossVariant.FULL,
) -> np.ndarray:
    """Subgradient of the objective with respect to the residual ``target - alpha x``.

    Clamp passes gradient only strictly inside ``(0, beta)``; the penalty
    ``|clamp(r) - r|`` has slope 0 at the band edges.
    """
    variant = LossVariant(variant)
    r = residual(x, target, device)
    n = r.size
    grad = np.zeros_like(r)
    if variant is not LossVariant.NO_SIM:
        out = compose_output(x, target, device)
        if variant is LossVariant.NO_NORM:
            d_out = 2.0 * (out - y) / n
        else:
            d_out = _normalize_backward(out, 2.0 * (normalize(out) - normalize(y)) / n)
        inside = (r > 0.0) & (r < device.beta)
        grad += np.where(inside, d_out, 0.0)
    if variant is not LossVariant.NO_CONST:
        grad += (gamma / n) * ((r > device.beta).astype(np.float64) - (r < 0.0))
    return grad


def loss_gradient(
    x: np.ndarray,
    y: np.ndarray,
    theta: Theta,
    device: DeviceParams,
    config: OptimConfig,
) -> np.ndarray:
    """Analytic subgradient with respect to ``theta.as_vector()``."""
    x, y = as_image(x), as_image(y)
    check_same_shape(x, y)
    d_r = residual_gradient(
        x, y, affine_target(y, theta), device, config.gamma, config.variant.loss_variant
    )
    if theta.per_channel:
        return np.concatenate([np.sum(d_r * y, axis=(0, 1)), np.sum(d_r, axis=(0, 1))])
    return np.array([np.sum(d_r * y), np.sum(d_r)])


# -- optimization ------------------------------------------------------------


def _finish(x, y, device, theta_final, target, trace, iterations, converged, started):
    out = compose_output(x, target, device)
    metrics = Metrics(
        n_psnr=n_psnr(out, y),
        violations=violation_stats(residual(x, target, device), 0.0, device.beta),
    )
    return RunResult(
        theta_final=theta_final,
        output=out,
        target=target,
        loss_trace=trace,
        iterations_run=iterations,
        converged=converged,
        metrics=metrics,
        runtime_ms=(time.perf_counter() - started) * 1e3,
    )


def _plateaued(trace: list[LossBreakdown], rel_tol: float) -> bool:
    if len(trace) <= CONVERGENCE_WINDOW:
        return False
    old = trace[-1 - CONVERGENCE_WINDOW].total
    return abs(trace[-1].total - old) <= rel_tol * abs(old)


def optimize(x: np.ndarray, y: np.ndarray, device: DeviceParams, config: OptimConfig = OptimConfig()) -> RunResult:
    """Run Adam from the identity transform and return the best iterate seen.

    Stops when the total loss changes by at most ``rel_tol`` (relative) over
    the last ``CONVERGENCE_WINDOW`` iterations, or after ``max_iters``
    updates.  Raises ``FloatingPointError`` on a non-finite loss.
    """
    if config.variant is Variant.HEURISTIC:
        raise ValueError("heuristic variant has no optimization; use run_heuristic")
    started = time.perf_counter()
    x, y = as_image(x), as_image(y)
    check_same_shape(x, y)
    loss_variant = config.variant.loss_variant
    per_pixel = config.variant is Variant.PER_PIXEL
    per_channel = config.variant is Variant.PER_CHANNEL_AFFINE

    if per_pixel:
        params = y.ravel().copy()
    else:
        params = Theta.identity(y.shape[2] if per_channel else None).as_vector()

    def unpack(p):
        if per_pixel:
            return p.reshape(y.shape), p.reshape(y.shape).copy()
        theta = Theta.from_vector(p, per_channel)
        return theta, affine_target(y, theta)

    adam = Adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
    trace: list[LossBreakdown] = []
    best_total, best_params = math.inf, params
    converged = False
    steps = 0
    for it in range(config.max_iters + 1):
        _, target = unpack(params)
        sim, constr = breakdown_from_target(x, y, target, device, config.gamma, loss_variant)
        loss = LossBreakdown(float(sim), float(constr))
        if not math.isfinite(loss.total):
            raise FloatingPointError(
                f"non-finite loss at iteration {it}; learning rate {config.learning_rate} diverged"
            )
        trace.append(loss)
        if loss.total < best_total:
            best_total, best_params = loss.total, params
        if _plateaued(trace, config.rel_tol):
            converged = True
            break
        if it == config.max_iters:
            break
        d_r = residual_gradient(x, y, target, device, config.gamma, loss_variant)
        if per_pixel:
            grad = d_r.ravel()
        elif per_channel:
            grad = np.concatenate([np.sum(d_r * y, axis=(0, 1)), np.sum(d_r, axis=(0, 1))])
        else:
            grad = np.array([np.sum(d_r * y), np.sum(d_r)])
        params = adam.step(params, grad)
        if not per_pixel:
            gains = params[: params.size // 2]
            params[: params.size // 2] = np.maximum(gains, EPS_GAIN)
        steps += 1

    theta_final, target = unpack(best_params)
    return _finish(x, y, device, theta_final, target, trace, steps, converged, started)


def run_heuristic(x: np.ndarray, y: np.ndarray, device: DeviceParams, config: OptimConfig = OptimConfig()) -> RunResult:
    """Wrap the clipping baseline in a :class:`RunResult` (identity theta, no iterations)."""
    started = time.perf_counter()
    x, y = as_image(x), as_image(y)
    check_same_shape(x, y)
    theta = Theta.identity()
    target = affine_target(y, theta)
    sim, constr = breakdown_from_target(x, y, target, device, config.gamma, LossVariant.FULL)
    return _finish(
        x, y, device, theta, target, [LossBreakdown(float(sim), float(constr))], 0, True, started
    )


def run(x: np.ndarray, y: np.ndarray, device: DeviceParams, config: OptimConfig = OptimConfig()) -> RunResult:
    """Dispatch on ``config.variant``, including the heuristic baseline."""
    if config.variant is Variant.HEURISTIC:
        return run_heuristic(x, y, device, config)
    return optimize(x, y, device, config)


# -- grid oracle -------------------------------------------------------------


def grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid ``lo, lo + step, ..., hi`` rounded to 10 decimals."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty grid range [{lo}, {hi}]")
    return np.round(lo + step * np.arange(count), 10)


@dataclass(frozen=True)
class GridSpec:
    theta1_min: float = 0.10
    theta1_max: float = 2.00
    theta1_step: float = 0.01
    theta2_min: float = -1.00
    theta2_max: float = 1.00
    theta2_step: float = 0.01

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        t1 = grid_axis(self.theta1_min, self.theta1_max, self.theta1_step)
        if t1[0] < EPS_GAIN:
            raise ValueError(f"theta1 grid must start at or above {EPS_GAIN}")
        return t1, grid_axis(self.theta2_min, self.theta2_max, self.theta2_step)


@dataclass
class LossSurface:
    """Objective terms on a ``(len(theta1), len(theta2))`` grid."""

    theta1: np.ndarray
    theta2: np.ndarray
    sim: np.ndarray
    constr: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.sim + self.constr

    def rows(self):
        total = self.total
        for i, t1 in enumerate(self.theta1):
            for j, t2 in enumerate(self.theta2):
                yield float(t1), float(t2), float(self.sim[i, j]), float(self.constr[i, j]), float(total[i, j])

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theta1", "theta2", "sim", "constr", "total"])
            for row in self.rows():
                writer.writerow([repr(v) for v in row])


@dataclass
class GridResult:
    theta: Theta
    loss: float
    breakdown: LossBreakdown
    surface: LossSurface = field(repr=False)

    def __iter__(self):
        # unpacks as (theta, min_loss)
        return iter((self.theta, self.loss))


def grid_oracle(
    x: np.ndarray,
    y: np.ndarray,
    device: DeviceParams,
    gamma: float = 1.0,
    grid_spec: GridSpec = GridSpec(),
    variant: LossVariant | str = LossVariant.FULL,
    chunk: int = 2048,
) -> GridResult:
    """Exhaustively evaluate the objective over a theta grid.

    Ties go to the first grid point in theta1-major order.
    """
    x, y = as_image(x), as_image(y)
    check_same_shape(x, y)
    t1, t2 = grid_spec.axes()
    g1, g2 = np.meshgrid(t1, t2, indexing="ij")
    flat1, flat2 = g1.ravel(), g2.ravel()
    sim = np.empty(flat1.size)
    constr = np.empty(flat1.size)
    for start in range(0, flat1.size, chunk):
        sl = slice(start, start + chunk)
        targets = flat1[sl, None, None, None] * y + flat2[sl, None, None, None]
        s, c = breakdown_from_target(x, y, targets, device, gamma, variant)
        sim[sl] = s
        constr[sl] = c
    surface = LossSurface(t1, t2, sim.reshape(g1.shape), constr.reshape(g1.shape))
    total = sim + constr
    k = int(np.argmin(total))
    theta = Theta(flat1[k], flat2[k])
    return GridResult(theta, float(total[k]), LossBreakdown(float(sim[k]), float(constr[k])), surface)


# -- alpha sweep -------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    method: str
    theta: Theta | None
    n_psnr: float
    violations: ViolationStats
    final_loss: LossBreakdown


def alpha_sweep(
    x: np.ndarray,
    y: np.ndarray,
    alphas: Sequence[float],
    config: OptimConfig = OptimConfig(),
) -> list[SweepPoint]:
    """Run the optimizer and the heuristic at each alpha with ``beta = 1 - alpha``.

    Points come back sorted by ``(alpha, method)``.
    """
    method = config.variant
    if method is Variant.HEURISTIC:
        method = Variant.AFFINE
        config = OptimConfig(**{**config.__dict__, "variant": method})
    points = []
    for alpha in sorted(float(a) for a in alphas):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha {alpha} outside [0, 1]")
        device = DeviceParams(alpha)
        for name, result in (
            (method.value, optimize(x, y, device, config)),
            (Variant.HEURISTIC.value, run_heuristic(x, y, device, config)),
        ):
            theta = result.theta_final if isinstance(result.theta_final, Theta) else None
            points.append(
                SweepPoint(alpha, name, theta, result.metrics.n_psnr, result.metrics.violations, result.final_loss)
            )
    points.sort(key=lambda p: (p.alpha, p.method))
    return points
