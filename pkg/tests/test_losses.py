import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonneg.device_model import DeviceParams, Theta
from nonneg.losses import (
    LossBreakdown,
    n_psnr,
    objective,
    perceptual_loss,
    psnr_from_mse,
    soft_constraint_loss,
    violation_stats,
)


def img(*values):
    return np.array(values, dtype=np.float64).reshape(1, -1, 1)


def test_perceptual_examples(rng):
    a = rng.random((6, 6, 3))
    for normalized in (True, False):
        assert perceptual_loss(a, a, normalized) == 0.0
    assert perceptual_loss(0.5 * a + 0.3, a, True) == pytest.approx(0.0, abs=1e-24)
    assert perceptual_loss(img(0.0, 1.0), img(1.0, 0.0), True) == 1.0
    assert perceptual_loss(img(0.2, 0.4), img(0.0, 0.0), False) == pytest.approx(0.1, abs=1e-15)
    with pytest.raises(ValueError):
        perceptual_loss(np.zeros((2, 2, 1)), np.zeros((2, 2, 3)))


def test_soft_constraint_examples():
    r = img(-0.1, 0.5, 1.2)
    assert soft_constraint_loss(img(0.0, 0.3, 1.0), 0.0, 1.0, 1.0) == 0.0
    assert soft_constraint_loss(r, 0.0, 1.0, 1.0) == pytest.approx(0.1, abs=1e-15)
    assert soft_constraint_loss(r, 0.0, 1.0, 2.0) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ValueError):
        soft_constraint_loss(r, 1.0, 0.0, 1.0)


def test_soft_constraint_continuity_across_kinks():
    for edge in (0.0, 0.4):
        for h in (1e-3, 1e-6, 1e-9):
            lo = soft_constraint_loss(img(edge - h), 0.0, 0.4, 1.0)
            hi = soft_constraint_loss(img(edge + h), 0.0, 0.4, 1.0)
            assert abs(hi - lo) <= h * (1 + 1e-6)


def test_objective_examples(rng):
    y = rng.random((5, 5, 3))
    x = rng.random(y.shape)
    b = objective(x, y, Theta(1.0, 0.0), DeviceParams(0.0, 1.0))
    assert b == LossBreakdown(0.0, 0.0)
    d = DeviceParams(0.8)
    t = Theta(2.0, 0.3)
    assert objective(x, y, t, d, 1.0, "no_const").constr == 0.0
    assert objective(x, y, t, d, 1.0, "no_sim").sim == 0.0
    full = objective(x, y, t, d, 1.0, "full")
    assert full.total == full.sim + full.constr
    assert full.total >= objective(x, y, t, d, 1.0, "no_const").sim
    assert objective(x, y, t, d, 1.0, "no_norm").sim != full.sim


def test_n_psnr_examples(rng):
    a = rng.random((8, 8, 3))
    assert n_psnr(a, a) == 99.0
    assert n_psnr(1.7 * a - 0.4, a) == 99.0
    assert psnr_from_mse(0.01) == pytest.approx(20.0, abs=1e-12)
    assert n_psnr(img(0.0, 1.0), img(1.0, 0.0)) == 0.0


def test_n_psnr_symmetric_and_monotone(rng):
    a = rng.random((16, 16, 3))
    noise = rng.normal(size=a.shape)
    values = [n_psnr(a + s * noise, a) for s in (0.01, 0.05, 0.2)]
    assert values[0] > values[1] > values[2]
    b = a + 0.1 * noise
    assert n_psnr(a, b) == n_psnr(b, a)


def test_violation_examples():
    v = violation_stats(img(0.2), 0.0, 1.0)
    assert (v.fraction, v.mean_magnitude, v.max_magnitude) == (0.0, 0.0, 0.0)
    v = violation_stats(img(-0.1, 0.5, 1.2), 0.0, 1.0)
    assert v.fraction == pytest.approx(2 / 3)
    assert v.mean_magnitude == pytest.approx(0.1, abs=1e-15)
    assert v.max_magnitude == pytest.approx(0.2, abs=1e-15)
    v = violation_stats(img(-0.5), 0.0, 1.0)
    assert (v.fraction, v.mean_magnitude, v.max_magnitude) == (1.0, 0.5, 0.5)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds, st.floats(0.1, 3), st.floats(-1, 1), st.floats(0.1, 3), st.floats(-1, 1))
def test_perceptual_invariance_and_symmetry(seed, g1, o1, g2, o2):
    rng = np.random.default_rng(seed)
    a, b = rng.random((6, 5, 3)), rng.random((6, 5, 3))
    base = perceptual_loss(a, b)
    assert base >= 0.0
    assert perceptual_loss(b, a) == base
    assert abs(perceptual_loss(g1 * a + o1, g2 * b + o2) - base) <= 1e-9


@settings(max_examples=150, deadline=None)
@given(seeds, st.floats(0, 5))
def test_soft_constraint_properties(seed, gamma):
    rng = np.random.default_rng(seed)
    r = rng.normal(scale=0.6, size=(4, 4, 1))
    loss = soft_constraint_loss(r, 0.0, 0.4, gamma)
    assert loss == pytest.approx(gamma * soft_constraint_loss(r, 0.0, 0.4, 1.0), rel=1e-12, abs=0)
    feasible = np.all((r >= 0) & (r <= 0.4))
    assert (soft_constraint_loss(r, 0.0, 0.4, 1.0) == 0.0) == feasible
    v = violation_stats(r, 0.0, 0.4)
    assert (v.fraction == 0) == (v.mean_magnitude == 0) == (v.max_magnitude == 0)
    assert math.isclose(v.mean_magnitude, soft_constraint_loss(r, 0.0, 0.4, 1.0), rel_tol=1e-12)
