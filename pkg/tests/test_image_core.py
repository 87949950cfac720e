import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image as PILImage

from nonneg.image_core import (
    EPS_RANGE,
    ImageFormatError,
    as_image,
    channel_stats,
    load_image,
    normalize,
    save_image,
    to_bytes,
)


def write_pgm(path, w, h, values, binary=True):
    if binary:
        path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + bytes(values))
    else:
        path.write_text(f"P2\n{w} {h}\n255\n" + " ".join(map(str, values)) + "\n")


@pytest.mark.parametrize("binary", [True, False])
def test_load_pgm(tmp_path, binary):
    path = tmp_path / "a.pgm"
    write_pgm(path, 2, 2, [0, 255, 128, 64], binary)
    img = load_image(path)
    assert img.shape == (2, 2, 1)
    np.testing.assert_array_equal(img.ravel(), [0.0, 1.0, 128 / 255, 64 / 255])


def test_load_rgb_png(tmp_path):
    path = tmp_path / "red.png"
    PILImage.fromarray(np.array([[[255, 0, 0]]], dtype=np.uint8), "RGB").save(path)
    img = load_image(path)
    assert img.shape == (1, 1, 3)
    np.testing.assert_array_equal(img.ravel(), [1.0, 0.0, 0.0])


def test_load_ppm(tmp_path):
    path = tmp_path / "a.ppm"
    path.write_bytes(b"P6\n1 2\n255\n" + bytes([10, 20, 30, 40, 50, 60]))
    img = load_image(path)
    assert img.shape == (2, 1, 3)
    np.testing.assert_array_equal(img[1, 0], np.array([40, 50, 60]) / 255)


def test_rgba_rejected(tmp_path):
    path = tmp_path / "a.png"
    PILImage.new("RGBA", (2, 2)).save(path)
    with pytest.raises(ImageFormatError, match="alpha channel unsupported"):
        load_image(path)


def test_sixteen_bit_rejected(tmp_path):
    path = tmp_path / "deep.png"
    PILImage.fromarray(np.full((2, 2), 40000, dtype=np.uint16)).save(path)
    with pytest.raises(ImageFormatError, match="bit depth"):
        load_image(path)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_image(tmp_path / "nope.png")


def test_save_quantization(tmp_path):
    path = tmp_path / "q.png"
    save_image(np.array([[[0.0], [1.0], [0.5], [-0.2], [1.7]]]), path)
    stored = np.array(PILImage.open(path))
    np.testing.assert_array_equal(stored.ravel(), [0, 255, 128, 0, 255])


def test_save_unwritable(tmp_path):
    with pytest.raises(OSError):
        save_image(np.zeros((2, 2, 1)), tmp_path / "missing" / "dir" / "x.png")


@pytest.mark.parametrize("suffix,c", [(".png", 3), (".png", 1), (".ppm", 3), (".pgm", 1)])
def test_round_trip(tmp_path, rng, suffix, c):
    img = rng.uniform(-0.3, 1.3, size=(5, 7, c))
    path = tmp_path / f"rt{suffix}"
    save_image(img, path)
    back = load_image(path)
    assert np.max(np.abs(back - np.clip(img, 0, 1))) <= 1 / 510 + 1e-15


def test_to_bytes_half_rounds_up():
    assert to_bytes(np.array([0.5]))[0] == 128


def test_as_image_validation():
    assert as_image(np.zeros((3, 4))).shape == (3, 4, 1)
    with pytest.raises(ValueError):
        as_image(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        as_image(np.array([[np.nan]]))


def test_channel_stats():
    s = channel_stats(as_image(np.array([[0.2, 0.5, 0.8]])))
    assert (s.minimum[0], s.maximum[0]) == (0.2, 0.8)
    s = channel_stats(np.full((2, 2, 1), 0.4))
    assert (s.minimum[0], s.maximum[0]) == (0.4, 0.4)
    img = np.zeros((2, 2, 3))
    img[0, 0, 0], img[..., 1] = 1.0, 0.3
    s = channel_stats(img)
    np.testing.assert_array_equal(s.minimum, [0.0, 0.3, 0.0])
    np.testing.assert_array_equal(s.maximum, [1.0, 0.3, 0.0])


def test_normalize_examples():
    out = normalize(as_image(np.array([[0.2, 0.5, 0.8]])))
    np.testing.assert_allclose(out.ravel(), [0.0, 0.5, 1.0], atol=1e-15)
    np.testing.assert_array_equal(normalize(np.full((1, 2, 1), 0.4)), 0.0)


def test_normalize_affine_example(rng):
    x = rng.random((8, 8, 3))
    np.testing.assert_allclose(normalize(0.5 * x + 0.3), normalize(x), rtol=0, atol=1e-12)


def test_normalize_degenerate_threshold():
    img = np.array([[[0.0], [EPS_RANGE / 2]]])
    np.testing.assert_array_equal(normalize(img), 0.0)


def test_normalize_batched_matches_single(rng):
    stack = rng.random((4, 3, 5, 3))
    for k in range(4):
        np.testing.assert_array_equal(normalize(stack)[k], normalize(stack[k]))


images = arrays(
    np.float64,
    st.tuples(st.integers(1, 6), st.integers(2, 6), st.sampled_from([1, 3])),
    elements=st.floats(0, 1, allow_nan=False),
)


def _non_degenerate(img):
    return bool(np.all(channel_stats(img).span >= 1e-3))


@settings(max_examples=200, deadline=None)
@given(images, st.floats(0.1, 3.0), st.floats(-1.0, 1.0))
def test_normalize_affine_invariance(img, gain, offset):
    if not _non_degenerate(img):
        return
    assert np.max(np.abs(normalize(gain * img + offset) - normalize(img))) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(images)
def test_normalize_range_and_idempotence(img):
    out = normalize(img)
    assert out.min() >= 0.0 and out.max() <= 1.0
    if _non_degenerate(img):
        assert np.all(out.min(axis=(0, 1)) == 0.0)
        assert np.all(out.max(axis=(0, 1)) == 1.0)
        assert np.max(np.abs(normalize(out) - out)) <= 1e-12
