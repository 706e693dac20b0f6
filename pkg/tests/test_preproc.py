import numpy as np
import pytest

from drlseg import (
    BilateralParams,
    InvalidArgumentError,
    WienerParams,
    bilateral_filter,
    gradient_enhance,
    wiener_filter,
)


def bilateral_oracle(img, half_window, sigma_s, sigma_r):
    """Direct per-pixel bilateral filter: weights over the in-bounds
    window only, renormalized per pixel."""
    h, w = img.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            num = 0.0
            den = 0.0
            for dy in range(-half_window, half_window + 1):
                for dx in range(-half_window, half_window + 1):
                    sy, sx = y + dy, x + dx
                    if not (0 <= sy < h and 0 <= sx < w):
                        continue
                    ws = np.exp(-(dx * dx + dy * dy) / (2.0 * sigma_s**2))
                    diff = img[sy, sx] - img[y, x]
                    wr = np.exp(-(diff * diff) / (2.0 * sigma_r**2))
                    num += ws * wr * img[sy, sx]
                    den += ws * wr
            out[y, x] = num / den
    return out


def wiener_oracle(img, half_window, noise_variance):
    """Direct adaptive filter: local mean/variance over border-clipped
    windows, noise estimated as the mean local variance when None."""
    h, w = img.shape
    means = np.zeros((h, w))
    variances = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            ys = slice(max(0, y - half_window), min(h, y + half_window + 1))
            xs = slice(max(0, x - half_window), min(w, x + half_window + 1))
            patch = img[ys, xs]
            means[y, x] = patch.mean()
            variances[y, x] = patch.var()
    nv = variances.mean() if noise_variance is None else noise_variance
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            v = variances[y, x]
            gain = max(v - nv, 0.0) / max(v, 1e-12)
            out[y, x] = means[y, x] + gain * (img[y, x] - means[y, x])
    return out


def test_bilateral_matches_loop_oracle():
    rng = np.random.default_rng(21)
    img = rng.uniform(size=(10, 12))
    params = BilateralParams(half_window=2, sigma_s=1.3, sigma_r=0.2)
    out = bilateral_filter(img, params)
    oracle = bilateral_oracle(img, 2, 1.3, 0.2)
    assert np.allclose(out, oracle, atol=1e-12)


def test_bilateral_huge_range_sigma_is_spatial_smoothing():
    # with an enormous range sigma every photometric weight is ~1, so the
    # filter degenerates to plain spatial Gaussian smoothing
    rng = np.random.default_rng(22)
    img = rng.uniform(size=(9, 9))
    out = bilateral_filter(img, BilateralParams(half_window=3, sigma_s=2.0,
                                                sigma_r=1e6))
    oracle = bilateral_oracle(img, 3, 2.0, 1e6)
    assert np.allclose(out, oracle, atol=1e-10)


def test_bilateral_constant_image_unchanged():
    img = np.full((8, 8), 0.37)
    out = bilateral_filter(img, BilateralParams())
    assert np.allclose(out, 0.37)


def test_bilateral_preserves_step_edge_better_than_gaussian():
    img = np.zeros((16, 16))
    img[:, 8:] = 1.0
    sharp = bilateral_filter(img, BilateralParams(half_window=3, sigma_s=2.0,
                                                  sigma_r=0.1))
    blurred = bilateral_filter(img, BilateralParams(half_window=3, sigma_s=2.0,
                                                    sigma_r=1e6))
    # transition width: pixels strictly between 0.05 and 0.95
    mid = (sharp > 0.05) & (sharp < 0.95)
    mid_blur = (blurred > 0.05) & (blurred < 0.95)
    assert mid.sum() < mid_blur.sum()


def test_bilateral_params_validation():
    with pytest.raises(InvalidArgumentError):
        BilateralParams(half_window=0)
    with pytest.raises(InvalidArgumentError):
        BilateralParams(sigma_s=0.0)
    with pytest.raises(InvalidArgumentError):
        BilateralParams(sigma_r=-0.5)


def test_wiener_matches_loop_oracle_fixed_noise():
    rng = np.random.default_rng(23)
    img = rng.uniform(size=(9, 11))
    out = wiener_filter(img, WienerParams(half_window=1, noise_variance=0.01))
    oracle = wiener_oracle(img, 1, 0.01)
    assert np.allclose(out, oracle, atol=1e-12)


def test_wiener_matches_loop_oracle_estimated_noise():
    rng = np.random.default_rng(24)
    img = rng.uniform(size=(10, 8))
    out = wiener_filter(img, WienerParams(half_window=2, noise_variance=None))
    oracle = wiener_oracle(img, 2, None)
    assert np.allclose(out, oracle, atol=1e-12)


def test_wiener_constant_image_unchanged():
    img = np.full((7, 9), 0.62)
    out = wiener_filter(img, WienerParams())
    assert np.allclose(out, 0.62)


def test_wiener_high_noise_flattens_toward_local_mean():
    rng = np.random.default_rng(25)
    img = 0.5 + 0.1 * rng.normal(size=(12, 12))
    out = wiener_filter(img, WienerParams(half_window=2, noise_variance=1e3))
    # gain collapses to zero, output is the local mean (smoother than input)
    assert out.std() < img.std()


def test_wiener_params_validation():
    with pytest.raises(InvalidArgumentError):
        WienerParams(half_window=0)
    with pytest.raises(InvalidArgumentError):
        WienerParams(noise_variance=-0.1)


def test_gradient_enhance_peak_is_one():
    rng = np.random.default_rng(26)
    img = rng.uniform(size=(14, 14))
    out = gradient_enhance(img)
    assert np.isclose(out.max(), 1.0)
    assert out.min() >= 0.0


def test_gradient_enhance_constant_image_is_zero():
    out = gradient_enhance(np.full((8, 8), 0.5))
    assert np.allclose(out, 0.0)


def test_gradient_enhance_highlights_step_edge():
    img = np.zeros((16, 16))
    img[:, 8:] = 1.0
    out = gradient_enhance(img)
    # response concentrates on the two columns adjacent to the step
    assert out[:, 7:9].mean() > 10 * out[:, :4].mean()
