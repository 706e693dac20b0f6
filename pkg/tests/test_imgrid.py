import numpy as np
import pytest

from drlseg import (
    EllipseSpec,
    InvalidArgumentError,
    VectorField,
    central_gradient,
    convolve2d,
    divergence,
    gaussian_kernel,
    rasterize_ellipse,
    validate_image,
)


def gradient_oracle(arr):
    """Central differences in the interior, one-sided at the borders,
    written as explicit loops."""
    h, w = arr.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            if 0 < x < w - 1:
                gx[y, x] = (arr[y, x + 1] - arr[y, x - 1]) / 2.0
            elif x == 0:
                gx[y, x] = arr[y, 1] - arr[y, 0]
            else:
                gx[y, x] = arr[y, w - 1] - arr[y, w - 2]
            if 0 < y < h - 1:
                gy[y, x] = (arr[y + 1, x] - arr[y - 1, x]) / 2.0
            elif y == 0:
                gy[y, x] = arr[1, x] - arr[0, x]
            else:
                gy[y, x] = arr[h - 1, x] - arr[h - 2, x]
    return gx, gy


def convolve_oracle(img, kernel):
    """True convolution with clamp-to-edge indexing, explicit loops."""
    h, w = img.shape
    kh, kw = kernel.shape
    cy, cx = kh // 2, kw // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for ky in range(kh):
                for kx in range(kw):
                    sy = min(max(y - (ky - cy), 0), h - 1)
                    sx = min(max(x - (kx - cx), 0), w - 1)
                    acc += kernel[ky, kx] * img[sy, sx]
            out[y, x] = acc
    return out


def test_central_gradient_matches_loop_oracle():
    rng = np.random.default_rng(11)
    arr = rng.normal(size=(9, 7))
    gx, gy = gradient_oracle(arr)
    grad = central_gradient(arr)
    assert np.allclose(grad.vx, gx, atol=1e-13)
    assert np.allclose(grad.vy, gy, atol=1e-13)


def test_central_gradient_of_linear_ramp_is_exact():
    yy, xx = np.mgrid[0:8, 0:11]
    arr = 3.0 * xx - 2.0 * yy + 1.0
    grad = central_gradient(arr)
    assert np.allclose(grad.vx, 3.0)
    assert np.allclose(grad.vy, -2.0)


def test_divergence_matches_loop_oracle():
    rng = np.random.default_rng(12)
    vx = rng.normal(size=(8, 9))
    vy = rng.normal(size=(8, 9))
    dx, _ = gradient_oracle(vx)
    _, dy = gradient_oracle(vy)
    div = divergence(VectorField(vx=vx, vy=vy))
    assert np.allclose(div, dx + dy, atol=1e-13)


def test_divergence_of_gradient_is_laplacian_like():
    # div(grad(f)) of a quadratic is constant in the interior
    yy, xx = np.mgrid[0:12, 0:12]
    f = xx.astype(float) ** 2 + yy.astype(float) ** 2
    lap = divergence(central_gradient(f))
    assert np.allclose(lap[2:-2, 2:-2], 4.0)


def test_convolve2d_matches_loop_oracle():
    rng = np.random.default_rng(13)
    img = rng.normal(size=(8, 10))
    kernel = rng.normal(size=(3, 5))  # asymmetric: catches flip errors
    out = convolve2d(img, kernel)
    assert np.allclose(out, convolve_oracle(img, kernel), atol=1e-12)


def test_convolve2d_identity_kernel():
    rng = np.random.default_rng(14)
    img = rng.normal(size=(6, 6))
    kernel = np.zeros((3, 3))
    kernel[1, 1] = 1.0
    assert np.allclose(convolve2d(img, kernel), img)


def test_convolve2d_constant_preserved_by_normalized_kernel():
    img = np.full((11, 11), 4.25)
    out = convolve2d(img, gaussian_kernel(1.2))
    assert np.allclose(out, 4.25)


def test_convolve2d_kernel_larger_than_image_rejected():
    with pytest.raises(InvalidArgumentError):
        convolve2d(np.zeros((3, 3)), np.ones((5, 5)))


def test_gaussian_kernel_properties():
    k = gaussian_kernel(1.5)
    half = int(np.ceil(3 * 1.5))
    assert k.shape == (2 * half + 1, 2 * half + 1)
    assert np.isclose(k.sum(), 1.0)
    assert np.allclose(k, k[::-1, :]) and np.allclose(k, k[:, ::-1])
    assert k[half, half] == k.max()


def test_gaussian_kernel_bad_sigma():
    with pytest.raises(InvalidArgumentError):
        gaussian_kernel(0.0)
    with pytest.raises(InvalidArgumentError):
        gaussian_kernel(-1.0)


def test_validate_image_passes_and_casts():
    out = validate_image(np.ones((3, 3), dtype=np.uint8), "img")
    assert out.dtype == np.float64


def test_validate_image_rejects_bad_inputs():
    with pytest.raises(InvalidArgumentError):
        validate_image(np.zeros(5), "img")
    with pytest.raises(InvalidArgumentError):
        validate_image(np.zeros((2, 2)), "img")
    bad = np.zeros((4, 4))
    bad[1, 2] = np.nan
    with pytest.raises(InvalidArgumentError):
        validate_image(bad, "img")


def test_ellipse_spec_validation():
    EllipseSpec(cx=5.0, cy=5.0, rx=2.0, ry=3.0)
    with pytest.raises(InvalidArgumentError):
        EllipseSpec(cx=5.0, cy=5.0, rx=0.0, ry=3.0)
    with pytest.raises(InvalidArgumentError):
        EllipseSpec(cx=5.0, cy=5.0, rx=2.0, ry=-1.0)


def test_rasterize_ellipse_matches_inequality_oracle():
    ell = EllipseSpec(cx=10.0, cy=12.0, rx=6.0, ry=4.0)
    mask = rasterize_ellipse((24, 20), ell)
    assert mask.shape == (20, 24)  # numpy (height, width)
    for y in range(20):
        for x in range(24):
            inside = ((x - ell.cx) / ell.rx) ** 2 + ((y - ell.cy) / ell.ry) ** 2 <= 1.0
            assert mask[y, x] == inside


def test_rasterize_ellipse_circle_area():
    mask = rasterize_ellipse((64, 64), EllipseSpec(31.5, 31.5, 12.0, 12.0))
    assert abs(mask.sum() - np.pi * 12.0**2) < 0.05 * np.pi * 12.0**2


def test_rasterize_ellipse_boundary_pixel_is_inside():
    # pixel exactly on the ellipse satisfies the <= inequality
    mask = rasterize_ellipse((11, 11), EllipseSpec(5.0, 5.0, 3.0, 3.0))
    assert mask[5, 8] and mask[8, 5]


def test_rasterize_ellipse_out_of_bounds_rejected():
    with pytest.raises(InvalidArgumentError):
        rasterize_ellipse((16, 16), EllipseSpec(cx=2.0, cy=8.0, rx=4.0, ry=4.0))
    with pytest.raises(InvalidArgumentError):
        rasterize_ellipse((16, 16), EllipseSpec(cx=8.0, cy=14.0, rx=4.0, ry=4.0))
