"""Core 2D raster type and finite-difference / convolution primitives.

Images, level-set fields and masks are all plain 2D numpy arrays indexed
``[y, x]`` (row-major).  A grayscale image is a float array of finite
intensities, normalized to [0, 1] at load time; a mask is a boolean array.
The operators here are the numerical substrate everything else is built on:

* ``central_gradient`` / ``divergence`` — central differences in the
  interior, one-sided differences on the 1-pixel border, so that the
  divergence of a gradient field composes consistently.
* ``convolve2d`` — direct 2D convolution with clamp-to-edge borders, so a
  normalized kernel leaves constant images exactly unchanged.
* ``gaussian_kernel`` — normalized isotropic Gaussian taps truncated at 3σ.
* ``rasterize_ellipse`` — pixel-center inside test for seeding contours.

All operators are deterministic pure functions: identical inputs give
bit-identical outputs.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError


class VectorField(NamedTuple):
    """Per-pixel 2D vector field with components ``vx`` (along x, i.e.
    columns) and ``vy`` (along y, i.e. rows), each shaped like the image
    it was derived from."""

    vx: np.ndarray
    vy: np.ndarray


@dataclass(frozen=True)
class EllipseSpec:
    """Axis-aligned ellipse in pixel-center coordinates.

    ``cx``/``cy`` locate the center (fractional values allowed) and
    ``rx``/``ry`` are the semi-axes in pixels.
    """

    cx: float
    cy: float
    rx: float
    ry: float

    def __post_init__(self):
        if not (self.rx > 0 and self.ry > 0):
            raise InvalidArgumentError(
                f"ellipse semi-axes must be positive, got rx={self.rx}, ry={self.ry}"
            )


def validate_image(img, name="image"):
    """Check the grid invariants shared by images and level-set fields.

    Returns the input as a float64 array.  Raises InvalidArgumentError for
    wrong rank, non-finite values, or grids smaller than the 3-point
    stencil needs.
    """
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise InvalidArgumentError(
            f"{name} must be at least 3x3 for finite differences, got {arr.shape}"
        )
    if not np.isfinite(arr).all():
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return arr


def central_gradient(img) -> VectorField:
    """Numerical gradient of a scalar grid.

    Central differences at interior pixels, one-sided differences on the
    1-pixel border; grid spacing is 1 pixel.  Returns a VectorField with
    the x-derivative in ``vx`` and the y-derivative in ``vy``.
    """
    arr = validate_image(img)
    gy, gx = np.gradient(arr)
    return VectorField(vx=gx, vy=gy)


def divergence(v: VectorField):
    """Divergence ∂vx/∂x + ∂vy/∂y of a vector field.

    Uses the same central/one-sided difference scheme as
    ``central_gradient`` so that div(grad(const)) is exactly zero.
    """
    vx = validate_image(v.vx, "vx")
    vy = validate_image(v.vy, "vy")
    if vx.shape != vy.shape:
        raise InvalidArgumentError(
            f"vector components disagree in shape: {vx.shape} vs {vy.shape}"
        )
    return np.gradient(vx, axis=1) + np.gradient(vy, axis=0)


def convolve2d(img, kernel):
    """Direct 2D convolution with clamp-to-edge (replicated) borders.

    The kernel must be no larger than the image in either direction.
    Constant images are fixed points of any normalized kernel under this
    border policy.
    """
    arr = validate_image(img)
    k = np.asarray(kernel, dtype=float)
    if k.ndim != 2:
        raise InvalidArgumentError(f"kernel must be 2D, got shape {k.shape}")
    if not np.isfinite(k).all():
        raise InvalidArgumentError("kernel contains non-finite values")
    if k.shape[0] > arr.shape[0] or k.shape[1] > arr.shape[1]:
        raise InvalidArgumentError(
            f"kernel {k.shape} larger than image {arr.shape}"
        )
    return ndimage.convolve(arr, k, mode="nearest")


def gaussian_kernel(sigma):
    """Normalized isotropic Gaussian kernel truncated at 3σ.

    The support is ``2*ceil(3*sigma) + 1`` taps per side (always odd) and
    the weights are rescaled to sum to 1, so smoothing preserves the mean
    level of a constant image.
    """
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    half = math.ceil(3.0 * sigma)
    ax = np.arange(-half, half + 1, dtype=float)
    xx, yy = np.meshgrid(ax, ax)
    w = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return w / w.sum()


def rasterize_ellipse(shape, ellipse: EllipseSpec):
    """Boolean mask of the pixels whose centers fall inside an ellipse.

    ``shape`` is given as ``(width, height)``; the returned array follows
    the usual row-major convention, i.e. its numpy shape is
    ``(height, width)``.  A pixel (x, y) is foreground iff
    ``((x-cx)/rx)**2 + ((y-cy)/ry)**2 <= 1``.  The ellipse bounding box
    must lie inside the pixel-center grid.
    """
    width, height = int(shape[0]), int(shape[1])
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"bad raster shape {shape}")
    e = ellipse
    if (e.cx - e.rx < 0 or e.cx + e.rx > width - 1
            or e.cy - e.ry < 0 or e.cy + e.ry > height - 1):
        raise InvalidArgumentError(
            f"ellipse {e} exceeds the bounds of a {width}x{height} image"
        )
    ys, xs = np.mgrid[0:height, 0:width]
    return ((xs - e.cx) / e.rx) ** 2 + ((ys - e.cy) / e.ry) ** 2 <= 1.0
