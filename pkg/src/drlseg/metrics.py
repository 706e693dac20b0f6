"""Segmentation quality metrics over binary masks.

All metrics treat masks as sets of foreground pixels on a common grid:

* ``dice`` — overlap score 2|A∩B| / (|A|+|B|) in [0, 1].
* ``hausdorff`` — symmetric Hausdorff distance between the foreground
  pixel-center point sets, in pixels (exact, not a percentile variant).
* ``pixel_accuracy`` — fraction of pixels classified correctly.
* ``mcc`` — Matthews correlation coefficient of the pixelwise confusion
  matrix, in [-1, 1].

Degenerate inputs (0/0 overlaps, empty point sets, single-class
confusion matrices) raise ``UndefinedMetricError`` instead of returning
a fabricated number; ``report`` converts those into explicit ``None``
fields so downstream serialization can say "NA".
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .errors import InvalidArgumentError, UndefinedMetricError


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixelwise confusion-matrix counts (foreground = positive)."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(
                    f"confusion count {name} must be nonnegative, "
                    f"got {getattr(self, name)}"
                )

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """The four metrics for one (prediction, label) pair.

    A ``None`` field marks a metric that is mathematically undefined for
    the pair (serialized as "NA" in CSV output).
    """

    dice: Optional[float]
    hausdorff: Optional[float]
    pa: Optional[float]
    mcc: Optional[float]


def _as_mask(mask, name):
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2D, got shape {arr.shape}")
    return arr.astype(bool)


def _check_same_shape(pred, label):
    p = _as_mask(pred, "pred")
    l = _as_mask(label, "label")
    if p.shape != l.shape:
        raise InvalidArgumentError(
            f"mask dimensions differ: pred {p.shape} vs label {l.shape}"
        )
    return p, l


def confusion(pred, label) -> ConfusionCounts:
    """Count true/false positives/negatives between two masks."""
    p, l = _check_same_shape(pred, label)
    tp = int(np.count_nonzero(p & l))
    tn = int(np.count_nonzero(~p & ~l))
    fp = int(np.count_nonzero(p & ~l))
    fn = int(np.count_nonzero(~p & l))
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def dice(pred, label):
    """Overlap score 2|A∩B| / (|A|+|B|).

    Undefined (raises) when both masks are empty.
    """
    p, l = _check_same_shape(pred, label)
    denom = int(p.sum()) + int(l.sum())
    if denom == 0:
        raise UndefinedMetricError("dice is undefined for two empty masks (0/0)")
    return 2.0 * int(np.count_nonzero(p & l)) / denom


def hausdorff(pred, label):
    """Symmetric Hausdorff distance between foreground pixel centers.

    The maximum over both directions of the farthest-nearest Euclidean
    distance, in pixels.  Undefined (raises) when either mask is empty.
    """
    p, l = _check_same_shape(pred, label)
    pts_p = np.argwhere(p)
    pts_l = np.argwhere(l)
    if len(pts_p) == 0 or len(pts_l) == 0:
        raise UndefinedMetricError("hausdorff is undefined for an empty mask")
    forward = directed_hausdorff(pts_p, pts_l)[0]
    backward = directed_hausdorff(pts_l, pts_p)[0]
    return float(max(forward, backward))


def pixel_accuracy(c: ConfusionCounts):
    """Fraction of correctly classified pixels, (tp+tn)/total."""
    if c.total <= 0:
        raise InvalidArgumentError("pixel_accuracy requires a nonzero pixel count")
    return (c.tp + c.tn) / c.total


def mcc(c: ConfusionCounts):
    """Matthews correlation coefficient
    (tp·tn - fp·fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn)).

    Undefined (raises) when any factor of the denominator is zero — the
    degenerate single-class cases — rather than silently 0, so rankings
    built on it are never corrupted by fabricated values.
    """
    factors = (c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn)
    if any(f == 0 for f in factors):
        raise UndefinedMetricError(
            "mcc is undefined when a confusion-matrix margin is zero"
        )
    numerator = c.tp * c.tn - c.fp * c.fn
    denominator = math.sqrt(math.prod(float(f) for f in factors))
    return numerator / denominator


def report(pred, label) -> MetricsReport:
    """All four metrics for one (prediction, label) pair.

    Metrics that are undefined for the pair come back as ``None`` rather
    than aborting the whole report.
    """
    p, l = _check_same_shape(pred, label)
    c = confusion(p, l)

    def attempt(fn, *args):
        try:
            return fn(*args)
        except UndefinedMetricError:
            return None

    return MetricsReport(
        dice=attempt(dice, p, l),
        hausdorff=attempt(hausdorff, p, l),
        pa=attempt(pixel_accuracy, c),
        mcc=attempt(mcc, c),
    )
