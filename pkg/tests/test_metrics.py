import math

import numpy as np
import pytest

from drlseg import (
    ConfusionCounts,
    InvalidArgumentError,
    UndefinedMetricError,
    confusion,
    dice,
    hausdorff,
    mcc,
    pixel_accuracy,
    report,
)


def confusion_oracle(pred, label):
    tp = fp = tn = fn = 0
    for p, l in zip(pred.ravel(), label.ravel()):
        if p and l:
            tp += 1
        elif p and not l:
            fp += 1
        elif not p and l:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def dice_oracle(pred, label):
    inter = int(np.count_nonzero(pred & label))
    return 2.0 * inter / (int(pred.sum()) + int(label.sum()))


def hausdorff_oracle(pred, label):
    a = [(y, x) for y, x in zip(*np.nonzero(pred))]
    b = [(y, x) for y, x in zip(*np.nonzero(label))]

    def directed(src, dst):
        worst = 0.0
        for p in src:
            best = min(math.hypot(p[0] - q[0], p[1] - q[1]) for q in dst)
            worst = max(worst, best)
        return worst

    return max(directed(a, b), directed(b, a))


def mcc_oracle(tp, fp, tn, fn):
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return None
    return (tp * tn - fp * fn) / math.sqrt(denom)


def mask_pair(rng):
    pred = rng.random((8, 8)) < 0.45
    label = rng.random((8, 8)) < 0.45
    return pred, label


# ---------------------------------------------------------------------------
# hand-worked cases


def test_dice_hand_cases():
    a = np.zeros((4, 4), dtype=bool)
    a[0, :4] = True                      # |pred| = 4
    b = np.zeros((4, 4), dtype=bool)
    b[0, 2:] = True
    b[1, :2] = True                      # |label| = 4, overlap = 2
    assert dice(a, b) == 0.5
    assert dice(a, a) == 1.0
    assert dice(a, np.roll(a, 2, axis=0)) == 0.0


def test_dice_both_empty_undefined():
    empty = np.zeros((4, 4), dtype=bool)
    with pytest.raises(UndefinedMetricError):
        dice(empty, empty)


def test_hausdorff_hand_cases():
    a = np.zeros((8, 8), dtype=bool)
    a[0, 0] = True
    b = np.zeros((8, 8), dtype=bool)
    b[3, 4] = True
    assert hausdorff(a, b) == 5.0
    assert hausdorff(a, a) == 0.0

    x = np.zeros((12, 12), dtype=bool)
    x[0, 0] = True
    y = np.zeros((12, 12), dtype=bool)
    y[0, 0] = True
    y[0, 10] = True
    # directed distance x->y is 0 but y->x is 10; the max resolves it
    assert hausdorff(x, y) == 10.0
    assert hausdorff(y, x) == 10.0


def test_hausdorff_empty_undefined():
    empty = np.zeros((4, 4), dtype=bool)
    full = np.ones((4, 4), dtype=bool)
    with pytest.raises(UndefinedMetricError):
        hausdorff(empty, full)
    with pytest.raises(UndefinedMetricError):
        hausdorff(full, empty)


def test_pixel_accuracy_hand_cases():
    assert pixel_accuracy(ConfusionCounts(tp=2, fp=1, tn=2, fn=1)) == 4.0 / 6.0
    assert pixel_accuracy(ConfusionCounts(tp=5, fp=0, tn=3, fn=0)) == 1.0
    assert pixel_accuracy(ConfusionCounts(tp=0, fp=2, tn=0, fn=3)) == 0.0
    with pytest.raises(InvalidArgumentError):
        pixel_accuracy(ConfusionCounts(tp=0, fp=0, tn=0, fn=0))


def test_mcc_hand_cases():
    assert np.isclose(mcc(ConfusionCounts(tp=2, fp=1, tn=2, fn=1)), 1.0 / 3.0)
    assert np.isclose(mcc(ConfusionCounts(tp=4, fp=0, tn=5, fn=0)), 1.0)
    assert np.isclose(mcc(ConfusionCounts(tp=0, fp=5, tn=0, fn=4)), -1.0)


def test_mcc_degenerate_single_class_undefined():
    # prediction all-positive: tn + fn margin is zero
    with pytest.raises(UndefinedMetricError):
        mcc(ConfusionCounts(tp=4, fp=4, tn=0, fn=0))
    # label all-negative: tp + fn margin is zero
    with pytest.raises(UndefinedMetricError):
        mcc(ConfusionCounts(tp=0, fp=3, tn=5, fn=0))


def test_confusion_complement_has_no_agreement():
    rng = np.random.default_rng(41)
    label = rng.random((6, 6)) < 0.5
    c = confusion(~label, label)
    assert c.tp == 0 and c.tn == 0
    assert c.fp + c.fn == label.size


# ---------------------------------------------------------------------------
# randomized oracle sweeps


def test_confusion_matches_loop_oracle():
    rng = np.random.default_rng(42)
    for _ in range(50):
        pred, label = mask_pair(rng)
        c = confusion(pred, label)
        tp, fp, tn, fn = confusion_oracle(pred, label)
        assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
        assert c.total == pred.size


def test_metrics_match_brute_force_oracles():
    rng = np.random.default_rng(43)
    checked = 0
    for _ in range(200):
        pred, label = mask_pair(rng)
        c = confusion(pred, label)
        tp, fp, tn, fn = confusion_oracle(pred, label)

        if pred.any() or label.any():
            assert abs(dice(pred, label) - dice_oracle(pred, label)) < 1e-12
        if pred.any() and label.any():
            assert abs(hausdorff(pred, label)
                       - hausdorff_oracle(pred, label)) < 1e-12
        assert abs(pixel_accuracy(c) - (tp + tn) / (tp + tn + fp + fn)) < 1e-12
        expected_mcc = mcc_oracle(tp, fp, tn, fn)
        if expected_mcc is None:
            with pytest.raises(UndefinedMetricError):
                mcc(c)
        else:
            assert abs(mcc(c) - expected_mcc) < 1e-12
            assert -1.0 - 1e-12 <= mcc(c) <= 1.0 + 1e-12
        checked += 1
    assert checked == 200


def test_hausdorff_symmetry_and_translation():
    rng = np.random.default_rng(44)
    for _ in range(20):
        pred = rng.random((8, 8)) < 0.3
        label = rng.random((8, 8)) < 0.3
        if not (pred.any() and label.any()):
            continue
        assert hausdorff(pred, label) == hausdorff(label, pred)
        big_p = np.zeros((16, 16), dtype=bool)
        big_l = np.zeros((16, 16), dtype=bool)
        big_p[4:12, 4:12] = pred
        big_l[4:12, 4:12] = label
        assert np.isclose(hausdorff(big_p, big_l), hausdorff(pred, label))


# ---------------------------------------------------------------------------
# report assembly


def test_report_populates_all_metrics():
    rng = np.random.default_rng(45)
    pred = rng.random((8, 8)) < 0.5
    label = rng.random((8, 8)) < 0.5
    rep = report(pred, label)
    c = confusion(pred, label)
    assert rep.dice == dice(pred, label)
    assert rep.hausdorff == hausdorff(pred, label)
    assert rep.pa == pixel_accuracy(c)
    assert rep.mcc == mcc(c)


def test_report_uses_none_for_undefined_metrics():
    pred = np.ones((4, 4), dtype=bool)
    label = np.ones((4, 4), dtype=bool)
    rep = report(pred, label)     # single-class: mcc undefined
    assert rep.dice == 1.0
    assert rep.hausdorff == 0.0
    assert rep.pa == 1.0
    assert rep.mcc is None

    empty = np.zeros((4, 4), dtype=bool)
    rep2 = report(empty, label)   # pred empty: hausdorff undefined
    assert rep2.hausdorff is None
    assert rep2.dice == 0.0


def test_report_shape_mismatch_rejected():
    with pytest.raises(InvalidArgumentError):
        report(np.ones((4, 4), dtype=bool), np.ones((5, 5), dtype=bool))


def test_confusion_counts_validation():
    with pytest.raises(InvalidArgumentError):
        ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)
