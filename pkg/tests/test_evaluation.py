import numpy as np
import pytest

from rangemos import ConfusionMatrix, accumulate, iou_moving
from rangemos.errors import ShapeMismatchError
from rangemos.evaluation import format_report


class TestAccumulate:
    def test_all_static(self):
        cm = accumulate(np.zeros(4, np.uint8), np.zeros(4, np.uint8), ConfusionMatrix())
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (0, 0, 0, 4)

    def test_hand_counted_mixed(self):
        pred = np.array([1, 1, 0, 0], dtype=np.uint8)
        gt = np.array([1, 0, 1, 0], dtype=np.uint8)
        cm = accumulate(pred, gt, ConfusionMatrix())
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 1, 1)

    def test_empty_arrays(self):
        base = ConfusionMatrix(1, 2, 3, 4)
        cm = accumulate(np.zeros(0, np.uint8), np.zeros(0, np.uint8), base)
        assert cm == base

    def test_counts_total(self):
        rng = np.random.default_rng(0)
        pred = rng.integers(0, 2, 1000).astype(np.uint8)
        gt = rng.integers(0, 2, 1000).astype(np.uint8)
        cm = accumulate(pred, gt, ConfusionMatrix())
        assert cm.total == 1000

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            accumulate(np.zeros(2, np.uint8), np.zeros(3, np.uint8), ConfusionMatrix())

    def test_order_independent(self):
        rng = np.random.default_rng(1)
        pred = rng.integers(0, 2, 300).astype(np.uint8)
        gt = rng.integers(0, 2, 300).astype(np.uint8)
        forward = ConfusionMatrix()
        for lo, hi in [(0, 100), (100, 200), (200, 300)]:
            forward = accumulate(pred[lo:hi], gt[lo:hi], forward)
        backward = ConfusionMatrix()
        for lo, hi in [(200, 300), (0, 100), (100, 200)]:
            backward = accumulate(pred[lo:hi], gt[lo:hi], backward)
        assert forward == backward

    def test_swap_pred_gt_swaps_fp_fn(self):
        rng = np.random.default_rng(2)
        pred = rng.integers(0, 2, 200).astype(np.uint8)
        gt = rng.integers(0, 2, 200).astype(np.uint8)
        a = accumulate(pred, gt, ConfusionMatrix())
        b = accumulate(gt, pred, ConfusionMatrix())
        assert (a.tp, a.tn) == (b.tp, b.tn)
        assert (a.fp, a.fn) == (b.fn, b.fp)
        assert iou_moving(a) == iou_moving(b)

    def test_merge_associative(self):
        a = ConfusionMatrix(1, 2, 3, 4)
        b = ConfusionMatrix(5, 6, 7, 8)
        c = ConfusionMatrix(9, 10, 11, 12)
        assert a.merge(b).merge(c) == a.merge(b.merge(c))


class TestIoU:
    def test_hand_value(self):
        assert iou_moving(ConfusionMatrix(tp=3, fp=1, fn=1)) == pytest.approx(0.6)

    def test_perfect_prediction(self):
        gt = np.array([1, 0, 1], dtype=np.uint8)
        cm = accumulate(gt, gt, ConfusionMatrix())
        assert iou_moving(cm) == 1.0

    def test_undefined_denominator(self):
        assert iou_moving(ConfusionMatrix(tn=100)) is None

    def test_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            cm = ConfusionMatrix(*rng.integers(0, 100, 4))
            iou = iou_moving(cm)
            if iou is not None:
                assert 0.0 <= iou <= 1.0

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1)


class TestReport:
    def test_report_lines(self):
        cm = ConfusionMatrix(tp=3, fp=1, fn=1, tn=5)
        text, machine = format_report(cm, [("000000", cm), ("000001", ConfusionMatrix(tn=4))])
        assert "iou_moving=0.600000" in machine
        assert "scans=2" in machine
        assert "scans_undefined_iou=1" in machine
        assert "scan_iou[000001]=undefined" in machine
        assert "0.600000" in text

    def test_undefined_overall(self):
        text, machine = format_report(ConfusionMatrix())
        assert "iou_moving=undefined" in machine
        assert "undefined" in text
