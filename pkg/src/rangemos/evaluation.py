"""Confusion counts and moving-class IoU."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary moving-vs-static counts. Values merge associatively."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )


def accumulate(pred: np.ndarray, gt: np.ndarray, cm: ConfusionMatrix) -> ConfusionMatrix:
    """Add one scan's per-point binary predictions to the matrix."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ShapeMismatchError(f"pred {pred.shape} and gt {gt.shape} differ in length")
    p = pred == 1
    g = gt == 1
    return cm.merge(
        ConfusionMatrix(
            tp=int(np.count_nonzero(p & g)),
            fp=int(np.count_nonzero(p & ~g)),
            fn=int(np.count_nonzero(~p & g)),
            tn=int(np.count_nonzero(~p & ~g)),
        )
    )


def iou_moving(cm: ConfusionMatrix) -> float | None:
    """``tp / (tp + fp + fn)``; None when the denominator is zero.

    The undefined case is excluded from aggregates rather than forced to an
    arbitrary 0 or 1.
    """
    denom = cm.tp + cm.fp + cm.fn
    if denom == 0:
        return None
    return cm.tp / denom


def format_report(
    overall: ConfusionMatrix,
    per_scan: list[tuple[str, ConfusionMatrix]] | None = None,
) -> tuple[str, str]:
    """(human-readable text, line-delimited key=value) report pair."""
    iou = iou_moving(overall)
    iou_text = "undefined" if iou is None else f"{iou:.6f}"
    lines = [
        "moving-object segmentation evaluation",
        f"  points evaluated : {overall.total}",
        f"  tp={overall.tp} fp={overall.fp} fn={overall.fn} tn={overall.tn}",
        f"  moving IoU       : {iou_text}",
    ]
    machine = [
        f"points={overall.total}",
        f"tp={overall.tp}",
        f"fp={overall.fp}",
        f"fn={overall.fn}",
        f"tn={overall.tn}",
        f"iou_moving={iou_text}",
    ]
    if per_scan is not None:
        undefined = [name for name, cm in per_scan if iou_moving(cm) is None]
        lines.append(f"  scans            : {len(per_scan)} ({len(undefined)} with undefined IoU, excluded)")
        machine.append(f"scans={len(per_scan)}")
        machine.append(f"scans_undefined_iou={len(undefined)}")
        for name, cm in per_scan:
            scan_iou = iou_moving(cm)
            scan_text = "undefined" if scan_iou is None else f"{scan_iou:.6f}"
            machine.append(f"scan_iou[{name}]={scan_text}")
    return "\n".join(lines), "\n".join(machine)
