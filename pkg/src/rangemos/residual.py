"""Normalized range residuals between the current and a transformed image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .projection import RangeImage


@dataclass(frozen=True)
class ResidualImage:
    """Per-pixel nonnegative residuals; zero wherever either operand is invalid."""

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.valid.shape:
            raise ShapeMismatchError(
                f"residual values {self.values.shape} do not match mask {self.valid.shape}"
            )


def range_residual(current: RangeImage, transformed: RangeImage) -> ResidualImage:
    """``|r_cur - r_trans| / r_cur`` where both pixels are valid, else 0.

    Normalization by the current range follows the residual-image construction
    used by range-image MOS pipelines; current ranges are bounded away from
    zero by the projection's degeneracy epsilon, so values stay finite.
    """
    if (current.width, current.height) != (transformed.width, transformed.height):
        raise ShapeMismatchError(
            f"current {current.width}x{current.height} vs "
            f"transformed {transformed.width}x{transformed.height}"
        )
    both = current.valid & transformed.valid
    safe_cur = np.where(both, current.range, 1.0)
    values = np.where(both, np.abs(safe_cur - transformed.range) / safe_cur, 0.0)
    return ResidualImage(values=values, valid=both)
