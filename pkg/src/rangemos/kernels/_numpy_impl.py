"""Pure-numpy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable. Both
backends must produce bit-identical outputs: the contract for every kernel is
value-determinism with explicit tie-breaking, never "whatever wins the race".
"""

from __future__ import annotations

import numpy as np

INVERSE_GAP_EPS = 1e-6  # pinned offset for the inverse-range-gap weighting

BACKEND_NAME = "numpy"


def scatter_argmin(cells: np.ndarray, values: np.ndarray, n_cells: int) -> np.ndarray:
    """Per-cell index of the minimum-value candidate.

    Args:
        cells: ``(M,)`` int64 flat cell index of each candidate, all in
            ``[0, n_cells)``.
        values: ``(M,)`` float64 value of each candidate.
        n_cells: total number of cells.

    Returns:
        ``(n_cells,)`` int64 array holding, for each cell, the index into the
        candidate arrays of the candidate with the smallest value, ties broken
        by the lowest candidate index; -1 for cells with no candidate.
    """
    cells = np.ascontiguousarray(cells, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    winners = np.full(n_cells, -1, dtype=np.int64)
    if cells.size == 0:
        return winners
    # Sort by (cell, value, candidate index); the first row of each cell group
    # is its winner. lexsort is stable, so equal (cell, value) pairs keep
    # ascending candidate order.
    order = np.lexsort((values, cells))
    sorted_cells = cells[order]
    first = np.empty(order.size, dtype=bool)
    first[0] = True
    first[1:] = sorted_cells[1:] != sorted_cells[:-1]
    winners[sorted_cells[first]] = order[first]
    return winners


def knn_vote(
    anchor_u: np.ndarray,
    anchor_v: np.ndarray,
    point_range: np.ndarray,
    input_label: np.ndarray,
    image_range: np.ndarray,
    image_valid: np.ndarray,
    pixel_label: np.ndarray,
    k: int,
    window: int,
    range_cutoff: float,
    inverse_weight: bool,
) -> np.ndarray:
    """Window-vote label refinement over a range image.

    For each query point anchored at pixel ``(anchor_v, anchor_u)``: gather the
    valid pixels inside the ``window x window`` neighborhood (no horizontal
    wrap), drop those whose absolute range gap to the point exceeds
    ``range_cutoff``, keep the ``k`` smallest gaps (ties by flat pixel index),
    and emit the weighted majority of their labels. Queries with a negative
    anchor or no surviving neighbor keep their input label; a tied vote also
    keeps the input label.
    """
    image_valid = np.asarray(image_valid, dtype=bool)
    height, width = image_range.shape
    n = anchor_u.shape[0]
    half = window // 2
    n_off = window * window

    gaps = np.full((n, n_off), np.inf)
    votes = np.zeros((n, n_off), dtype=np.uint8)
    has_anchor = anchor_u >= 0
    col = 0
    for dv in range(-half, half + 1):
        vv = anchor_v + dv
        ok_v = has_anchor & (vv >= 0) & (vv < height)
        for du in range(-half, half + 1):
            uu = anchor_u + du
            ok = ok_v & (uu >= 0) & (uu < width)
            vv_c = np.where(ok, vv, 0)
            uu_c = np.where(ok, uu, 0)
            ok &= image_valid[vv_c, uu_c]
            gap = np.abs(image_range[vv_c, uu_c] - point_range)
            ok &= gap <= range_cutoff
            gaps[:, col] = np.where(ok, gap, np.inf)
            votes[:, col] = np.where(ok, pixel_label[vv_c, uu_c], 0)
            col += 1

    # Columns are enumerated in ascending flat-pixel order for every query, so
    # a stable sort on the gap alone realizes the (gap, flat index) tie rule.
    order = np.argsort(gaps, axis=1, kind="stable")[:, : min(k, n_off)]
    rows = np.arange(n)[:, None]
    sel_gaps = gaps[rows, order]
    sel_votes = votes[rows, order]
    alive = np.isfinite(sel_gaps)
    if inverse_weight:
        weights = np.where(alive, 1.0 / (sel_gaps + INVERSE_GAP_EPS), 0.0)
    else:
        weights = alive.astype(np.float64)

    moving = np.where(sel_votes == 1, weights, 0.0).sum(axis=1)
    static = np.where(sel_votes == 0, weights, 0.0).sum(axis=1)
    out = np.asarray(input_label, dtype=np.uint8).copy()
    out[moving > static] = 1
    out[static > moving] = 0
    return out
