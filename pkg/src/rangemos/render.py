"""8-bit PNG rendering of range images, residuals, labels, and associations.

Normalization bounds are written next to each PNG in a ``.bounds.txt``
sidecar so figures stay reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .association import AssociationMap
from .projection import CHANNEL_NAMES, RangeImage
from .residual import ResidualImage


def _to_bytes(values: np.ndarray, valid: np.ndarray, lo: float, hi: float) -> np.ndarray:
    span = hi - lo
    if span <= 0:
        scaled = np.zeros_like(values, dtype=np.float64)
    else:
        scaled = np.clip((values - lo) / span, 0.0, 1.0)
    out = np.round(scaled * 255.0).astype(np.uint8)
    out[~valid] = 0
    return out


def _write_sidecar(path: Path, lo: float, hi: float) -> None:
    path.with_suffix(path.suffix + ".bounds.txt").write_text(f"min={lo:.9g}\nmax={hi:.9g}\n")


def save_grayscale(
    values: np.ndarray,
    valid: np.ndarray,
    path: Path,
    lo: float | None = None,
    hi: float | None = None,
) -> None:
    """Write one channel as an 8-bit grayscale PNG plus a bounds sidecar.

    Bounds default to the min/max over valid pixels; pass both to pin a fixed
    normalization instead.
    """
    path = Path(path)
    if valid.any():
        lo = float(values[valid].min()) if lo is None else lo
        hi = float(values[valid].max()) if hi is None else hi
    else:
        lo = 0.0 if lo is None else lo
        hi = 1.0 if hi is None else hi
    Image.fromarray(_to_bytes(values, valid, lo, hi), mode="L").save(path)
    _write_sidecar(path, lo, hi)


def render_channels(img: RangeImage, out_dir: Path, channels: list[str], prefix: str = "") -> list[Path]:
    """One PNG per requested channel."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in channels:
        if name not in CHANNEL_NAMES:
            raise ValueError(f"unknown channel {name!r}; choose from {CHANNEL_NAMES}")
        path = out_dir / f"{prefix}{name}.png"
        save_grayscale(img.channel(name), img.valid, path)
        written.append(path)
    return written


def render_label_overlay(img: RangeImage, moving_mask: np.ndarray, path: Path) -> None:
    """Grayscale range with moving pixels painted red."""
    path = Path(path)
    if img.valid.any():
        lo = float(img.range[img.valid].min())
        hi = float(img.range[img.valid].max())
    else:
        lo, hi = 0.0, 1.0
    gray = _to_bytes(img.range, img.valid, lo, hi)
    rgb = np.stack([gray, gray, gray], axis=-1)
    moving = (np.asarray(moving_mask) == 1) & img.valid
    rgb[moving] = (255, 0, 0)
    Image.fromarray(rgb, mode="RGB").save(path)
    _write_sidecar(path, lo, hi)


def render_residual(res: ResidualImage, path: Path, clip: float = 1.0) -> None:
    """Residual PNG with a fixed normalization bound (default clip at 1.0)."""
    save_grayscale(res.values, res.valid, Path(path), lo=0.0, hi=clip)


def render_association(assoc: AssociationMap, path: Path) -> None:
    """Association PNG: absent entries black, present entries a gray ramp."""
    path = Path(path)
    n_cells = assoc.width * assoc.height
    # Map flat target indices onto 1..255 so presence is always visible.
    scaled = 1.0 + (assoc.entries.astype(np.float64) / max(n_cells - 1, 1)) * 254.0
    out = np.where(assoc.present, np.round(scaled), 0).astype(np.uint8)
    Image.fromarray(out, mode="L").save(path)
    _write_sidecar(path, 0.0, float(n_cells - 1))
