"""Image and stacked-signal views of a record.

The plot layout is intentionally plain: twelve equal-height panels stacked in
canonical lead order, each trace scaled to its own panel, one-pixel polyline,
no grid and no labels. Every knob lives in :class:`RenderConfig`.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .core import LEAD_ORDER, EcgRecord, check_complete_leads, reorder_leads
from .exceptions import ConfigError, ValidationError


@dataclass(frozen=True)
class RenderConfig:
    width: int = 1024
    height: int = 768
    margin: float = 0.05
    line_color: tuple[int, int, int] = (0, 0, 0)
    background: tuple[int, int, int] = (255, 255, 255)

    def __post_init__(self):
        object.__setattr__(self, "line_color", tuple(int(c) for c in self.line_color))
        object.__setattr__(self, "background", tuple(int(c) for c in self.background))
        if self.width < 1 or self.height < len(LEAD_ORDER):
            raise ConfigError("image must be at least 1 px wide and 12 px tall")
        if not 0 <= self.margin < 0.5:
            raise ConfigError("margin must lie in [0, 0.5)")
        for color in (self.line_color, self.background):
            if len(color) != 3 or any(not 0 <= c <= 255 for c in color):
                raise ConfigError(f"bad RGB color {color}")
        if self.line_color == self.background:
            raise ConfigError("line color equals background color")

    @classmethod
    def from_dict(cls, data: dict) -> "RenderConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown render keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class RenderedImage:
    pixels: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ValidationError("pixels must be an (H, W, 3) uint8 array")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValidationError("empty image")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_png(self) -> bytes:
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(np.ascontiguousarray(self.pixels), mode="RGB").save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_png())


@dataclass(frozen=True, eq=False)
class StackedSignal:
    data: np.ndarray  # (3, C, L)


def stack_signal(rec: EcgRecord) -> StackedSignal:
    """Three identical copies of the record along a new leading channel axis."""
    data = np.stack([rec.samples] * 3, axis=0)
    data.flags.writeable = False
    return StackedSignal(data)


def _polyline(xs: np.ndarray, ys: np.ndarray):
    """Integer pixels of the 8-connected polyline through ``(xs, ys)``."""
    if len(xs) == 1:
        return xs, ys
    dx = np.diff(xs)
    dy = np.diff(ys)
    steps = np.maximum(np.abs(dx), np.abs(dy))
    steps = np.maximum(steps, 1)
    seg = np.repeat(np.arange(len(steps)), steps)
    start = np.concatenate([[0], np.cumsum(steps)[:-1]])
    frac = (np.arange(steps.sum()) - start[seg]) / steps[seg]
    px = np.rint(xs[seg] + frac * dx[seg]).astype(np.intp)
    py = np.rint(ys[seg] + frac * dy[seg]).astype(np.intp)
    return np.append(px, xs[-1]), np.append(py, ys[-1])


def panel_rows(values: np.ndarray, top: int, panel_h: int, margin: float) -> np.ndarray:
    """Pixel rows for one lead. Flat leads sit on the panel's middle row."""
    lo, hi = float(values.min()), float(values.max())
    mid = top + (panel_h - 1) // 2
    if not hi > lo:
        return np.full(values.shape, mid, dtype=np.intp)
    pad = margin * (panel_h - 1)
    usable = (panel_h - 1) - 2 * pad
    frac = (values - lo) / (hi - lo)
    rows = top + pad + (1.0 - frac) * usable
    return np.clip(np.rint(rows).astype(np.intp), top, top + panel_h - 1)


def render_plot(rec: EcgRecord, config: RenderConfig = RenderConfig()) -> RenderedImage:
    """Rasterize all 12 leads of an unnormalized record."""
    check_complete_leads(rec.leads)
    rec = reorder_leads(rec, LEAD_ORDER)
    w, h = config.width, config.height
    panel_h = h // len(LEAD_ORDER)
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[...] = config.background
    n = rec.length
    if n == 1:
        cols = np.array([(w - 1) // 2], dtype=np.intp)
    else:
        cols = np.rint(np.arange(n) * (w - 1) / (n - 1)).astype(np.intp)
    for p in range(len(LEAD_ORDER)):
        rows = panel_rows(rec.samples[p], p * panel_h, panel_h, config.margin)
        px, py = _polyline(cols, rows)
        img[py, px] = config.line_color
    return RenderedImage(img)
