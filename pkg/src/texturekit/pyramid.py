"""Laplacian pyramid analysis and synthesis.

One analysis step lowpass-filters separably, decimates by ``factor``
per axis, and keeps the full-resolution residual against the
re-expanded lowpass. Because the highpass is a residual, synthesis
(``high + expand(low)``) reconstructs the input exactly by
construction, for any filter pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve1d

from .errors import ShapeError
from .tensor_io import FeatureMap, feature_map

# Classic 5-tap binomial-like kernel; its polyphase sums are equal, so
# expansion reproduces constants exactly at factor 2.
BURT_ADELSON = (0.0625, 0.25, 0.375, 0.25, 0.0625)


def _as_kernel(taps) -> np.ndarray:
    k = np.asarray(taps, dtype=np.float64)
    if k.ndim != 1 or k.size % 2 == 0:
        raise ShapeError(f"filter must be 1-D with odd length, got shape {k.shape}")
    if abs(k.sum() - 1.0) > 1e-6:
        raise ShapeError(f"filter DC gain must be 1 within 1e-6, got {k.sum()!r}")
    return k


@dataclass(frozen=True)
class LpConfig:
    """Analysis/synthesis kernels plus the per-axis decimation factor."""

    analysis_filter: tuple = BURT_ADELSON
    synthesis_filter: tuple = BURT_ADELSON
    factor: int = 2

    def __post_init__(self):
        _as_kernel(self.analysis_filter)
        _as_kernel(self.synthesis_filter)
        if self.factor < 2:
            raise ShapeError(f"decimation factor must be >= 2, got {self.factor}")


def reflect_pad(x: FeatureMap, multiple: int) -> FeatureMap:
    """Pad bottom/right with symmetric reflection until dims divide ``multiple``."""
    if multiple < 1:
        raise ShapeError(f"multiple must be >= 1, got {multiple}")
    _, h, w = x.shape
    pad_h = (-h) % multiple
    pad_w = (-w) % multiple
    if pad_h == 0 and pad_w == 0:
        return x
    if pad_h > h or pad_w > w:
        raise ShapeError(
            f"cannot reflect-pad {h}x{w} to a multiple of {multiple}: "
            "pad amount exceeds the image"
        )
    return feature_map(np.pad(x.data, ((0, 0), (0, pad_h), (0, pad_w)), mode="symmetric"))


def _lowpass_decimate(data: np.ndarray, kernel: np.ndarray, p: int) -> np.ndarray:
    smooth = convolve1d(data, kernel, axis=1, mode="reflect")
    smooth = convolve1d(smooth, kernel, axis=2, mode="reflect")
    return smooth[:, ::p, ::p]


def _expand(low: np.ndarray, kernel: np.ndarray, p: int, out_hw) -> np.ndarray:
    """Zero-insert, filter with gain ``p`` per axis, crop to ``out_hw``.

    The low image is reflect-extended *before* zero insertion so the
    sample comb stays periodic across boundaries; otherwise constants
    would not survive expansion near the edges.
    """
    c, h, w = low.shape
    reach = (kernel.size - 1) // 2
    k = -(-reach // p)
    padded = np.pad(low, ((0, 0), (k, k), (k, k)), mode="symmetric")
    up = np.zeros((c, p * (h + 2 * k), p * (w + 2 * k)), dtype=np.float64)
    up[:, ::p, ::p] = padded
    up = convolve1d(up, kernel * p, axis=1, mode="constant")
    up = convolve1d(up, kernel * p, axis=2, mode="constant")
    oh, ow = out_hw
    return up[:, k * p : k * p + oh, k * p : k * p + ow]


def lp_analyze(x: FeatureMap, cfg: LpConfig = LpConfig()) -> tuple[FeatureMap, FeatureMap]:
    """One pyramid step: decimated lowpass plus full-resolution residual."""
    p = cfg.factor
    _, h, w = x.shape
    if h % p or w % p or h < p or w < p:
        raise ShapeError(
            f"dims {h}x{w} must be >= {p} and divisible by {p}; reflect_pad first"
        )
    data = x.data.astype(np.float64)
    low = feature_map(_lowpass_decimate(data, _as_kernel(cfg.analysis_filter), p))
    expanded = _expand(
        low.data.astype(np.float64), _as_kernel(cfg.synthesis_filter), p, (h, w)
    )
    high = feature_map(data - expanded)
    return low, high


def lp_synthesize(low: FeatureMap, high: FeatureMap, cfg: LpConfig = LpConfig()) -> FeatureMap:
    """Invert one analysis step: ``high + expand(low)``."""
    p = cfg.factor
    if low.channels != high.channels:
        raise ShapeError(
            f"channel mismatch: low {low.channels} vs high {high.channels}"
        )
    if (high.height, high.width) != (low.height * p, low.width * p):
        raise ShapeError(
            f"high dims {high.height}x{high.width} do not match "
            f"low dims {low.height}x{low.width} at factor {p}"
        )
    expanded = _expand(
        low.data.astype(np.float64),
        _as_kernel(cfg.synthesis_filter),
        p,
        (high.height, high.width),
    )
    return feature_map(high.data.astype(np.float64) + expanded)
