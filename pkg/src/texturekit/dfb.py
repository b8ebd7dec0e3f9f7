"""Directional filter bank on the FFT grid.

``levels = m`` splits the frequency half-plane into ``2**m`` equal-angle
wedges; each subband is the inverse FFT of the spectrum under one wedge
mask. Masks are built as smoothed sector indicators (raised-cosine
kernel of width ``transition_width * pi``), so they sum to exactly one
at every frequency bin and reconstruction is a plain sum of subbands.

Sector 0 is centered on the vertical-frequency axis (angle -pi/2 from
the positive horizontal-frequency axis) and indices increase
counter-clockwise; with ``m = 3``, subbands 0-3 therefore collect
vertical detail and 4-7 horizontal detail. Centering the sector grid on
the axes keeps pure axis-aligned frequencies in sector interiors, away
from feathered boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensor_io import FeatureMap, feature_map


@dataclass(frozen=True)
class DfbConfig:
    levels: int = 3
    transition_width: float = 0.1

    def __post_init__(self):
        if self.levels < 1:
            raise ShapeError(f"levels must be >= 1, got {self.levels}")
        if not (0.0 <= self.transition_width < 0.5):
            raise ShapeError(
                f"transition_width must be in [0, 0.5), got {self.transition_width}"
            )


def _smoothstep(d: np.ndarray, width: float) -> np.ndarray:
    """CDF of a unit-mass raised-cosine kernel supported on [-width/2, width/2]."""
    if width == 0.0:
        return (d >= 0.0).astype(np.float64)
    x = np.clip(d / width, -0.5, 0.5)
    return x + 0.5 + np.sin(2.0 * np.pi * x) / (2.0 * np.pi)


def directional_masks(height: int, width: int, cfg: DfbConfig = DfbConfig()) -> np.ndarray:
    """Wedge masks, shape (2**levels, height, width), summing to 1 per bin."""
    count = 2 ** cfg.levels
    if count > min(height, width):
        raise ShapeError(
            f"2**levels = {count} exceeds min dim of {height}x{width} input"
        )
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    phi = np.arctan2(fy, fx)
    # Fold opposite frequencies onto one direction axis in [-pi/2, pi/2).
    phi = np.where(phi < -np.pi / 2, phi + np.pi, phi)
    phi = np.where(phi >= np.pi / 2, phi - np.pi, phi)

    sector = np.pi / count
    t = cfg.transition_width * np.pi
    edges = -np.pi / 2 - sector / 2 + sector * np.arange(count + 1)
    masks = np.empty((count, height, width), dtype=np.float64)
    for k in range(count):
        acc = np.zeros((height, width), dtype=np.float64)
        for image in (-np.pi, 0.0, np.pi):  # wrap-around copies of the sector
            acc += _smoothstep(phi - edges[k] + image, t)
            acc -= _smoothstep(phi - edges[k + 1] + image, t)
        masks[k] = acc
    # Exact omega -> -omega symmetry keeps subbands of real inputs real.
    flip = masks[:, (-np.arange(height)) % height][:, :, (-np.arange(width)) % width]
    return 0.5 * (masks + flip)


def dfb_decompose(x: FeatureMap, cfg: DfbConfig = DfbConfig()) -> list[FeatureMap]:
    """Split a map into 2**levels directional subbands (undecimated)."""
    masks = directional_masks(x.height, x.width, cfg)
    spectrum = np.fft.fft2(x.data.astype(np.float64), axes=(-2, -1))
    return [
        feature_map(np.fft.ifft2(spectrum * mask, axes=(-2, -1)).real)
        for mask in masks
    ]


def dfb_reconstruct(subbands: list[FeatureMap]) -> FeatureMap:
    """Sum subbands back into one map; the mask partition makes this exact."""
    if not subbands:
        raise ShapeError("no subbands to reconstruct from")
    n = len(subbands)
    if n & (n - 1):
        raise ShapeError(f"subband count must be a power of two, got {n}")
    shape = subbands[0].shape
    for band in subbands[1:]:
        if band.shape != shape:
            raise ShapeError(f"subband shape mismatch: {band.shape} vs {shape}")
    total = np.zeros(shape, dtype=np.float64)
    for band in subbands:
        total += band.data
    return feature_map(total)
