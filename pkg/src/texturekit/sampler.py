"""Anchor-scored importance sampling of rectangular regions.

Candidate centers are drawn uniformly (without replacement, so returned
centers are distinct); each candidate is scored by summing, over nine
anchor rectangles (three scales x three aspect ratios, area-preserving,
centered on the candidate, clipped to the map), the population variance
of the values inside the rectangle. A ``beta`` fraction of the output
is chosen by weighted sampling without replacement on those scores
(exponential-keys method: key = log(u)/score, take the largest); the
remainder is uniform coverage from the unchosen candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError
from .tensor_io import FeatureMap, feature_map


@dataclass(frozen=True)
class SamplerConfig:
    num_samples: int
    overgen_factor: float = 2.0
    importance_fraction: float = 0.7
    anchor_scales: tuple = (8, 16, 32)
    anchor_ratios: tuple = (0.5, 1.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 1:
            raise ShapeError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.overgen_factor < 1.0:
            raise ShapeError(f"overgen_factor must be >= 1, got {self.overgen_factor}")
        if not (0.0 <= self.importance_fraction <= 1.0):
            raise ShapeError(
                f"importance_fraction must be in [0, 1], got {self.importance_fraction}"
            )
        if not self.anchor_scales or not self.anchor_ratios:
            raise ShapeError("anchor scales and ratios must be non-empty")


@dataclass(frozen=True)
class RegionSample:
    """One sampled region: center, chosen anchor rect, score, draw origin."""

    center: tuple  # (row, col)
    rect: tuple  # (top, left, height, width)
    score: float
    origin: str  # "importance" or "coverage"


def _anchor_extents(cfg: SamplerConfig) -> list[tuple[int, int]]:
    extents = []
    for scale in cfg.anchor_scales:
        for ratio in cfg.anchor_ratios:
            h = max(1, int(math.floor(scale * math.sqrt(ratio) + 0.5)))
            w = max(1, int(math.floor(scale / math.sqrt(ratio) + 0.5)))
            extents.append((h, w))
    return extents


def _clamped_rects(rows, cols, extents, height, width):
    """Anchor rects per (candidate, anchor), intersected with the map.

    Rects are clipped, not shifted: a window hanging off one edge loses
    the outside part instead of sliding inward, so its in-map footprint
    never reaches past where the centered window would.
    """
    n = rows.shape[0]
    k = len(extents)
    hs = np.array([e[0] for e in extents])[None, :]
    ws = np.array([e[1] for e in extents])[None, :]
    top = np.clip(rows[:, None] - hs // 2, 0, None)
    left = np.clip(cols[:, None] - ws // 2, 0, None)
    bottom = np.clip(rows[:, None] - hs // 2 + hs, None, height)
    right = np.clip(cols[:, None] - ws // 2 + ws, None, width)
    assert top.shape == (n, k)
    return top, left, bottom, right


def _rect_var(map64: np.ndarray, top, left, bottom, right) -> np.ndarray:
    """Population variance over all values (channels flattened) per rect.

    Uses summed-area tables so each rect costs O(1); rects come in as
    same-shaped integer index arrays.
    """
    c = map64.shape[0]
    flat_sum = map64.sum(axis=0)
    flat_sq = (map64 * map64).sum(axis=0)
    s1 = np.zeros((flat_sum.shape[0] + 1, flat_sum.shape[1] + 1))
    s2 = np.zeros_like(s1)
    s1[1:, 1:] = flat_sum.cumsum(axis=0).cumsum(axis=1)
    s2[1:, 1:] = flat_sq.cumsum(axis=0).cumsum(axis=1)

    def boxsum(table, t, l, b, r):
        return table[b, r] - table[t, r] - table[b, l] + table[t, l]

    count = (bottom - top) * (right - left) * c
    total = boxsum(s1, top, left, bottom, right)
    total_sq = boxsum(s2, top, left, bottom, right)
    mean = total / count
    return np.maximum(total_sq / count - mean * mean, 0.0)


def sample_regions(x: FeatureMap, cfg: SamplerConfig) -> list[RegionSample]:
    """Draw exactly ``num_samples`` regions with distinct centers."""
    height, width = x.height, x.width
    n_cand = math.ceil(cfg.overgen_factor * cfg.num_samples)
    if cfg.num_samples > n_cand:
        raise ShapeError("num_samples exceeds the candidate pool")
    if n_cand > height * width:
        raise ShapeError(
            f"candidate pool {n_cand} exceeds the {height}x{width} grid"
        )

    rng = np.random.default_rng(cfg.seed)
    flat = rng.choice(height * width, size=n_cand, replace=False)
    rows, cols = np.divmod(flat, width)

    extents = _anchor_extents(cfg)
    top, left, bottom, right = _clamped_rects(rows, cols, extents, height, width)
    scores = _rect_var(x.data.astype(np.float64), top, left, bottom, right).sum(axis=1)

    n_importance = math.floor(cfg.importance_fraction * cfg.num_samples)
    # One uniform per candidate regardless of weights keeps the RNG
    # stream layout fixed across inputs with the same config.
    u = rng.random(n_cand)
    chosen: list[int] = []
    if n_importance:
        positive = np.flatnonzero(scores > 0)
        keys = np.full(n_cand, -np.inf)
        keys[positive] = np.log(u[positive]) / scores[positive]
        take = min(n_importance, positive.size)
        if take:
            order = np.argsort(keys)[::-1]
            chosen.extend(order[:take].tolist())
        shortfall = n_importance - take
        if shortfall:  # constant map: fall back to uniform among zero-score
            zero = np.setdiff1d(np.arange(n_cand), chosen)
            picked = rng.choice(zero, size=shortfall, replace=False)
            chosen.extend(picked.tolist())
    importance_count = len(chosen)

    remainder = cfg.num_samples - importance_count
    if remainder:
        rest = np.setdiff1d(np.arange(n_cand), chosen)
        picked = rng.choice(rest, size=remainder, replace=False)
        chosen.extend(picked.tolist())

    anchor_idx = rng.integers(0, len(extents), size=cfg.num_samples)
    samples = []
    for rank, cand in enumerate(chosen):
        a = int(anchor_idx[rank])
        rect = (
            int(top[cand, a]),
            int(left[cand, a]),
            int(bottom[cand, a] - top[cand, a]),
            int(right[cand, a] - left[cand, a]),
        )
        samples.append(
            RegionSample(
                center=(int(rows[cand]), int(cols[cand])),
                rect=rect,
                score=float(scores[cand]),
                origin="importance" if rank < importance_count else "coverage",
            )
        )
    return samples


def scale_region(sample: RegionSample, from_dims, to_dims) -> RegionSample:
    """Map a sample between feature grids, round-half-up, clamped, size >= 1."""
    fh, fw = from_dims
    th, tw = to_dims
    if min(fh, fw, th, tw) < 1:
        raise ShapeError(f"grid dims must be >= 1, got {from_dims} -> {to_dims}")

    def half_up(v: float) -> int:
        return int(math.floor(v + 0.5))

    ry, rx = th / fh, tw / fw
    top = min(max(half_up(sample.rect[0] * ry), 0), th - 1)
    left = min(max(half_up(sample.rect[1] * rx), 0), tw - 1)
    h = min(max(half_up(sample.rect[2] * ry), 1), th - top)
    w = min(max(half_up(sample.rect[3] * rx), 1), tw - left)
    cy = min(max(half_up(sample.center[0] * ry), 0), th - 1)
    cx = min(max(half_up(sample.center[1] * rx), 0), tw - 1)
    return RegionSample(
        center=(cy, cx), rect=(top, left, h, w), score=sample.score, origin=sample.origin
    )


def crop_region(x: FeatureMap, rect) -> FeatureMap:
    """Extract the (top, left, height, width) rect as its own map."""
    top, left, h, w = rect
    if h < 1 or w < 1:
        raise ShapeError(f"rect extent must be >= 1, got {rect}")
    if top < 0 or left < 0 or top + h > x.height or left + w > x.width:
        raise ShapeError(f"rect {rect} exceeds map {x.height}x{x.width}")
    return feature_map(x.data[:, top : top + h, left : left + w])
