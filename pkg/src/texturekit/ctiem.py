"""Directional co-occurrence statistics over a full feature map.

Pixels are quantized exactly as in :mod:`texturekit.tiem` (fewer levels
by default); for each dilation step ``s`` the horizontal pixel pairs
``(i, j)`` and ``(i, j + s)`` vote into an ``N x N`` joint histogram
with weight ``E_left * E_right``. Since every pixel's encoding has a
single nonzero entry, the joint encoding is one triple per pair and is
kept sparse rather than materialized as an N*N*H*W tensor; a dense
oracle in the tests certifies the equivalence. Each step's histogram is
normalized on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError
from .tensor_io import FeatureMap, WeightSet, feature_map
from .tiem import _mlp, count_levels, denoise, quantize, self_similarity


@dataclass(frozen=True)
class Cooccurrence:
    """Sparse joint encoding for one dilation step.

    ``rows``/``cols`` give each horizontal pair's (left level, right
    level); ``weights`` the product of the two encoding values. The
    logical dense object indexed ``[m, n, i, j]`` is nonzero only at
    ``(rows[k], cols[k])`` for pair ``k = (i, j)``.
    """

    step: int
    num_levels: int
    grid: tuple  # (H, W - step): pair k sits at (i, j)
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def dense(self) -> np.ndarray:
        """Materialize (N, N, H, W-step); intended for small test cases."""
        h, w = self.grid
        out = np.zeros((self.num_levels, self.num_levels, h, w), dtype=np.float64)
        pair = np.arange(self.rows.size)
        out[self.rows, self.cols, pair // w, pair % w] = self.weights
        return out

    def histogram(self) -> np.ndarray:
        """Accumulate pair weights into the (N, N) joint histogram."""
        flat = np.zeros(self.num_levels * self.num_levels, dtype=np.float64)
        np.add.at(flat, self.rows * self.num_levels + self.cols, self.weights)
        return flat.reshape(self.num_levels, self.num_levels)


@dataclass(frozen=True)
class CooccurrenceState:
    levels: np.ndarray  # (N,)
    steps: tuple
    counts: dict  # step -> (N, N) normalized histogram
    denoised: dict  # step -> (N, N)
    stat: np.ndarray  # D, (C3_in, N, N) step-concatenated
    texture: FeatureMap  # T broadcast to C3 x H x W


def _encoding_grid(x: FeatureMap, num_levels: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    sim, g = self_similarity(x)
    levels, encoding = quantize(sim, num_levels)
    idx = encoding.argmax(axis=0).reshape(x.height, x.width)
    val = encoding.max(axis=0).reshape(x.height, x.width)
    return levels, idx, val, g


def cooccur(level_idx: np.ndarray, level_val: np.ndarray, num_levels: int, step: int) -> Cooccurrence:
    """Joint encoding of horizontal pairs at one dilation step.

    ``level_idx``/``level_val`` hold each pixel's single nonzero
    encoding entry on the H x W grid. Pairs running off the right edge
    are truncated.
    """
    h, w = level_idx.shape
    if step < 1:
        raise ShapeError(f"step must be >= 1, got {step}")
    if step >= w:
        raise ShapeError(f"step {step} leaves no pairs on width {w}")
    left = level_idx[:, : w - step]
    right = level_idx[:, step:]
    weight = level_val[:, : w - step] * level_val[:, step:]
    return Cooccurrence(
        step=step,
        num_levels=num_levels,
        grid=(h, w - step),
        rows=left.ravel().astype(np.int64),
        cols=right.ravel().astype(np.int64),
        weights=weight.ravel().astype(np.float64),
    )


def cooccur_count(joint: Cooccurrence) -> np.ndarray:
    """Normalized (N, N) co-occurrence histogram for one step."""
    hist = joint.histogram()
    total = hist.sum()
    if total <= 0.0:
        raise NumericError(f"step {joint.step}: joint encoding is all zero")
    return hist / total


def cooccur_denoise(counts: np.ndarray, threshold: float = 0.9) -> np.ndarray:
    """Same cap-and-redistribute rebalance as the 1-D path, over N*N bins."""
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise ShapeError(f"expected a square histogram, got {counts.shape}")
    return denoise(counts.ravel(), threshold).reshape(counts.shape)


def level_pair_grid(levels: np.ndarray) -> np.ndarray:
    """(2, N, N) grid with cell (m, n) holding [L_m, L_n]."""
    n = levels.size
    return np.stack(
        [
            np.broadcast_to(levels[:, None], (n, n)),
            np.broadcast_to(levels[None, :], (n, n)),
        ]
    )


def cooccur_stat(
    levels: np.ndarray,
    denoised_steps: dict,
    global_avg: np.ndarray,
    weights: WeightSet,
) -> np.ndarray:
    """Per-cell MLP over [L_m, L_n, C_mn] per step, mean vector appended.

    Output is step-concatenated along channels: (steps * (out + C), N, N).
    """
    n = levels.size
    pairs = level_pair_grid(levels)
    blocks = []
    for step in sorted(denoised_steps):
        hist = denoised_steps[step]
        if hist.shape != (n, n):
            raise ShapeError(f"step {step}: histogram shape {hist.shape} != ({n}, {n})")
        cells = np.concatenate([pairs, hist[None]], axis=0)  # (3, N, N)
        flat = cells.reshape(3, -1).T
        out = _mlp(flat, weights, "ctiem.mlp").T.reshape(-1, n, n)
        g = np.asarray(global_avg, dtype=np.float64)
        blocks.append(np.concatenate([out, np.broadcast_to(g[:, None, None], (g.size, n, n))]))
    return np.concatenate(blocks, axis=0)


def adapt_texture(stat: np.ndarray, weights: WeightSet, out_hw: tuple[int, int]) -> FeatureMap:
    """Per-cell MLP over the stat map, cell-mean, broadcast to the pixel grid."""
    c, n, n2 = stat.shape
    if n != n2:
        raise ShapeError(f"stat map must be square over cells, got {stat.shape}")
    flat = stat.reshape(c, -1).T
    mixed = _mlp(flat, weights, "ctiem.adapt")
    pooled = mixed.mean(axis=0)
    h, w = out_hw
    return feature_map(np.broadcast_to(pooled[:, None, None], (pooled.size, h, w)))


def ctiem_forward(
    x: FeatureMap,
    weights: WeightSet,
    num_levels: int = 8,
    threshold: float = 0.9,
    steps: tuple = (1, 3, 5),
) -> CooccurrenceState:
    """Full-map pipeline: quantize, per-step co-occurrence, adapt."""
    if not steps or len(set(steps)) != len(steps):
        raise ShapeError(f"steps must be distinct and non-empty, got {steps}")
    levels, idx, val, g = _encoding_grid(x, num_levels)
    counts = {}
    smoothed = {}
    for step in sorted(steps):
        joint = cooccur(idx, val, num_levels, int(step))
        counts[int(step)] = cooccur_count(joint)
        smoothed[int(step)] = cooccur_denoise(counts[int(step)], threshold)
    stat = cooccur_stat(levels, smoothed, g, weights)
    texture = adapt_texture(stat, weights, (x.height, x.width))
    return CooccurrenceState(
        levels=levels,
        steps=tuple(sorted(int(s) for s in steps)),
        counts=counts,
        denoised=smoothed,
        stat=stat,
        texture=texture,
    )
