"""Texture intensity statistics over a region.

The pipeline: cosine self-similarity of every pixel vector against the
region's mean vector; soft quantization of the similarities onto ``N``
ascending levels (each pixel hits exactly one level, with weight
``1 - |L_n - S_i|``); normalized occupancy counts; a single-pass
histogram rebalance that caps dominant bins at ``threshold * max`` and
redistributes the excess uniformly; a small MLP + learned pairwise
softmax graph that turns levels and counts into per-level feature rows;
and finally a re-projection of those rows through the encoding back
onto pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError
from .tensor_io import FeatureMap, WeightSet, feature_map

LEAKY_SLOPE = 0.01


@dataclass(frozen=True)
class QuantizationState:
    """Levels, per-pixel encoding, raw similarities, and the mean vector."""

    levels: np.ndarray  # (N,)
    encoding: np.ndarray  # (N, P)
    similarity: np.ndarray  # (P,)
    global_avg: np.ndarray  # (C,)


@dataclass(frozen=True)
class CountingMap:
    counts: np.ndarray  # (N,)
    denoised: np.ndarray  # (N,)
    threshold: float


@dataclass(frozen=True)
class StatFeature:
    stat: np.ndarray  # D, (N, C1)
    graph: np.ndarray  # X, (N, N), columns sum to 1
    levels2: np.ndarray  # L', (N, C2)
    reprojection: FeatureMap  # R, C2 x H x W


def self_similarity(region: FeatureMap) -> tuple[np.ndarray, np.ndarray]:
    """Cosine similarity of each pixel vector against the region mean.

    Returns ``(S, g)`` with ``S`` flat over pixels (row-major) and ``g``
    the per-channel spatial mean. Zero pixel vectors get similarity 0.
    """
    data = region.data.astype(np.float64)
    g = data.mean(axis=(1, 2))
    # Dividing by the peak first makes a positive rescale of the input
    # cancel before any rounding; cosine is scale-invariant anyway.
    peak = np.abs(data).max()
    if peak == 0.0:
        raise NumericError("region mean vector is zero; similarity undefined")
    scaled = data / peak
    gs = scaled.mean(axis=(1, 2))
    g_norm = np.sqrt(np.sum(gs * gs))
    if g_norm == 0.0:
        raise NumericError("region mean vector is zero; similarity undefined")
    c = region.channels
    pixels = scaled.reshape(c, -1)
    dots = gs @ pixels
    norms = np.sqrt(np.sum(pixels * pixels, axis=0))
    sim = np.zeros(pixels.shape[1], dtype=np.float64)
    nz = norms > 0.0
    sim[nz] = dots[nz] / (g_norm * norms[nz])
    return sim, g


def quantize(similarity: np.ndarray, num_levels: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Soft-quantize similarities onto ``num_levels`` ascending levels.

    Similarities are affinely rescaled onto [1/N, 1] — the exact union
    of the half-open level windows ``(L_n - 0.5/N, L_n + 0.5/N]`` inside
    [0, 1] — so every pixel lands in exactly one window. Returns
    ``(levels, encoding)`` where ``encoding[n, i] = 1 - |L_n - S_i|``
    inside pixel i's window and 0 elsewhere.
    """
    s = np.asarray(similarity, dtype=np.float64).ravel()
    if s.size == 0:
        raise ShapeError("similarity vector is empty")
    n = int(num_levels)
    if n < 2:
        raise ShapeError(f"num_levels must be >= 2, got {n}")
    lo, hi = s.min(), s.max()
    if lo == hi:
        raise NumericError("similarity is constant; quantization degenerate")
    scaled = 1.0 / n + (1.0 - 1.0 / n) * (s - lo) / (hi - lo)
    levels = np.arange(1, n + 1, dtype=np.float64) / n
    idx = np.ceil(scaled * n - 0.5).astype(np.int64)
    np.clip(idx, 1, n, out=idx)
    weights = 1.0 - np.abs(levels[idx - 1] - scaled)
    encoding = np.zeros((n, s.size), dtype=np.float64)
    encoding[idx - 1, np.arange(s.size)] = weights
    return levels, encoding


def count_levels(encoding: np.ndarray) -> np.ndarray:
    """Normalized level-occupancy histogram: row sums over column total."""
    total = encoding.sum()
    if total <= 0.0:
        raise NumericError("encoding is all zero; nothing to count")
    return encoding.sum(axis=1) / total


def denoise(counts: np.ndarray, threshold: float = 0.9) -> np.ndarray:
    """Cap bins at ``threshold * max`` and spread the excess uniformly.

    Mass is conserved exactly; ``threshold = 1`` is the identity and the
    uniform histogram is a fixed point for every threshold.
    """
    c = np.asarray(counts, dtype=np.float64)
    if not (0.0 < threshold <= 1.0):
        raise NumericError(f"threshold must be in (0, 1], got {threshold}")
    if c.size == 0 or np.any(c < 0.0):
        raise NumericError("counts must be a non-empty non-negative vector")
    cap = threshold * c.max()
    excess = np.sum(np.maximum(c - cap, 0.0))
    return np.where(c > cap, cap, c) + excess / c.size


def _mlp(x: np.ndarray, weights: WeightSet, prefix: str) -> np.ndarray:
    """Two-layer MLP, leaky-ReLU after the first layer; rows are inputs."""
    w1 = weights.matrix(f"{prefix}.w1")
    b1 = weights.vector(f"{prefix}.b1")
    w2 = weights.matrix(f"{prefix}.w2")
    b2 = weights.vector(f"{prefix}.b2")
    if x.shape[1] != w1.shape[1]:
        raise ShapeError(
            f"{prefix}.w1 expects {w1.shape[1]} inputs, got {x.shape[1]}"
        )
    if w1.shape[0] != w2.shape[1] or b1.size != w1.shape[0] or b2.size != w2.shape[0]:
        raise ShapeError(f"{prefix} layer shapes are inconsistent")
    hidden = x @ w1.T + b1
    hidden = np.where(hidden >= 0.0, hidden, LEAKY_SLOPE * hidden)
    return hidden @ w2.T + b2


def build_stat_feature(
    levels: np.ndarray,
    denoised: np.ndarray,
    global_avg: np.ndarray,
    weights: WeightSet,
) -> np.ndarray:
    """Per-level MLP over (L_n, C_n) rows, then append the mean vector."""
    n = levels.size
    if denoised.size != n:
        raise ShapeError(f"levels/counts mismatch: {n} vs {denoised.size}")
    pairs = np.stack([levels, denoised], axis=1)
    out = _mlp(pairs, weights, "tiem.mlp")
    broadcast = np.broadcast_to(np.asarray(global_avg, dtype=np.float64), (n, global_avg.size))
    return np.concatenate([out, broadcast], axis=1)


def _softmax_columns(m: np.ndarray) -> np.ndarray:
    shifted = m - m.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def equalize(
    stat: np.ndarray,
    encoding: np.ndarray,
    weights: WeightSet,
    out_hw: tuple[int, int],
) -> tuple[np.ndarray, np.ndarray, FeatureMap]:
    """Pairwise softmax graph over level features, then pixel re-projection.

    Returns ``(X, L', R)``: the column-normalized attention graph,
    the graph-mixed level features, and their re-projection through the
    raw encoding onto the ``out_hw`` pixel grid.
    """
    p1 = weights.matrix("tiem.phi1")
    p2 = weights.matrix("tiem.phi2")
    p3 = weights.matrix("tiem.phi3")
    for name, p in (("tiem.phi1", p1), ("tiem.phi2", p2), ("tiem.phi3", p3)):
        if p.shape[1] != stat.shape[1]:
            raise ShapeError(
                f"{name} expects {p.shape[1]} columns, stat has {stat.shape[1]}"
            )
    h, w = out_hw
    if encoding.shape[0] != stat.shape[0]:
        raise ShapeError(
            f"encoding rows {encoding.shape[0]} != stat rows {stat.shape[0]}"
        )
    if encoding.shape[1] != h * w:
        raise ShapeError(
            f"encoding has {encoding.shape[1]} pixels, grid wants {h * w}"
        )
    graph = _softmax_columns((stat @ p1.T) @ (stat @ p2.T).T)
    levels2 = graph @ (stat @ p3.T)
    reproj = feature_map((levels2.T @ encoding).reshape(-1, h, w))
    return graph, levels2, reproj


def tiem_forward(
    region: FeatureMap,
    weights: WeightSet,
    num_levels: int = 128,
    threshold: float = 0.9,
) -> tuple[QuantizationState, CountingMap, StatFeature]:
    """Full region pipeline: similarity -> quantize -> count -> equalize."""
    sim, g = self_similarity(region)
    levels, encoding = quantize(sim, num_levels)
    counts = count_levels(encoding)
    smoothed = denoise(counts, threshold)
    stat = build_stat_feature(levels, smoothed, g, weights)
    graph, levels2, reproj = equalize(
        stat, encoding, weights, (region.height, region.width)
    )
    return (
        QuantizationState(levels=levels, encoding=encoding, similarity=sim, global_avg=g),
        CountingMap(counts=counts, denoised=smoothed, threshold=threshold),
        StatFeature(stat=stat, graph=graph, levels2=levels2, reprojection=reproj),
    )
