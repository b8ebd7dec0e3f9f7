"""Cascaded pyramid + directional decomposition and the structural loss.

Each level peels one pyramid step off the running lowpass, decimates
that level's highpass onto the level grid, and fans it out into
directional subbands; level ``n`` stacks therefore live at
``H / factor**n`` x ``W / factor**n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dfb import DfbConfig, dfb_decompose
from .errors import ShapeError
from .pyramid import LpConfig, lp_analyze
from .tensor_io import FeatureMap, feature_map


@dataclass(frozen=True)
class CdmConfig:
    num_levels: int = 2
    dfb_levels: tuple = (4, 3)
    lp: LpConfig = field(default_factory=LpConfig)
    transition_width: float = 0.1

    def __post_init__(self):
        if self.num_levels < 1:
            raise ShapeError(f"num_levels must be >= 1, got {self.num_levels}")
        if len(self.dfb_levels) != self.num_levels:
            raise ShapeError(
                f"need one dfb level per stage: {len(self.dfb_levels)} != {self.num_levels}"
            )


@dataclass(frozen=True)
class StructuralFeature:
    """Per-level stacks of directional subbands, level n at H/p**n."""

    levels: tuple

    def flattened(self) -> np.ndarray:
        return np.concatenate([stack.ravel() for stack in self.levels])


def cdm_forward(x: FeatureMap, cfg: CdmConfig = CdmConfig()) -> StructuralFeature:
    """Decompose a map into per-level directional subband stacks."""
    p = cfg.lp.factor
    _, h, w = x.shape
    for n, m in enumerate(cfg.dfb_levels, start=1):
        if h % p or w % p:
            raise ShapeError(
                f"dims must divide {p} at every level; level {n} sees {h}x{w}"
            )
        h //= p
        w //= p
        if 2**m > min(h, w):
            raise ShapeError(
                f"level {n} grid {h}x{w} too small for 2**{m} directional wedges"
            )

    stacks = []
    current = x
    for m in cfg.dfb_levels:
        low, high = lp_analyze(current, cfg.lp)
        band = feature_map(high.data[:, ::p, ::p])
        subbands = dfb_decompose(band, DfbConfig(m, cfg.transition_width))
        stacks.append(np.stack([sb.data for sb in subbands]))
        current = low
    return StructuralFeature(levels=tuple(stacks))


def structural_loss(teacher: StructuralFeature, student: StructuralFeature) -> float:
    """Mean over levels of the per-level sum of squared differences / (W*H)."""
    if len(teacher.levels) != len(student.levels):
        raise ShapeError(
            f"level count mismatch: {len(teacher.levels)} vs {len(student.levels)}"
        )
    per_level = []
    for t, s in zip(teacher.levels, student.levels):
        if t.shape != s.shape:
            raise ShapeError(f"level shape mismatch: {t.shape} vs {s.shape}")
        diff = t.astype(np.float64) - s.astype(np.float64)
        h, w = t.shape[-2:]
        per_level.append(np.sum(diff * diff) / (w * h))
    return float(np.mean(per_level))
