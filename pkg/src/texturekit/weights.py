"""Reproducible default weight bundle.

Entry names and shapes (rows = output dim; ``C`` is the input channel
count, defaults ``hidden = 16``, ``stat_extra = 16``, ``c2 = 64``,
``c3 = 64``, ``steps = 3``):

===================  =========================
name                 shape
===================  =========================
tiem.mlp.w1          hidden x 2
tiem.mlp.b1          hidden
tiem.mlp.w2          stat_extra x hidden
tiem.mlp.b2          stat_extra
tiem.phi1/2/3        c2 x (C + stat_extra)
ctiem.mlp.w1         hidden x 3
ctiem.mlp.b1         hidden
ctiem.mlp.w2         stat_extra x hidden
ctiem.mlp.b2         stat_extra
ctiem.adapt.w1       hidden x steps*(stat_extra + C)
ctiem.adapt.b1       hidden
ctiem.adapt.w2       c3 x hidden
ctiem.adapt.b2       c3
===================  =========================

Matrices draw from uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)),
from one generator seeded 42 in the table order above; biases are zero.
"""

from __future__ import annotations

import numpy as np

from .tensor_io import FeatureMap, WeightSet, feature_map

DEFAULT_SEED = 42


def _matrix(rng, rows: int, cols: int) -> FeatureMap:
    bound = np.sqrt(6.0 / (rows + cols))
    return feature_map(rng.uniform(-bound, bound, size=(1, rows, cols)))


def _zeros(length: int) -> FeatureMap:
    return feature_map(np.zeros((1, 1, length), dtype=np.float32))


def default_weight_set(
    channels: int,
    hidden: int = 16,
    stat_extra: int = 16,
    c2: int = 64,
    c3: int = 64,
    num_steps: int = 3,
    seed: int = DEFAULT_SEED,
) -> WeightSet:
    """Build the deterministic default bundle for ``channels`` inputs."""
    rng = np.random.default_rng(seed)
    c1 = channels + stat_extra
    entries = {
        "tiem.mlp.w1": _matrix(rng, hidden, 2),
        "tiem.mlp.b1": _zeros(hidden),
        "tiem.mlp.w2": _matrix(rng, stat_extra, hidden),
        "tiem.mlp.b2": _zeros(stat_extra),
        "tiem.phi1": _matrix(rng, c2, c1),
        "tiem.phi2": _matrix(rng, c2, c1),
        "tiem.phi3": _matrix(rng, c2, c1),
        "ctiem.mlp.w1": _matrix(rng, hidden, 3),
        "ctiem.mlp.b1": _zeros(hidden),
        "ctiem.mlp.w2": _matrix(rng, stat_extra, hidden),
        "ctiem.mlp.b2": _zeros(stat_extra),
        "ctiem.adapt.w1": _matrix(rng, hidden, num_steps * (stat_extra + channels)),
        "ctiem.adapt.b1": _zeros(hidden),
        "ctiem.adapt.w2": _matrix(rng, c3, hidden),
        "ctiem.adapt.b2": _zeros(c3),
    }
    return WeightSet(entries=entries)
