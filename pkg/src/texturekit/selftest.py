"""Built-in invariant checks behind ``texturekit selftest``.

Each check is small, seeded, and self-contained so the command runs in
seconds with no test framework installed.
"""

from __future__ import annotations

import numpy as np

from .cdm import CdmConfig, cdm_forward, structural_loss
from .ctiem import cooccur, cooccur_count
from .dfb import DfbConfig, dfb_decompose, dfb_reconstruct, directional_masks
from .losses import mahalanobis_corr, qcl_loss, response_kl_loss, total_loss
from .pyramid import LpConfig, lp_analyze, lp_synthesize
from .sampler import SamplerConfig, sample_regions
from .tensor_io import feature_map, snap_unit_sum
from .tiem import count_levels, denoise, quantize, tiem_forward
from .weights import default_weight_set


def _check_pyramid() -> str:
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        x = feature_map(rng.standard_normal((2, 16, 16)))
        low, high = lp_analyze(x)
        back = lp_synthesize(low, high)
        worst = max(worst, float(np.abs(back.data - x.data).max()))
    if worst >= 1e-6:
        raise AssertionError(f"reconstruction error {worst:.3e} >= 1e-6")
    flat = feature_map(np.full((1, 8, 8), 0.37, dtype=np.float32))
    low, high = lp_analyze(flat)
    if np.abs(high.data).max() >= 1e-6 or np.abs(low.data - 0.37).max() >= 1e-6:
        raise AssertionError("constant input does not stay constant")
    return f"max roundtrip error {worst:.2e}"


def _check_dfb() -> str:
    rng = np.random.default_rng(12)
    for m in (1, 3):
        masks = directional_masks(16, 16, DfbConfig(m))
        dev = float(np.abs(masks.sum(axis=0) - 1.0).max())
        if dev >= 1e-6:
            raise AssertionError(f"m={m}: mask sum deviates by {dev:.3e}")
    x = feature_map(rng.standard_normal((1, 16, 16)))
    back = dfb_reconstruct(dfb_decompose(x, DfbConfig(3)))
    err = float(np.abs(back.data - x.data).max())
    if err >= 1e-5:
        raise AssertionError(f"reconstruction error {err:.3e} >= 1e-5")
    return f"partition exact, roundtrip {err:.2e}"


def _check_selectivity() -> str:
    h = w = 32
    rows = np.arange(h, dtype=np.float64)[None, :, None]
    x = feature_map(np.broadcast_to(np.cos(2 * np.pi * 4 * rows / h), (1, h, w)).copy())
    bands = dfb_decompose(x, DfbConfig(3))
    energy = np.array([np.sum(b.data.astype(np.float64) ** 2) for b in bands])
    share = energy[:4].sum() / energy.sum()
    if share < 0.95:
        raise AssertionError(f"vertical group holds {share:.3f} < 0.95 of energy")
    return f"vertical group share {share:.3f}"


def _check_quantize() -> str:
    rng = np.random.default_rng(13)
    for _ in range(50):
        sim = rng.random(96)
        levels, enc = quantize(sim, 128)
        hits = (enc > 0).sum(axis=0)
        if not np.all(hits == 1):
            raise AssertionError("a pixel has != 1 nonzero encoding entry")
        counts = count_levels(enc)
        if abs(counts.sum() - 1.0) > 1e-9 or np.any(counts < 0):
            raise AssertionError("counts are not a distribution")
        if not np.all(np.diff(levels) > 0):
            raise AssertionError("levels are not strictly ascending")
    return "one window per pixel, counts normalized"


def _check_denoise() -> str:
    hand = denoise(np.array([0.7, 0.1, 0.1, 0.1]), 0.5)
    if not np.allclose(hand, [0.4375, 0.1875, 0.1875, 0.1875], atol=1e-12):
        raise AssertionError(f"hand case mismatch: {hand}")
    rng = np.random.default_rng(14)
    for theta in (0.5, 0.9, 1.0):
        c = rng.random(64)
        c /= c.sum()
        d = denoise(c, theta)
        if abs(d.sum() - c.sum()) > 1e-9:
            raise AssertionError(f"theta={theta}: mass not conserved")
        cap = theta * c.max() + (np.maximum(c - theta * c.max(), 0).sum()) / c.size
        if d.max() > cap + 1e-9:
            raise AssertionError(f"theta={theta}: cap bound violated")
    return "mass conserved, cap bound holds"


def _check_cooccur() -> str:
    rng = np.random.default_rng(15)
    _, enc = quantize(rng.random(16), 3)
    idx = enc.argmax(axis=0).reshape(4, 4)
    val = enc.max(axis=0).reshape(4, 4)
    for step in (1, 3):
        got = cooccur_count(cooccur(idx, val, 3, step))
        # dense double-loop oracle
        ref = np.zeros((3, 3))
        for i in range(4):
            for j in range(4 - step):
                ref[idx[i, j], idx[i, j + step]] += val[i, j] * val[i, j + step]
        ref /= ref.sum()
        if np.abs(got - ref).max() > 1e-9:
            raise AssertionError(f"step {step}: streamed counts disagree with oracle")
    return "streamed counts match the dense oracle"


def _check_sampler() -> str:
    rng = np.random.default_rng(16)
    x = feature_map(rng.random((1, 32, 32)))
    cfg = SamplerConfig(num_samples=8, seed=5)
    a = sample_regions(x, cfg)
    b = sample_regions(x, cfg)
    if a != b:
        raise AssertionError("same seed produced different samples")
    if len({s.center for s in a}) != len(a):
        raise AssertionError("duplicate centers in one draw")
    return "deterministic, centers distinct"


def _check_losses() -> str:
    rng = np.random.default_rng(17)
    region = feature_map(rng.random((2, 8, 8)))
    _, _, sf = tiem_forward(region, default_weight_set(2), num_levels=16)
    if qcl_loss(sf, sf, (8, 8)).total != 0.0:
        raise AssertionError("self-distillation loss is nonzero")
    p = rng.random((4, 5, 5))
    p /= p.sum(axis=0)
    q = rng.random((4, 5, 5))
    q /= q.sum(axis=0)
    if response_kl_loss(p, q) < 0.0 or response_kl_loss(p, p) != 0.0:
        raise AssertionError("KL identities violated")
    if total_loss(1, 1, 1, 1, 1) != 5.79:
        raise AssertionError("weighted total mismatch")
    rows = rng.standard_normal((6, 3))
    mu = rows.mean(axis=0)
    direct = np.sqrt(np.sum((rows - mu) ** 2, axis=1) / (1.0 + 1e-6))
    got = mahalanobis_corr(rows, mu, np.eye(3))
    if np.abs(got - direct).max() > 1e-6:
        raise AssertionError("identity-covariance distance mismatch")
    return "identities hold"


def _check_cdm() -> str:
    rng = np.random.default_rng(18)
    x = feature_map(rng.standard_normal((1, 32, 32)))
    feats = cdm_forward(x, CdmConfig())
    shapes = [stack.shape for stack in feats.levels]
    if shapes != [(16, 1, 16, 16), (8, 1, 8, 8)]:
        raise AssertionError(f"unexpected level shapes {shapes}")
    if structural_loss(feats, feats) != 0.0:
        raise AssertionError("self structural loss is nonzero")
    return "default stack shapes and self-loss hold"


def _check_snap() -> str:
    rng = np.random.default_rng(19)
    for _ in range(20):
        v = rng.random(128)
        v /= v.sum()
        snapped = snap_unit_sum(v.astype(np.float32))
        if abs(snapped.astype(np.float64).sum() - 1.0) > 1e-9:
            raise AssertionError("float32 distribution does not re-sum to 1")
        if np.any(snapped < 0):
            raise AssertionError("snap produced a negative bin")
    return "float32 distributions re-sum to 1"


CHECKS = (
    ("pyramid-roundtrip", _check_pyramid),
    ("dfb-partition", _check_dfb),
    ("dfb-selectivity", _check_selectivity),
    ("quantize-windows", _check_quantize),
    ("denoise-rebalance", _check_denoise),
    ("cooccur-streaming", _check_cooccur),
    ("sampler-determinism", _check_sampler),
    ("loss-identities", _check_losses),
    ("cdm-shapes", _check_cdm),
    ("simplex-snap", _check_snap),
)


def run_selftest(report=print) -> bool:
    """Run every check; report one line each; True when all pass."""
    ok = True
    for name, check in CHECKS:
        try:
            detail = check()
        except AssertionError as exc:
            report(f"FAIL {name}: {exc}")
            ok = False
        else:
            report(f"ok   {name}: {detail}")
    return ok
