"""Distillation losses over structural and statistical texture features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import NumericError, ShapeError
from .tiem import StatFeature

COV_EPSILON = 1e-6
KL_FLOOR = 1e-8


@dataclass(frozen=True)
class QclTerms:
    """Quantization-congruence loss pieces plus the teacher statistics."""

    stat_loss: float
    corr_teacher: float
    corr_student: float
    total: float
    mean: np.ndarray
    covariance: np.ndarray


def stat_feature_loss(teacher: np.ndarray, student: np.ndarray, region_dims) -> float:
    """Sum of squared differences over all entries, over region pixel count."""
    t = np.asarray(teacher, dtype=np.float64)
    s = np.asarray(student, dtype=np.float64)
    if t.shape != s.shape:
        raise ShapeError(f"stat shapes differ: {t.shape} vs {s.shape}")
    h, w = region_dims
    if h < 1 or w < 1:
        raise ShapeError(f"region dims must be >= 1, got {region_dims}")
    diff = t - s
    return float(np.sum(diff * diff) / (w * h))


def mahalanobis_corr(rows: np.ndarray, mean: np.ndarray, covariance: np.ndarray) -> np.ndarray:
    """Mahalanobis distance of each row from ``mean`` under ``covariance``.

    The covariance is regularized with ``COV_EPSILON * I`` and factored
    by Cholesky; failure raises, since the matrix is then not usable as
    a distribution.
    """
    x = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    mu = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(covariance, dtype=np.float64)
    d = mu.size
    if x.shape[1] != d or cov.shape != (d, d):
        raise ShapeError(
            f"rows {x.shape}, mean {mu.shape}, covariance {cov.shape} disagree"
        )
    reg = cov + COV_EPSILON * np.eye(d)
    try:
        factor = np.linalg.cholesky(reg)
    except np.linalg.LinAlgError as exc:
        raise NumericError("covariance is singular even after regularization") from exc
    centered = x - mu
    solved = cho_solve((factor, True), centered.T)
    return np.sqrt(np.sum(centered.T * solved, axis=0))


def qcl_loss(teacher: StatFeature, student: StatFeature, region_dims) -> QclTerms:
    """Stat-feature distance plus the level-feature correlation gap.

    Teacher rows define the reference distribution (their mean and
    population covariance); both feature sets are scored against it and
    the student-minus-teacher gap is added to the stat loss.
    """
    t_rows = teacher.levels2
    s_rows = student.levels2
    if t_rows.shape != s_rows.shape:
        raise ShapeError(f"level-feature shapes differ: {t_rows.shape} vs {s_rows.shape}")
    stat_loss = stat_feature_loss(teacher.stat, student.stat, region_dims)
    mu = t_rows.mean(axis=0)
    centered = t_rows - mu
    cov = centered.T @ centered / t_rows.shape[0]
    corr_t = float(np.sum(mahalanobis_corr(t_rows, mu, cov)))
    corr_s = float(np.sum(mahalanobis_corr(s_rows, mu, cov)))
    return QclTerms(
        stat_loss=stat_loss,
        corr_teacher=corr_t,
        corr_student=corr_s,
        total=stat_loss + (corr_s - corr_t),
        mean=mu,
        covariance=cov,
    )


def response_kl_loss(teacher: np.ndarray, student: np.ndarray) -> float:
    """Pixel-averaged KL(teacher || student) over per-pixel distributions.

    Inputs are (K, H, W) probability maps; each pixel's K values must be
    non-negative and sum to 1 within 1e-5. A 1e-8 floor inside the logs
    guards empty classes.
    """
    t = np.asarray(teacher, dtype=np.float64)
    s = np.asarray(student, dtype=np.float64)
    if t.shape != s.shape or t.ndim != 3:
        raise ShapeError(f"probability maps must share a (K, H, W) shape: {t.shape} vs {s.shape}")
    for name, m in (("teacher", t), ("student", s)):
        if np.any(m < 0.0):
            raise NumericError(f"{name} probabilities contain negative values")
        sums = m.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > 1e-5:
            raise NumericError(f"{name} probabilities do not sum to 1 per pixel")
    log_ratio = np.log(np.maximum(t, KL_FLOOR)) - np.log(np.maximum(s, KL_FLOOR))
    per_pixel = np.sum(t * log_ratio, axis=0)
    return float(per_pixel.sum() / (t.shape[1] * t.shape[2]))


def total_loss(
    seg: float,
    structural: float,
    statistical: float,
    response: float,
    adversarial: float = 0.0,
    lambda1: float = 0.9,
    lambda2: float = 3.0,
    lambda3: float = 0.01,
) -> float:
    """Scalar training objective combining all terms.

    The adversarial term is an externally supplied scalar; nothing here
    trains or evaluates a discriminator.
    """
    return float(
        seg
        + lambda1 * (structural + statistical)
        + lambda2 * response
        - lambda3 * adversarial
    )
