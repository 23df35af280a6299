"""Euclidean geometry of short distractors around a prediction direction.

Any candidate sitting on a ray orthogonal to the prediction can come
arbitrarily close to the prediction's distance floor as its length
shrinks: |pred - t u| approaches |pred| as t goes to 0. So the true effect
beats every orthogonal-ray candidate only when its own distance is at most
|pred|, which is a cosine condition. With matched norms the condition is
cosine >= 0.5, an angle of at most 60 degrees.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter, NonpositiveNorm

_BATCH = 1 << 14


@dataclass(frozen=True)
class CertificateResult:
    """Outcome of the orthogonal-ray safety check; safe iff margin >= 0."""

    safe: bool
    cosine: float
    threshold: float
    margin: float


@dataclass(frozen=True)
class MonteCarloRegionResult:
    """Fraction of uniformly random directions whose scaled point beats the truth."""

    dimension: int
    norm_ratio: float
    true_cosine: float
    samples: int
    fraction_closer: float
    standard_error: float


def orthogonal_ray_certificate(
    pred_norm: float, true_norm: float, cosine_to_true: float
) -> CertificateResult:
    """Check whether the truth beats every point on every ray orthogonal to the prediction.

    With |pred - t u|^2 = pred_norm^2 + t^2 for unit u orthogonal to the
    prediction, the infimum over t > 0 is pred_norm. The truth's distance
    satisfies d^2 = pred_norm^2 + true_norm^2 - 2 pred_norm true_norm cos,
    so d <= pred_norm reduces to cos >= true_norm / (2 pred_norm).
    """
    if not (np.isfinite(pred_norm) and pred_norm > 0.0):
        raise NonpositiveNorm(f"pred_norm must be positive, got {pred_norm!r}")
    if not (np.isfinite(true_norm) and true_norm > 0.0):
        raise NonpositiveNorm(f"true_norm must be positive, got {true_norm!r}")
    if not np.isfinite(cosine_to_true) or abs(cosine_to_true) > 1.0:
        raise BadParameter(f"cosine must lie in [-1, 1], got {cosine_to_true!r}")
    threshold = true_norm / (2.0 * pred_norm)
    margin = cosine_to_true - threshold
    return CertificateResult(margin >= 0.0, float(cosine_to_true), float(threshold), float(margin))


def region_fraction(
    dimension: int,
    norm_ratio: float,
    true_cosine: float,
    samples: int,
    seed: int,
    metric: str = "l2",
) -> MonteCarloRegionResult:
    """Monte Carlo estimate of how often a short random-direction distractor wins.

    The prediction is fixed at the first axis with unit norm; the truth is
    a unit vector at the requested cosine, built from the first axis plus
    one orthogonal completion axis. Directions u are sampled uniformly on
    the unit sphere and the fraction with |pred - norm_ratio u| strictly
    below the truth's distance is returned with its binomial standard
    error. Draws are partitioned into fixed-size batches with per-batch
    child seeds, so results are identical for any worker partitioning.
    """
    if dimension < 2:
        raise BadParameter("dimension must be at least 2")
    if samples < 1:
        raise BadParameter("samples must be at least 1")
    if not (np.isfinite(norm_ratio) and norm_ratio > 0.0):
        raise BadParameter(f"norm_ratio must be positive, got {norm_ratio!r}")
    if not np.isfinite(true_cosine) or abs(true_cosine) > 1.0:
        raise BadParameter(f"true_cosine must lie in [-1, 1], got {true_cosine!r}")
    if metric not in ("l1", "l2"):
        raise BadParameter(f"metric must be 'l1' or 'l2', got {metric!r}")

    pred = np.zeros(dimension)
    pred[0] = 1.0
    truth = np.zeros(dimension)
    truth[0] = true_cosine
    truth[1] = math.sqrt(max(0.0, 1.0 - true_cosine * true_cosine))
    if metric == "l2":
        true_distance = float(np.sqrt(((pred - truth) ** 2).sum()))
    else:
        true_distance = float(np.abs(pred - truth).sum())

    n_batches = (samples + _BATCH - 1) // _BATCH
    children = np.random.SeedSequence(seed).spawn(n_batches)
    wins = 0
    remaining = samples
    for child in children:
        rng = np.random.default_rng(child)
        m = min(_BATCH, remaining)
        remaining -= m
        draws = rng.standard_normal((m, dimension))
        norms = np.linalg.norm(draws, axis=1)
        while np.any(norms == 0.0):  # essentially unreachable; keeps the math valid
            bad = norms == 0.0
            draws[bad] = rng.standard_normal((int(bad.sum()), dimension))
            norms = np.linalg.norm(draws, axis=1)
        points = draws * (norm_ratio / norms)[:, None]
        points[:, 0] -= 1.0  # points now hold (norm_ratio * u) - pred
        if metric == "l2":
            dists = np.sqrt((points**2).sum(axis=1))
        else:
            dists = np.abs(points).sum(axis=1)
        wins += int((dists < true_distance).sum())

    fraction = wins / samples
    stderr = math.sqrt(fraction * (1.0 - fraction) / samples)
    return MonteCarloRegionResult(
        int(dimension), float(norm_ratio), float(true_cosine), int(samples), fraction, stderr
    )
