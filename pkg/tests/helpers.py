"""Shared construction helpers for the test suite."""

import numpy as np

from pdscore import EffectMatrix, EffectPair


def labels(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i:04d}" for i in range(n))


def pair_from(pred, truth, target_gene_of=None) -> EffectPair:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    perts = labels("P", pred.shape[0])
    genes = labels("G", pred.shape[1])
    return EffectPair(
        EffectMatrix(pred, perts, genes),
        EffectMatrix(truth, perts, genes),
        target_gene_of or {},
    )


def random_pair(rng: np.random.Generator, n: int = 8, p: int = 6, zero_fraction: float = 0.0):
    pred = rng.standard_normal((n, p))
    if zero_fraction > 0.0:
        pred[rng.random((n, p)) < zero_fraction] = 0.0
    truth = rng.standard_normal((n, p))
    return pair_from(pred, truth)
