"""Synthetic data with controllable geometry, plus independent brute-force oracles.

The pair generator places truths at isotropic random directions with
log-normal norms and builds each prediction at an exact requested cosine
to its own truth, so discrimination behavior can be dialed in directly.
The oracles recompute ranks by full sorting (not by comparison counting)
and recompute limit rankings from literal distance evaluations at a large
scale; they exist to cross-check the main implementations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .discrimination import ErrorPolicy, PdsEntry, PdsReport
from .effects import EffectPair, MaskedVectorView, anchor_excluded, row_view
from .effects import EffectMatrix
from .errors import BadParameter, BadSpec, ZeroVector
from .metrics import DistanceSpec, distance
from .preprocessing import CONTROL_LABEL, CountMatrix


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for an aligned pair with controlled norms, cosines, and scale."""

    n_perturbations: int
    n_genes: int
    target_cosine: float
    norm_mu: float = 0.0
    norm_sigma: float = 1.0
    prediction_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_perturbations < 2:
            raise BadSpec("need at least two perturbations")
        if self.n_genes < 2:
            raise BadSpec("need at least two genes for an orthogonal completion")
        if not (0.0 <= self.target_cosine <= 1.0):
            raise BadSpec("target_cosine must lie in [0, 1]")
        if self.norm_sigma < 0.0:
            raise BadSpec("norm_sigma must be >= 0")
        if not (np.isfinite(self.prediction_scale) and self.prediction_scale > 0.0):
            raise BadSpec("prediction_scale must be positive")


def _unit(rng: np.random.Generator, p: int) -> np.ndarray:
    while True:
        g = rng.standard_normal(p)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return g / norm


def _orthogonal_unit(rng: np.random.Generator, direction: np.ndarray) -> np.ndarray:
    # Gram-Schmidt against the direction; redraw on near collinearity.
    while True:
        g = rng.standard_normal(direction.shape[0])
        g -= (g @ direction) * direction
        residual = float(g @ g)
        if residual >= 1e-12:
            return g / math.sqrt(residual)


def generate(spec: SynthSpec) -> EffectPair:
    """Build an aligned pair; deterministic per seed, with per-row substreams."""
    n, p = spec.n_perturbations, spec.n_genes
    rho = spec.target_cosine
    ortho_weight = math.sqrt(max(0.0, 1.0 - rho * rho))
    truth = np.empty((n, p))
    predicted = np.empty((n, p))
    children = np.random.SeedSequence(spec.seed).spawn(n)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        direction = _unit(rng, p)
        norm = rng.lognormal(spec.norm_mu, spec.norm_sigma)
        completion = _orthogonal_unit(rng, direction)
        truth[i] = norm * direction
        predicted[i] = spec.prediction_scale * (rho * direction + ortho_weight * completion)
    width = max(4, len(str(n - 1)))
    pert_ids = tuple(f"P{i:0{width}d}" for i in range(n))
    gene_ids = tuple(f"G{j:0{max(4, len(str(p - 1)))}d}" for j in range(p))
    return EffectPair(
        EffectMatrix(predicted, pert_ids, gene_ids),
        EffectMatrix(truth, pert_ids, gene_ids),
    )


@dataclass(frozen=True)
class CountSynthSpec:
    """Recipe for Poisson counts with heterogeneous cell library sizes.

    Each condition (control plus each perturbation) has its own gene rate
    vector; perturbations multiply a random subset of the baseline rates by
    log-normal fold changes. Every cell scales its condition's rates by a
    log-normal cell factor, which spreads library sizes.
    """

    n_perturbations: int
    cells_per_condition: int
    n_genes: int
    mean_counts_per_cell: float = 2000.0
    libsize_sigma: float = 0.6
    effect_fraction: float = 0.1
    effect_log_fc_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_perturbations < 1:
            raise BadSpec("need at least one perturbation")
        if self.cells_per_condition < 1:
            raise BadSpec("need at least one cell per condition")
        if self.n_genes < 2:
            raise BadSpec("need at least two genes")
        if self.mean_counts_per_cell <= 0.0:
            raise BadSpec("mean_counts_per_cell must be positive")
        if self.libsize_sigma < 0.0 or self.effect_log_fc_sigma < 0.0:
            raise BadSpec("sigmas must be >= 0")
        if not (0.0 <= self.effect_fraction <= 1.0):
            raise BadSpec("effect_fraction must lie in [0, 1]")


def generate_counts(spec: CountSynthSpec) -> CountMatrix:
    """Draw a CountMatrix; deterministic per seed, with per-cell substreams."""
    root = np.random.SeedSequence(spec.seed)
    setup_seed, cells_seed = root.spawn(2)
    rng = np.random.default_rng(setup_seed)

    base = rng.lognormal(0.0, 1.0, spec.n_genes)
    base *= spec.mean_counts_per_cell / base.sum()
    width = max(4, len(str(spec.n_perturbations - 1)))
    pert_ids = [f"P{i:0{width}d}" for i in range(spec.n_perturbations)]
    rates = {CONTROL_LABEL: base}
    for pert in pert_ids:
        hit = rng.random(spec.n_genes) < spec.effect_fraction
        log_fc = rng.normal(0.0, spec.effect_log_fc_sigma, spec.n_genes) * hit
        rates[pert] = base * np.exp(log_fc)

    conditions = [CONTROL_LABEL] + pert_ids
    n_cells = len(conditions) * spec.cells_per_condition
    cell_children = cells_seed.spawn(n_cells)
    counts = np.empty((n_cells, spec.n_genes), dtype=np.int64)
    labels = []
    for c, child in enumerate(cell_children):
        condition = conditions[c // spec.cells_per_condition]
        labels.append(condition)
        cell_rng = np.random.default_rng(child)
        while True:
            factor = cell_rng.lognormal(0.0, spec.libsize_sigma)
            row = cell_rng.poisson(factor * rates[condition])
            if row.sum() >= 1:  # library size of at least one count
                counts[c] = row
                break
    return CountMatrix(counts, tuple(labels), tuple(f"G{j:04d}" for j in range(spec.n_genes)))


def _sorted_average_ranks(values: np.ndarray) -> np.ndarray:
    """Mid-ranks for every element, from explicit sorted tie runs."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    start = 0
    while start < order.size:
        stop = start
        while stop + 1 < order.size and values[order[stop + 1]] == values[order[start]]:
            stop += 1
        average = (start + stop) / 2.0 + 1.0
        ranks[order[start : stop + 1]] = average
        start = stop + 1
    return ranks


def oracle_pds(
    pair: EffectPair,
    spec: DistanceSpec,
    apply_target_mask: bool = False,
    error_policy: ErrorPolicy = ErrorPolicy.WORST,
) -> PdsReport:
    """Reference scorer: scalar distances plus full-sort average-of-tie ranks.

    Shares the measure definitions but none of the ranking code with
    compute_pds, so rank agreement is a meaningful cross-check.
    """
    n = pair.n_perturbations
    entries = []
    for i, pid in enumerate(pair.perturbation_ids):
        predicted_row, views = row_view(pair, pid, apply_target_mask)
        try:
            dists = np.array(
                [distance(spec, predicted_row, view.take(pair.truth.values)) for view in views]
            )
            ranks = _sorted_average_ranks(dists)
            rank = float(ranks[i])
            value = 1.0 - (rank - 1.0) / (n - 1.0)
            entries.append(PdsEntry(pid, float(dists[i]), rank, value))
        except ZeroVector as exc:
            if error_policy is ErrorPolicy.WORST:
                entries.append(PdsEntry(pid, float("nan"), float(n), 0.0, error=str(exc)))
            else:
                entries.append(
                    PdsEntry(pid, float("nan"), float("nan"), float("nan"), error=str(exc))
                )
    if error_policy is ErrorPolicy.SKIP:
        values = [e.pds for e in entries if e.error is None]
    else:
        values = [e.pds for e in entries]
    mean = float(np.mean(np.asarray(values, dtype=np.float64)))
    return PdsReport(
        spec, tuple(entries), mean, pair.transform_chain, apply_target_mask, error_policy
    )


def oracle_l1_limit(pair: EffectPair, c: float, apply_target_mask: bool = False) -> np.ndarray:
    """Brute-force l1 ranking of candidates for predictions scaled by c.

    Returns an (N, N) matrix of mid-ranks, one row per anchor, computed
    from literal |c a - r| distance evaluations; validates the corrected
    limit scores at large c.
    """
    if not (np.isfinite(c) and c > 0.0):
        raise BadParameter(f"c must be positive, got {c!r}")
    n = pair.n_perturbations
    truth = pair.truth.values
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        excluded = anchor_excluded(pair, i, apply_target_mask)
        a = c * MaskedVectorView(i, excluded).take(pair.predicted.values)
        dists = np.array(
            [
                np.abs(a - MaskedVectorView(j, excluded).take(truth)).sum()
                for j in range(n)
            ]
        )
        out[i] = _sorted_average_ranks(dists)
    return out


def oracle_ray_certificate(
    pred_norm: float,
    true_norm: float,
    cosine_to_true: float,
    grid: int = 4001,
    refinements: int = 3,
) -> bool:
    """Brute-force check of the orthogonal-ray certificate.

    Minimizes |pred - t u| over a t grid with local refinement for a unit u
    orthogonal to the prediction (the value depends only on t), then asks
    whether the truth's distance is at most that minimum.
    """
    true_distance = math.sqrt(
        pred_norm**2 + true_norm**2 - 2.0 * pred_norm * true_norm * cosine_to_true
    )
    lo, hi = 1e-9, 4.0 * max(pred_norm, true_norm)
    best = math.inf
    for _ in range(refinements):
        ts = np.linspace(lo, hi, grid)
        values = np.sqrt(pred_norm**2 + ts**2)
        k = int(np.argmin(values))
        best = min(best, float(values[k]))
        lo = max(1e-12, float(ts[max(0, k - 1)]) * 0.5)
        hi = float(ts[min(grid - 1, k + 1)])
    return true_distance <= best
