"""Containers for perturbation-effect matrices and aligned prediction/truth pairs.

Effect vectors are dense rows over a shared gene axis, one row per
perturbation. All containers are immutable after construction and safe to
share read-only across threads.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateLabel,
    EmptyIntersection,
    UnknownPerturbation,
    ValidationError,
)


def _readonly_matrix(values) -> np.ndarray:
    out = np.array(values, dtype=np.float64)
    out.setflags(write=False)
    return out


def _check_unique(labels: tuple[str, ...], axis_name: str) -> None:
    seen = set()
    for label in labels:
        if label in seen:
            raise DuplicateLabel(f"duplicate {axis_name} label {label!r}")
        seen.add(label)


@dataclass(frozen=True)
class EffectMatrix:
    """N perturbation-effect vectors over p genes, with row and column labels."""

    values: np.ndarray
    perturbation_ids: tuple[str, ...]
    gene_ids: tuple[str, ...]

    def __post_init__(self):
        values = _readonly_matrix(self.values)
        perturbation_ids = tuple(str(x) for x in self.perturbation_ids)
        gene_ids = tuple(str(x) for x in self.gene_ids)
        if values.ndim != 2:
            raise ValidationError("effect values must be a 2-d matrix")
        n, p = values.shape
        if n < 1 or p < 1:
            raise ValidationError("effect matrix needs at least one row and one column")
        if len(perturbation_ids) != n:
            raise ValidationError(f"{len(perturbation_ids)} perturbation ids for {n} rows")
        if len(gene_ids) != p:
            raise ValidationError(f"{len(gene_ids)} gene ids for {p} columns")
        _check_unique(perturbation_ids, "perturbation")
        _check_unique(gene_ids, "gene")
        if not np.isfinite(values).all():
            raise ValidationError("effect values must all be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "perturbation_ids", perturbation_ids)
        object.__setattr__(self, "gene_ids", gene_ids)

    @property
    def n_perturbations(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    def perturbation_index(self, perturbation_id: str) -> int:
        try:
            return self.perturbation_ids.index(perturbation_id)
        except ValueError:
            raise UnknownPerturbation(f"unknown perturbation {perturbation_id!r}") from None

    def with_values(self, values) -> "EffectMatrix":
        """Same labels, new values (used by transforms)."""
        return EffectMatrix(values, self.perturbation_ids, self.gene_ids)


@dataclass(frozen=True)
class EffectPair:
    """Aligned predicted/true effect matrices sharing labels in identical order.

    target_gene_of optionally maps a perturbation id to the gene it targets;
    scoring can exclude that gene from the perturbation's own comparisons.
    transform_chain records descriptors already applied to the predicted side.
    """

    predicted: EffectMatrix
    truth: EffectMatrix
    target_gene_of: dict = field(default_factory=dict)
    transform_chain: tuple = ()

    def __post_init__(self):
        if self.predicted.perturbation_ids != self.truth.perturbation_ids:
            raise ValidationError(
                "predicted and truth must list identical perturbations in identical order"
            )
        if self.predicted.gene_ids != self.truth.gene_ids:
            raise ValidationError("predicted and truth must list identical genes in identical order")
        genes = set(self.predicted.gene_ids)
        targets = {str(k): str(v) for k, v in dict(self.target_gene_of).items()}
        for pert, gene in targets.items():
            if gene not in genes:
                raise ValidationError(f"target gene {gene!r} of {pert!r} is not a gene of this pair")
        object.__setattr__(self, "target_gene_of", targets)
        object.__setattr__(self, "transform_chain", tuple(self.transform_chain))

    @property
    def perturbation_ids(self) -> tuple[str, ...]:
        return self.predicted.perturbation_ids

    @property
    def gene_ids(self) -> tuple[str, ...]:
        return self.predicted.gene_ids

    @property
    def n_perturbations(self) -> int:
        return self.predicted.n_perturbations

    @property
    def n_genes(self) -> int:
        return self.predicted.n_genes

    def with_predicted(self, predicted: EffectMatrix, extra_chain: tuple = ()) -> "EffectPair":
        return EffectPair(
            predicted, self.truth, self.target_gene_of, self.transform_chain + tuple(extra_chain)
        )


@dataclass(frozen=True)
class MaskedVectorView:
    """One matrix row with a set of excluded gene columns."""

    row_index: int
    excluded: tuple[int, ...]

    def take(self, values: np.ndarray) -> np.ndarray:
        row = values[self.row_index]
        if not self.excluded:
            return row
        keep = np.ones(row.shape[0], dtype=bool)
        keep[list(self.excluded)] = False
        return row[keep]


def align_pair(predicted: EffectMatrix, truth: EffectMatrix, target_gene_of=None) -> EffectPair:
    """Restrict two effect matrices to their shared labels, in lexicographic order.

    Rows and columns are reordered identically on both sides, so the result
    does not depend on the input file order. Target-gene entries whose
    perturbation or gene falls outside the intersection are dropped (a
    missing entry simply means no mask for that perturbation).
    """
    shared_perts = sorted(set(predicted.perturbation_ids) & set(truth.perturbation_ids))
    shared_genes = sorted(set(predicted.gene_ids) & set(truth.gene_ids))
    if len(shared_perts) < 2:
        raise EmptyIntersection(
            f"only {len(shared_perts)} shared perturbation(s); need at least 2"
        )
    if not shared_genes:
        raise EmptyIntersection("no shared genes")

    def reindex(m: EffectMatrix) -> EffectMatrix:
        row_of = {label: i for i, label in enumerate(m.perturbation_ids)}
        col_of = {label: j for j, label in enumerate(m.gene_ids)}
        rows = [row_of[x] for x in shared_perts]
        cols = [col_of[g] for g in shared_genes]
        return EffectMatrix(m.values[np.ix_(rows, cols)], tuple(shared_perts), tuple(shared_genes))

    pert_set = set(shared_perts)
    gene_set = set(shared_genes)
    targets = {
        pert: gene
        for pert, gene in dict(target_gene_of or {}).items()
        if pert in pert_set and gene in gene_set
    }
    return EffectPair(reindex(predicted), reindex(truth), targets)


def anchor_excluded(pair: EffectPair, anchor_index: int, apply_target_mask: bool) -> tuple[int, ...]:
    """Gene columns excluded when scoring one anchor perturbation.

    The anchor's own target gene (when declared) is excluded both from its
    predicted row and from every truth row it is compared against, keeping
    all comparisons for that anchor in one common subspace.
    """
    if not apply_target_mask:
        return ()
    pert = pair.perturbation_ids[anchor_index]
    gene = pair.target_gene_of.get(pert)
    if gene is None:
        return ()
    excluded = (pair.gene_ids.index(gene),)
    if pair.n_genes - len(excluded) < 1:
        raise ValidationError("masking would leave no gene coordinates")
    return excluded


def row_view(pair: EffectPair, perturbation_id: str, apply_target_mask: bool):
    """Masked predicted row plus per-truth-row views sharing the anchor's mask.

    Returns (predicted_row_values, views) where views holds one
    MaskedVectorView per truth row, all with the same excluded columns.
    """
    i = pair.predicted.perturbation_index(perturbation_id)
    excluded = anchor_excluded(pair, i, apply_target_mask)
    predicted_row = MaskedVectorView(i, excluded).take(pair.predicted.values)
    views = tuple(MaskedVectorView(j, excluded) for j in range(pair.n_perturbations))
    return predicted_row, views
