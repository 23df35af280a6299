"""Scaling and normalization transforms applied to predictions before scoring.

Transforms act on the predicted side only; truths are never rescaled.
Chains applied through apply_chain are recorded on the pair so reports can
state exactly what was done to the predictions.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .effects import EffectMatrix, EffectPair
from .errors import BadParameter, NonpositiveScale, ZeroPredictionNorm
from .metrics import sign_vector


class TransformKind(Enum):
    GLOBAL_SCALE = "scale"
    NORM_MATCH_L1 = "norm-match:l1"
    NORM_MATCH_L2 = "norm-match:l2"
    SIGN_PROJECT = "sign"


CHAIN_GRAMMAR = "scale:<c> | norm-match:l1 | norm-match:l2 | sign:<threshold>"


@dataclass(frozen=True)
class TransformDescriptor:
    """One transform plus its parameter (scale factor or sign threshold)."""

    kind: TransformKind
    parameter: float | None = None

    def __post_init__(self):
        if self.kind is TransformKind.GLOBAL_SCALE:
            if (
                self.parameter is None
                or not np.isfinite(self.parameter)
                or self.parameter <= 0.0
            ):
                raise NonpositiveScale("scale factor must be a finite positive number")
        elif self.kind is TransformKind.SIGN_PROJECT:
            if self.parameter is None or not np.isfinite(self.parameter) or self.parameter < 0.0:
                raise BadParameter("sign threshold must be finite and >= 0")
        elif self.parameter is not None:
            raise BadParameter(f"{self.kind.value} takes no parameter")

    @property
    def token(self) -> str:
        if self.kind is TransformKind.GLOBAL_SCALE:
            return f"scale:{self.parameter:g}"
        if self.kind is TransformKind.SIGN_PROJECT:
            return f"sign:{self.parameter:g}"
        return self.kind.value


def global_scale(predicted: EffectMatrix, c: float) -> EffectMatrix:
    """Multiply every entry by a positive constant; labels unchanged."""
    if not np.isfinite(c) or c <= 0.0:
        raise NonpositiveScale(f"scale factor must be positive and finite, got {c!r}")
    return predicted.with_values(predicted.values * float(c))


def norm_match(pair: EffectPair, p_norm: int) -> EffectPair:
    """Rescale each predicted row so its p-norm equals the matching truth row's.

    Row i is multiplied by c_i = |truth_i|_p / |predicted_i|_p. A zero-norm
    predicted row cannot be matched by scaling and is a hard error.
    """
    if p_norm not in (1, 2):
        raise BadParameter(f"p_norm must be 1 or 2, got {p_norm!r}")
    predicted = pair.predicted.values
    truth = pair.truth.values
    if p_norm == 1:
        pred_norms = np.abs(predicted).sum(axis=1)
        true_norms = np.abs(truth).sum(axis=1)
    else:
        pred_norms = np.sqrt((predicted**2).sum(axis=1))
        true_norms = np.sqrt((truth**2).sum(axis=1))
    zero = np.flatnonzero(pred_norms == 0.0)
    if zero.size:
        pid = pair.perturbation_ids[int(zero[0])]
        raise ZeroPredictionNorm(f"predicted row {pid!r} has zero l{p_norm} norm")
    scaled = predicted * (true_norms / pred_norms)[:, None]
    return pair.with_predicted(pair.predicted.with_values(scaled))


def sign_project(predicted: EffectMatrix, threshold: float = 0.0) -> EffectMatrix:
    """Replace each row by its sign vector (values in {-1, 0, 1})."""
    out = np.vstack([sign_vector(row, threshold) for row in predicted.values])
    return predicted.with_values(out)


def apply_chain(pair: EffectPair, chain) -> EffectPair:
    """Apply descriptors left to right to the predicted side, recording provenance."""
    out = pair
    for descriptor in tuple(chain):
        if descriptor.kind is TransformKind.GLOBAL_SCALE:
            out = out.with_predicted(
                global_scale(out.predicted, descriptor.parameter), (descriptor,)
            )
        elif descriptor.kind is TransformKind.NORM_MATCH_L1:
            matched = norm_match(out, 1)
            out = matched.with_predicted(matched.predicted, (descriptor,))
        elif descriptor.kind is TransformKind.NORM_MATCH_L2:
            matched = norm_match(out, 2)
            out = matched.with_predicted(matched.predicted, (descriptor,))
        elif descriptor.kind is TransformKind.SIGN_PROJECT:
            out = out.with_predicted(
                sign_project(out.predicted, descriptor.parameter), (descriptor,)
            )
        else:
            raise BadParameter(f"unhandled transform kind {descriptor.kind!r}")
    return out


def parse_chain(text: str) -> tuple[TransformDescriptor, ...]:
    """Parse a comma-separated transform chain; grammar: scale:<c> | norm-match:l1 | norm-match:l2 | sign:<threshold>."""
    text = text.strip()
    if not text:
        return ()
    out = []
    for token in text.split(","):
        token = token.strip()
        if token == "norm-match:l1":
            out.append(TransformDescriptor(TransformKind.NORM_MATCH_L1))
        elif token == "norm-match:l2":
            out.append(TransformDescriptor(TransformKind.NORM_MATCH_L2))
        elif token.startswith("scale:"):
            out.append(TransformDescriptor(TransformKind.GLOBAL_SCALE, _number(token, "scale")))
        elif token.startswith("sign:"):
            out.append(TransformDescriptor(TransformKind.SIGN_PROJECT, _number(token, "sign")))
        else:
            raise BadParameter(f"unknown transform {token!r}; grammar: {CHAIN_GRAMMAR}")
    return tuple(out)


def chain_tokens(chain) -> list[str]:
    return [descriptor.token for descriptor in chain]


def _number(token: str, prefix: str) -> float:
    raw = token[len(prefix) + 1 :]
    try:
        return float(raw)
    except ValueError:
        raise BadParameter(f"bad {prefix} parameter {raw!r}; grammar: {CHAIN_GRAMMAR}") from None
