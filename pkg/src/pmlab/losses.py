"""Binary cross-entropy losses with per-label disambiguation weights.

Two conventions for non-candidate labels are supported:

* CONFIDENT_NEGATIVES (default): non-candidate labels are certainly
  irrelevant and are trained as negatives with weight 1; unidentified
  candidates (candidate but weight 0) contribute nothing.
* PAPER_LITERAL: only weighted candidate terms contribute. With no negative
  supervision at all the classifier drifts towards predicting every label,
  which is demonstrable as an ablation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .numeric import clamp_probs


class NegativeMode(str, enum.Enum):
    CONFIDENT_NEGATIVES = "CONFIDENT_NEGATIVES"
    PAPER_LITERAL = "PAPER_LITERAL"


@dataclass
class LossValue:
    total: float
    per_term: np.ndarray  # element-wise BCE values, same shape as probs
    grad_wrt_p: np.ndarray  # gradient of total w.r.t. probabilities


def _elementwise_bce(targets: np.ndarray, probs: np.ndarray) -> np.ndarray:
    p = clamp_probs(np.asarray(probs, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def _elementwise_bce_grad(targets: np.ndarray, probs: np.ndarray) -> np.ndarray:
    p = clamp_probs(np.asarray(probs, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64)
    return (p - y) / (p * (1.0 - p))


def bce(candidates_row: np.ndarray, probs_row: np.ndarray) -> LossValue:
    """Plain multi-label BCE for one sample, all candidates as targets."""
    y = np.asarray(candidates_row)
    p = np.asarray(probs_row)
    if y.shape != p.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {p.shape}")
    per_term = _elementwise_bce(y, p)
    grad = _elementwise_bce_grad(y, p)
    return LossValue(total=float(per_term.sum()), per_term=per_term, grad_wrt_p=grad)


def _effective_weights(
    candidates: np.ndarray, weights: np.ndarray, mode: NegativeMode
) -> np.ndarray:
    cand = np.asarray(candidates)
    w = np.asarray(weights)
    if cand.shape != w.shape:
        raise ValueError(f"shape mismatch: candidates {cand.shape} vs weights {w.shape}")
    if not np.isin(w, (0, 1)).all():
        raise ValueError("weights must be binary")
    if ((w == 1) & (cand == 0)).any():
        raise ValueError("weights must be zero on non-candidate entries")
    mode = NegativeMode(mode)
    if mode is NegativeMode.CONFIDENT_NEGATIVES:
        return np.where(cand == 1, w, 1).astype(np.float64)
    return w.astype(np.float64)


def weighted_bce(
    candidates: np.ndarray,
    weights: np.ndarray,
    probs: np.ndarray,
    mode: NegativeMode = NegativeMode.CONFIDENT_NEGATIVES,
) -> LossValue:
    """Weighted BCE over a batch, averaged over samples.

    Candidate entries use target 1 scaled by their weight; non-candidate
    entries use target 0 with weight per the negative mode.
    """
    cand = np.asarray(candidates)
    p = np.asarray(probs, dtype=np.float64)
    if cand.shape != p.shape:
        raise ValueError(f"shape mismatch: candidates {cand.shape} vs probs {p.shape}")
    eff = _effective_weights(cand, weights, mode)
    b = cand.shape[0]
    per_term = _elementwise_bce(cand, p)
    grad = eff * _elementwise_bce_grad(cand, p) / b
    total = float((eff * per_term).sum() / b)
    return LossValue(total=total, per_term=per_term, grad_wrt_p=grad)


def selfpaced_penalty(weights: np.ndarray, lam: float) -> float:
    """Curriculum penalty rewarding each active weight by lam."""
    w = np.asarray(weights)
    if lam <= 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if not np.isin(w, (0, 1)).all():
        raise ValueError("weights must be binary")
    return float(-lam * w.sum())


def cdcr_objective(
    candidates: np.ndarray,
    weights: np.ndarray,
    probs_on_augmented: np.ndarray,
    mode: NegativeMode = NegativeMode.CONFIDENT_NEGATIVES,
) -> LossValue:
    """Training objective: weighted BCE evaluated on augmented-view probabilities.

    The curriculum penalty is constant w.r.t. model parameters once the
    weights are fixed, so it is excluded here and tracked only in diagnostics.
    """
    return weighted_bce(candidates, weights, probs_on_augmented, mode)
