"""Reference implementations of the training losses.

These are the numeric oracles the trainer is checked against: soft dice with
ignore-region semantics, clamped binary cross-entropy, and the weighted sum
of the four loss terms (shrink head, margin head, coarse head, sequence
discriminator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .masks import IGN, POS, _as_mask

EPS = 1.0          # dice smoothing, guards the empty-ground-truth case
BCE_CLAMP = 1e-7   # probability clamp, avoids log(0)


@dataclass
class LossWeights:
    """Weights of the four loss terms; defaults 1, 0.25, 0.25, 0.25."""

    alpha: float = 1.0
    beta: float = 0.25
    gamma: float = 0.25
    eta: float = 0.25

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "eta"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be >= 0")


def _valid_pred_gt(pred, gt):
    pred = np.asarray(pred, np.float64)
    gt = _as_mask(gt, "gt")
    if pred.shape != gt.shape:
        raise ValueError(f"pred/gt shapes differ: {pred.shape} vs {gt.shape}")
    if pred.min() < 0.0 or pred.max() > 1.0:
        raise ValueError("predictions must lie in [0, 1]")
    valid = gt != IGN
    return pred[valid], (gt[valid] == POS).astype(np.float64)


def dice_loss(pred, gt) -> float:
    """Soft dice loss 1 - (2*sum(p*g) + 1) / (sum(p) + sum(g) + 1).

    Cells marked IGN in the ground truth are excluded from all three sums.
    """
    p, g = _valid_pred_gt(pred, gt)
    inter = float(np.dot(p, g))
    return 1.0 - (2.0 * inter + EPS) / (float(p.sum()) + float(g.sum()) + EPS)


def dice_loss_grad(pred, gt) -> np.ndarray:
    """Analytic gradient of dice_loss w.r.t. each prediction cell.

    IGN cells get zero gradient; used to validate the trainer's autograd.
    """
    pred = np.asarray(pred, np.float64)
    gt = _as_mask(gt, "gt")
    if pred.shape != gt.shape:
        raise ValueError(f"pred/gt shapes differ: {pred.shape} vs {gt.shape}")
    valid = gt != IGN
    g = ((gt == POS) & valid).astype(np.float64)
    p = np.where(valid, pred, 0.0)
    inter = float((p * g).sum())
    denom = float(p.sum()) + float(g.sum()) + EPS
    grad = -(2.0 * g * denom - (2.0 * inter + EPS)) / (denom * denom)
    grad[~valid] = 0.0
    return grad


def bce_loss(pred: float, gt: int) -> float:
    """Binary cross-entropy -(g*ln(p) + (1-g)*ln(1-p)) with clamped p."""
    if gt not in (0, 1):
        raise ValueError(f"bce ground truth must be 0 or 1, got {gt}")
    p = min(max(float(pred), BCE_CLAMP), 1.0 - BCE_CLAMP)
    return -(gt * math.log(p) + (1 - gt) * math.log(1.0 - p))


def total_loss(l_shrink: float, l_margin: float, l_coarse: float, l_seq: float,
               weights: LossWeights | None = None) -> float:
    """Weighted sum of the four loss terms."""
    w = weights if weights is not None else LossWeights()
    terms = (l_shrink, l_margin, l_coarse, l_seq)
    if not all(math.isfinite(t) for t in terms):
        raise ValueError(f"loss terms must be finite, got {terms}")
    return w.alpha * l_shrink + w.beta * l_margin + w.gamma * l_coarse + w.eta * l_seq
