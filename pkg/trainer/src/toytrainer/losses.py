"""Training losses in torch, mirroring the toolkit's reference oracles:
soft dice with ignore-region exclusion, clamped BCE, weighted total.
"""

from __future__ import annotations

import torch

IGN = 255
EPS = 1.0
BCE_CLAMP = 1e-7


def dice_loss(pred: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    """Per-sample soft dice, averaged over the batch.

    ``pred`` is (B, H, W) probabilities, ``gt`` (B, H, W) uint8 tri-state;
    IGN cells are excluded from all sums. Computed in float64 so values
    match the reference oracle to well under 1e-5.
    """
    valid = (gt != IGN).double()
    g = (gt == 1).double() * valid
    p = pred.double() * valid
    inter = (p * g).sum(dim=(1, 2))
    denom = p.sum(dim=(1, 2)) + g.sum(dim=(1, 2)) + EPS
    return (1.0 - (2.0 * inter + EPS) / denom).mean()


def bce_loss(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean clamped binary cross-entropy over mined region samples."""
    p = torch.sigmoid(logits.double()).clamp(BCE_CLAMP, 1.0 - BCE_CLAMP)
    return -(labels.double() * p.log() + (1.0 - labels.double()) * (1.0 - p).log()).mean()


def total_loss(l_shrink, l_margin, l_coarse, l_seq, weights) -> torch.Tensor:
    a, b, c, d = weights
    return a * l_shrink + b * l_margin + c * l_coarse + d * l_seq
