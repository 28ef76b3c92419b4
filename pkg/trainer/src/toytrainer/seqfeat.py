"""Sequence features for the discriminator, in-graph.

Masked per-column (or per-row) feature means over a region's bounding box,
differentiable w.r.t. the feature map, plus the mining of positive regions
(ground-truth shrink components) and negatives (predicted components
disjoint from ground truth, and random background boxes).
"""

from __future__ import annotations

import numpy as np
import torch
from scipy import ndimage

_EIGHT = np.ones((3, 3), np.int32)


def region_sequence(feat: torch.Tensor, mask: np.ndarray) -> torch.Tensor | None:
    """(C, H, W) features + binary region mask -> (T, C) sequence.

    Sums run along the shorter box side so steps follow the longer one;
    empty steps are dropped. Differentiable w.r.t. ``feat``.
    """
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return None
    r0, r1 = rows.min(), rows.max() + 1
    c0, c1 = cols.min(), cols.max() + 1
    box = torch.from_numpy(mask[r0:r1, c0:c1].astype(np.float32))
    valid = feat[:, r0:r1, c0:c1] * box
    if c1 - c0 >= r1 - r0:
        counts = box.sum(dim=0)
        sums = valid.sum(dim=1)
    else:
        counts = box.sum(dim=1)
        sums = valid.sum(dim=2)
    keep = counts > 0
    return (sums[:, keep] / counts[keep]).T


def mine_regions(gt_quarter: np.ndarray, pred_quarter: np.ndarray, rng: np.random.Generator,
                 max_pos: int = 4, max_neg: int = 4):
    """Region masks + labels for the discriminator, at quarter resolution.

    Positives: ground-truth shrink components. Negatives: components of the
    thresholded prediction that do not touch ground truth, padded with
    random background boxes.
    """
    regions: list[tuple[np.ndarray, float]] = []
    gt_pos = gt_quarter == 1
    lab, n = ndimage.label(gt_pos, structure=_EIGHT)
    for i in range(1, min(n, max_pos) + 1):
        regions.append((lab == i, 1.0))

    negatives = []
    plab, pn = ndimage.label(pred_quarter > 0.5, structure=_EIGHT)
    for i in range(1, pn + 1):
        comp = plab == i
        if comp.sum() >= 4 and not (comp & gt_pos).any():
            negatives.append(comp)
        if len(negatives) >= max_neg:
            break
    h, w = gt_quarter.shape
    attempts = 0
    while len(negatives) < max_neg and attempts < 20:
        attempts += 1
        bh = int(rng.integers(2, max(3, h // 6)))
        bw = int(rng.integers(2, max(3, w // 4)))
        r = int(rng.integers(0, h - bh))
        c = int(rng.integers(0, w - bw))
        box = np.zeros((h, w), bool)
        box[r:r + bh, c:c + bw] = True
        if not (box & gt_pos).any():
            negatives.append(box)
    regions.extend((m, 0.0) for m in negatives)
    return regions


def discriminator_batch(feat: torch.Tensor, regions) -> tuple[torch.Tensor, torch.Tensor, list[int]] | None:
    """Pad mined region sequences into an LSTM batch."""
    seqs, labels = [], []
    for mask, label in regions:
        seq = region_sequence(feat, mask)
        if seq is not None:
            seqs.append(seq)
            labels.append(label)
    if not seqs:
        return None
    lengths = [s.shape[0] for s in seqs]
    padded = torch.nn.utils.rnn.pad_sequence(seqs, batch_first=True)
    return padded, torch.tensor(labels), lengths
