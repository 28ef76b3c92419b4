"""Sequential-feature pre-processing for the sequence discriminator.

A candidate region (binary mask) and a feature grid are reduced to an ordered
sequence of per-step channel vectors: masked means along the longer axis of
the region's bounding box, with empty steps dropped.
"""

from __future__ import annotations

import numpy as np

from .masks import POS, _as_mask


def sequence_projection(mask, feat) -> np.ndarray:
    """Project a masked feature grid to a (steps, channels) sequence.

    ``mask`` is (H, W) binary; ``feat`` is (C, H, W) or (H, W). Features are
    zeroed outside the mask, then summed along rows (when the region's
    bounding box is at least as wide as tall) or columns (otherwise) and
    divided by the per-step mask counts. Steps with no masked cells are
    dropped; the result is ordered by increasing coordinate.
    """
    mask = _as_mask(mask, "mask", binary=True)
    feat = np.asarray(feat, np.float64)
    if feat.ndim == 2:
        feat = feat[None]
    if feat.ndim != 3:
        raise ValueError(f"feature grid must be (H, W) or (C, H, W), got shape {feat.shape}")
    if feat.shape[1:] != mask.shape:
        raise ValueError(f"mask {mask.shape} and features {feat.shape[1:]} disagree")
    if not np.isfinite(feat).all():
        raise ValueError("feature grid must be finite")
    rows, cols = np.nonzero(mask == POS)
    if rows.size == 0:
        raise ValueError("mask has no positive cells")
    r0, r1 = rows.min(), rows.max()
    c0, c1 = cols.min(), cols.max()
    w = c1 - c0 + 1
    h = r1 - r0 + 1
    mask_box = mask[r0:r1 + 1, c0:c1 + 1].astype(np.float64)
    valid = feat[:, r0:r1 + 1, c0:c1 + 1] * mask_box
    axis = 1 if w >= h else 2  # sum down columns when the box is wide
    counts = mask_box.sum(axis=axis - 1)
    sums = valid.sum(axis=axis)
    keep = counts > 0
    return (sums[:, keep] / counts[keep]).T
