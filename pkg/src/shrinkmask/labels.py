"""Training-target generation: shrink, coarse and tri-state margin labels.

All labels derive from the same recipe: every text polygon is offset inward
by d = area * (1 - r^2) / perimeter and the region inside the shrunk contour
becomes the positive class. Shrink labels exist at full and quarter
resolution, the coarse label at 1/16 resolution, and the margin label (built
by a five-step mask combination) at quarter resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import masks
from .formats import SceneSample
from .geometry import Polygon, offset_distance, shrink_polygon
from .masks import IGN, NEG, POS

QUARTER = 0.25
SIXTEENTH = 1.0 / 16.0


@dataclass
class ShrinkInstance:
    """One annotation with its shrink pieces; pieces is empty if it vanished."""

    polygon: Polygon
    pieces: list[Polygon]
    distance: float
    dontcare: bool = False


@dataclass
class LabelSet:
    """All training targets for one scene."""

    shrink_full: np.ndarray  # full resolution, {0,1} (+ IGN under dont-care)
    shrink_q: np.ndarray     # 1/4 resolution tri-state
    coarse: np.ndarray       # 1/16 resolution tri-state
    margin: np.ndarray       # 1/4 resolution tri-state
    instances: list[ShrinkInstance] = field(default_factory=list)


def scaled_dims(height: int, width: int, scale: float) -> tuple[int, int]:
    """Label grid dimensions at a given scale; ceiling so borders survive."""
    return math.ceil(height * scale), math.ceil(width * scale)


def _scaled(p: Polygon, scale: float) -> Polygon:
    return p if scale == 1.0 else Polygon(p.points * scale)


def _shrink_instances(sample: SceneSample, ratio: float) -> list[ShrinkInstance]:
    out = []
    for ann in sample.annotations:
        if ann.dontcare:
            out.append(ShrinkInstance(ann.polygon, [], 0.0, dontcare=True))
            continue
        d = offset_distance(ann.polygon, ratio)
        out.append(ShrinkInstance(ann.polygon, shrink_polygon(ann.polygon, d), d))
    return out


def _paint(mask: np.ndarray, polys, scale: float, value: int) -> None:
    h, w = mask.shape
    for p in polys:
        hit = masks.rasterize(_scaled(p, scale), h, w) == POS
        mask[hit] = value


def _shrink_label_at_scale(sample: SceneSample, ratio: float, scale: float):
    instances = _shrink_instances(sample, ratio)
    h, w = scaled_dims(sample.height, sample.width, scale)
    label = np.zeros((h, w), np.uint8)
    for inst in instances:
        _paint(label, inst.pieces, scale, POS)
    # dont-care regions are ignored outright, taking precedence over overlap
    for inst in instances:
        if inst.dontcare:
            _paint(label, [inst.polygon], scale, IGN)
    return label, instances


def gen_shrink_labels(sample: SceneSample, ratio: float = 0.4, scale: float = 1.0):
    """Shrink-mask label at full (scale 1) or quarter (scale 1/4) resolution.

    Returns (mask, instances). Dont-care annotations are rasterized unshrunk
    as IGN; all other cells are POS inside some shrink piece, NEG elsewhere.
    """
    if scale not in (1.0, QUARTER):
        raise ValueError(f"shrink label scale must be 1 or 0.25, got {scale}")
    return _shrink_label_at_scale(sample, ratio, scale)


def gen_coarse_label(sample: SceneSample, ratio: float = 0.4) -> np.ndarray:
    """Shrink-mask label at 1/16 resolution (coarse supervision target)."""
    label, _ = _shrink_label_at_scale(sample, ratio, SIXTEENTH)
    return label


def gen_margin_label(sample: SceneSample, ratio: float = 0.4) -> np.ndarray:
    """Tri-state margin label at quarter resolution.

    Five steps: (1) shrink each text contour to S1; (2) shrink S1 again to
    S2; (3) combine S1 with ignore(S2); (4) reverse the text mask and ignore
    its positives; (5) combine step 4 with step 3. The net semantics: POS is
    the S1 minus S2 band, NEG the text minus S1 margin, IGN everything else
    (background and S2 interior).
    """
    h, w = scaled_dims(sample.height, sample.width, QUARTER)
    s1_mask = np.zeros((h, w), np.uint8)
    s2_mask = np.zeros((h, w), np.uint8)
    text_mask = np.zeros((h, w), np.uint8)
    for inst in _shrink_instances(sample, ratio):
        if inst.dontcare:
            continue
        _paint(text_mask, [inst.polygon], QUARTER, POS)
        _paint(s1_mask, inst.pieces, QUARTER, POS)
        for piece in inst.pieces:
            d2 = offset_distance(piece, ratio)
            _paint(s2_mask, shrink_polygon(piece, d2), QUARTER, POS)
    step3 = masks.ors(s1_mask, masks.ignore_positive(s2_mask))
    step4 = masks.ignore_positive(masks.reverse(text_mask))
    return masks.ors(step4, step3)


def build_label_set(sample: SceneSample, ratio: float = 0.4) -> LabelSet:
    """Generate the full label family for one scene."""
    shrink_full, instances = gen_shrink_labels(sample, ratio, scale=1.0)
    shrink_q, _ = gen_shrink_labels(sample, ratio, scale=QUARTER)
    return LabelSet(
        shrink_full=shrink_full,
        shrink_q=shrink_q,
        coarse=gen_coarse_label(sample, ratio),
        margin=gen_margin_label(sample, ratio),
        instances=instances,
    )
