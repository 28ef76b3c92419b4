"""IoU-based detection evaluation: greedy one-to-one matching with
dont-care handling, producing precision / recall / F-measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from shapely.geometry import Polygon as _ShapelyPolygon

from .formats import Annotation
from .geometry import Polygon
from .postproc import Detection

DEFAULT_IOU_THRESH = 0.5


@dataclass
class EvalReport:
    precision: float
    recall: float
    fmeasure: float
    matches: list[tuple[int, int, float]] = field(default_factory=list)
    true_positives: int = 0
    counted_detections: int = 0
    counted_ground_truths: int = 0


def polygon_iou(a: Polygon, b: Polygon) -> float:
    """Intersection over union of two polygons, by polygon clipping."""
    return _shapely_iou(_ShapelyPolygon(a.points), _ShapelyPolygon(b.points))


def _shapely_iou(sa: _ShapelyPolygon, sb: _ShapelyPolygon) -> float:
    inter = sa.intersection(sb).area
    if inter == 0.0:
        return 0.0
    union = sa.union(sb).area
    return inter / union if union > 0.0 else 0.0


def fmeasure(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def counts_to_report(tp: int, counted_dets: int, counted_gts: int,
                     matches=None) -> EvalReport:
    """P/R/F from match counts; empty sets score 1 by convention."""
    p = tp / counted_dets if counted_dets > 0 else 1.0
    r = tp / counted_gts if counted_gts > 0 else 1.0
    return EvalReport(p, r, fmeasure(p, r), list(matches or []), tp, counted_dets, counted_gts)


def match_detections(dets: list[Detection], gts: list[Annotation],
                     iou_thresh: float = DEFAULT_IOU_THRESH) -> EvalReport:
    """Greedy one-to-one IoU matching.

    Detections overlapping a dont-care ground truth at or above the threshold
    are excluded from counting, as are the dont-care entries themselves.
    Remaining pairs are matched by descending IoU with (det index, gt index)
    tie-break; pairs below the threshold stay unmatched.
    """
    if not 0.0 < iou_thresh < 1.0:
        raise ValueError(f"iou threshold must be in (0, 1), got {iou_thresh}")
    det_polys = [_ShapelyPolygon(d.contour.points) for d in dets]
    care = [(gi, _ShapelyPolygon(g.polygon.points)) for gi, g in enumerate(gts) if not g.dontcare]
    dontcare = [_ShapelyPolygon(g.polygon.points) for g in gts if g.dontcare]

    counted = [
        di for di, dp in enumerate(det_polys)
        if not any(_shapely_iou(dp, dc) >= iou_thresh for dc in dontcare)
    ]

    pairs = []
    for di in counted:
        for gi, gp in care:
            iou = _shapely_iou(det_polys[di], gp)
            if iou >= iou_thresh:
                pairs.append((iou, di, gi))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

    taken_d, taken_g = set(), set()
    matches = []
    for iou, di, gi in pairs:
        if di in taken_d or gi in taken_g:
            continue
        taken_d.add(di)
        taken_g.add(gi)
        matches.append((di, gi, iou))
    return counts_to_report(len(matches), len(counted), len(care), matches)
