"""Shrink-mask text-detection toolkit.

Non-neural machinery of a shrink-mask detection pipeline: polygon offsetting
and label generation (shrink / coarse / tri-state margin), loss oracles,
sequential-feature pre-processing, object-wise contour-extension
post-processing, IoU evaluation, synthetic scenes and the shared file
formats.
"""

from .evaluation import EvalReport, match_detections, polygon_iou
from .formats import Annotation, SceneSample, read_container, write_container
from .geometry import (
    Polygon,
    expand_polygon,
    offset_distance,
    polygon_area,
    polygon_perimeter,
    shrink_polygon,
)
from .labels import (
    LabelSet,
    build_label_set,
    gen_coarse_label,
    gen_margin_label,
    gen_shrink_labels,
)
from .losses import LossWeights, bce_loss, dice_loss, dice_loss_grad, total_loss
from .masks import IGN, NEG, POS, ignore_positive, ors, rasterize, reverse
from .postproc import Detection, PostprocConfig, binarize, connected_components, detect, trace_contour
from .sequence import sequence_projection
from .synth import SplitMix64, SynthConfig, synth_scene

__version__ = "0.1.0"

__all__ = [
    "Annotation", "Detection", "EvalReport", "IGN", "LabelSet", "LossWeights",
    "NEG", "POS", "Polygon", "PostprocConfig", "SceneSample", "SplitMix64",
    "SynthConfig", "bce_loss", "binarize", "build_label_set",
    "connected_components", "detect", "dice_loss", "dice_loss_grad",
    "expand_polygon", "gen_coarse_label", "gen_margin_label",
    "gen_shrink_labels", "ignore_positive", "match_detections",
    "offset_distance", "ors", "polygon_area", "polygon_iou",
    "polygon_perimeter", "rasterize", "read_container", "reverse",
    "sequence_projection", "shrink_polygon", "synth_scene", "total_loss",
    "trace_contour", "write_container",
]
