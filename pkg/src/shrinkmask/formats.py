"""Scene annotations and the bit-exact on-disk formats.

Two formats are shared with external consumers:

* tensor containers: magic ``ZTDM``, version u16 LE, dtype u8 (0 = uint8,
  1 = float32 LE), channels u32 LE, height u32 LE, width u32 LE, followed by
  the row-major channel-major payload. Tri-state masks store NEG=0, POS=1,
  IGN=255.
* line records: one JSON object per line with a ``points`` list of [x, y]
  pairs (written with at most 3 decimal places) and optional ``score``,
  ``dontcare`` and ``transcription`` fields. Used for both detections and
  ground-truth annotations.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .geometry import Polygon

CONTAINER_MAGIC = b"ZTDM"
CONTAINER_VERSION = 1
DTYPE_U8 = 0
DTYPE_F32 = 1

_HEADER = struct.Struct("<4sHBIII")

DONTCARE_TOKEN = "###"


@dataclass
class Annotation:
    polygon: Polygon
    transcription: str = ""
    dontcare: bool = False


@dataclass
class SceneSample:
    """Image dimensions plus polygon annotations."""

    width: int
    height: int
    annotations: list[Annotation] = field(default_factory=list)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"scene dimensions must be positive, got {self.width}x{self.height}")


# ---------------------------------------------------------------------------
# tensor containers


def write_container(path, array) -> None:
    """Write a (H, W) or (C, H, W) uint8/float32 array as a container file."""
    a = np.asarray(array)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.size == 0:
        raise ValueError(f"expected non-empty (H, W) or (C, H, W) array, got shape {a.shape}")
    if a.dtype == np.uint8:
        dtype_code, payload = DTYPE_U8, a
    elif a.dtype in (np.float32, np.float64):
        dtype_code, payload = DTYPE_F32, a.astype("<f4")
    else:
        raise ValueError(f"unsupported container dtype {a.dtype}")
    c, h, w = payload.shape
    header = _HEADER.pack(CONTAINER_MAGIC, CONTAINER_VERSION, dtype_code, c, h, w)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(payload).tobytes())


def read_container(path) -> np.ndarray:
    """Read a container file into a (C, H, W) array."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated container header")
    magic, version, dtype_code, c, h, w = _HEADER.unpack_from(raw)
    if magic != CONTAINER_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != CONTAINER_VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    if dtype_code == DTYPE_U8:
        dt, itemsize = np.uint8, 1
    elif dtype_code == DTYPE_F32:
        dt, itemsize = np.dtype("<f4"), 4
    else:
        raise ValueError(f"{path}: unknown dtype code {dtype_code}")
    expected = c * h * w * itemsize
    body = raw[_HEADER.size:]
    if len(body) != expected:
        raise ValueError(f"{path}: payload size {len(body)} != expected {expected}")
    return np.frombuffer(body, dtype=dt).reshape(c, h, w).copy()


# ---------------------------------------------------------------------------
# line records


def _round_points(points) -> list[list[float]]:
    """Round to the serialized precision, collapsing vertices that coincide
    after rounding (buffer arcs can sit closer than 1e-3 px apart)."""
    rounded = [[round(float(x), 3), round(float(y), 3)] for x, y in points]
    out = [p for i, p in enumerate(rounded) if p != rounded[i - 1]]
    if len(out) < 3:
        raise ValueError("polygon degenerate at serialization precision")
    return out


def points_to_polygon(points) -> Polygon:
    """Record points -> Polygon, tolerating rounding-collapsed duplicates."""
    pts = np.asarray(points, np.float64)
    if pts.ndim == 2 and pts.shape[0] >= 2:
        prev = np.concatenate([pts[-1:], pts[:-1]])
        pts = pts[~(pts == prev).all(axis=1)]
    return Polygon(pts)


def annotation_record(ann: Annotation) -> dict:
    rec = {"points": _round_points(ann.polygon.points)}
    if ann.dontcare:
        rec["dontcare"] = True
    if ann.transcription:
        rec["transcription"] = ann.transcription
    return rec


def detection_record(contour: Polygon, score: float) -> dict:
    return {"points": _round_points(contour.points), "score": round(float(score), 6)}


def write_records(path, records) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
            f.write("\n")


def read_records(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: line {lineno}: invalid JSON ({e})") from None
            if "points" not in rec:
                raise ValueError(f"{path}: line {lineno}: record has no 'points'")
            records.append(rec)
    return records


def record_to_annotation(rec: dict) -> Annotation:
    return Annotation(
        polygon=points_to_polygon(rec["points"]),
        transcription=rec.get("transcription", ""),
        dontcare=bool(rec.get("dontcare", False)),
    )


# ---------------------------------------------------------------------------
# external ground-truth formats


def parse_quad_annotations(text: str) -> list[Annotation]:
    """Parse ICDAR2015-style lines: x1,y1,...,x4,y4,transcription."""
    annotations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip().lstrip("﻿")
        if not line:
            continue
        parts = line.split(",", 8)
        if len(parts) < 9:
            raise ValueError(f"line {lineno}: expected 8 coordinates and a transcription, got {len(parts)} fields")
        try:
            coords = [float(v) for v in parts[:8]]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric coordinate") from None
        transcription = parts[8]
        quad = [(coords[i], coords[i + 1]) for i in range(0, 8, 2)]
        try:
            poly = Polygon(quad)
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
        annotations.append(Annotation(poly, transcription, transcription == DONTCARE_TOKEN))
    return annotations


def parse_poly_annotations(text: str) -> list[Annotation]:
    """Parse polygon lines: x1,y1,...,xN,yN[,transcription], N >= 3 points."""
    annotations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip().lstrip("﻿")
        if not line:
            continue
        parts = line.split(",")
        transcription = ""
        if parts and not _is_number(parts[-1]):
            transcription = parts[-1]
            parts = parts[:-1]
        if len(parts) % 2 != 0:
            raise ValueError(f"line {lineno}: odd coordinate count {len(parts)}")
        if len(parts) < 6:
            raise ValueError(f"line {lineno}: polygon needs at least 3 points, got {len(parts) // 2}")
        try:
            coords = [float(v) for v in parts]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric coordinate") from None
        pts = [(coords[i], coords[i + 1]) for i in range(0, len(coords), 2)]
        try:
            poly = Polygon(pts)
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
        annotations.append(Annotation(poly, transcription, transcription == DONTCARE_TOKEN))
    return annotations


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def scene_records(sample: SceneSample) -> list[dict]:
    """Scene header record followed by one record per annotation."""
    head = {"width": sample.width, "height": sample.height}
    return [head] + [annotation_record(a) for a in sample.annotations]


def write_scene(path, sample: SceneSample) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in scene_records(sample):
            f.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
            f.write("\n")


def read_scene(path) -> SceneSample:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty scene file")
    head = json.loads(lines[0])
    if "width" not in head or "height" not in head:
        raise ValueError(f"{path}: first record must carry scene width/height")
    annotations = [record_to_annotation(json.loads(ln)) for ln in lines[1:]]
    return SceneSample(int(head["width"]), int(head["height"]), annotations)
