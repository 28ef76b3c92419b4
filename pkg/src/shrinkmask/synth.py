"""Deterministic synthetic scene generation for desk-scale experiments.

Scenes hold text-like instances (axis-aligned quads, rotated quads and
curved arc bands) rendered into a single-channel grayscale image. Everything
derives from an explicit splitmix-style 64-bit PRNG so that streams are
bit-identical across platforms; (seed, index) fully determines a scene.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import masks
from .formats import Annotation, SceneSample
from .geometry import Polygon

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *parts: int) -> int:
    key = seed & _MASK64
    for p in parts:
        key = _mix64(key ^ _mix64((p + _GOLDEN) & _MASK64))
    return key


class SplitMix64:
    """Scalar splitmix64 stream; the i-th output equals the counter mix."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0 ** -53)

    def randint(self, lo: int, hi: int) -> int:
        """Inclusive bounds; modulo bias is acceptable for scene synthesis."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randint(0, i)
            seq[i], seq[j] = seq[j], seq[i]


def noise_unit(key: int, n: int) -> np.ndarray:
    """Vectorized stream of n uniforms in [0, 1); matches SplitMix64(key)."""
    state = np.uint64(key) + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GOLDEN)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


@dataclass
class SynthConfig:
    seed: int = 0
    height: int = 640
    width: int = 640
    min_instances: int = 3
    max_instances: int = 8
    shapes: tuple[str, ...] = ("quad", "rotated-quad", "arc-band")
    scale_range: tuple[float, float] = (60.0, 170.0)
    rotation_range: tuple[float, float] = (-45.0, 45.0)
    adjacency_prob: float = 0.25

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise ValueError("image dimensions must be positive")
        if not 1 <= self.min_instances <= self.max_instances:
            raise ValueError("instance count range is empty")
        if not self.shapes or any(s not in ("quad", "rotated-quad", "arc-band") for s in self.shapes):
            raise ValueError(f"unknown shape mix {self.shapes}")
        if self.scale_range[0] > self.scale_range[1] or self.scale_range[0] <= 0:
            raise ValueError("scale range is empty")
        if self.rotation_range[0] > self.rotation_range[1]:
            raise ValueError("rotation range is empty")
        if not 0.0 <= self.adjacency_prob <= 1.0:
            raise ValueError("adjacency probability must be in [0, 1]")


def _rotate(pts: np.ndarray, degrees: float) -> np.ndarray:
    a = math.radians(degrees)
    c, s = math.cos(a), math.sin(a)
    return pts @ np.array([[c, s], [-s, c]])


def _rect(w: float, h: float) -> np.ndarray:
    return np.array([[-w / 2, -h / 2], [w / 2, -h / 2], [w / 2, h / 2], [-w / 2, h / 2]])


def _arc_band(radius: float, thickness: float, span_deg: float, steps: int = 10) -> np.ndarray:
    """Annular band polygon: outer arc + reversed inner arc."""
    ang = np.radians(np.linspace(-span_deg / 2.0, span_deg / 2.0, steps))
    outer = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    inner = outer * ((radius - thickness) / radius)
    return np.concatenate([outer, inner[::-1]])


def _fit_into(group: list[np.ndarray], cx: float, cy: float, usable_w: float,
              usable_h: float, rng: SplitMix64) -> list[np.ndarray]:
    """Scale a polygon group to fit a box and drop it at (cx, cy) with jitter."""
    allpts = np.concatenate(group)
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    bw, bh = hi[0] - lo[0], hi[1] - lo[1]
    s = min(usable_w / bw, usable_h / bh, 1.0)
    jx = rng.uniform(-0.5, 0.5) * max(0.0, usable_w - bw * s)
    jy = rng.uniform(-0.5, 0.5) * max(0.0, usable_h - bh * s)
    center = (lo + hi) / 2.0
    return [(pts - center) * s + np.array([cx + jx, cy + jy]) for pts in group]


def _make_shape(shape: str, size: float, cfg: SynthConfig, rng: SplitMix64) -> np.ndarray:
    rot = rng.uniform(*cfg.rotation_range)
    if shape == "quad":
        aspect = rng.uniform(2.5, 5.0)
        return _rect(size, size / aspect)
    if shape == "rotated-quad":
        aspect = rng.uniform(2.5, 5.0)
        return _rotate(_rect(size, size / aspect), rot)
    span = rng.uniform(90.0, 200.0)
    radius = size / 2.0
    thickness = max(4.0, radius * rng.uniform(0.2, 0.35))
    return _rotate(_arc_band(radius, thickness, span), rot)


def synth_scene(cfg: SynthConfig, index: int) -> tuple[SceneSample, np.ndarray]:
    """Generate scene ``index``: annotations plus a rendered grayscale image.

    Instances are placed on a shuffled slot grid so they never overlap; with
    probability ``adjacency_prob`` a slot receives a near-adjacent parallel
    pair (boundary gap under 4 px) to exercise instance separation.
    """
    rng = SplitMix64(derive_key(cfg.seed, index, 0x5C3))
    n = rng.randint(cfg.min_instances, cfg.max_instances)
    grid = math.ceil(math.sqrt(cfg.max_instances))
    slot_h, slot_w = cfg.height / grid, cfg.width / grid
    margin = 6.0
    slots = list(range(grid * grid))
    rng.shuffle(slots)

    polys: list[np.ndarray] = []
    slot_iter = iter(slots)
    while len(polys) < n:
        slot = next(slot_iter)
        sr, sc = divmod(slot, grid)
        cx = (sc + 0.5) * slot_w
        cy = (sr + 0.5) * slot_h
        usable_w, usable_h = slot_w - 2 * margin, slot_h - 2 * margin
        size = rng.uniform(*cfg.scale_range)
        pair = len(polys) + 2 <= n and rng.uniform() < cfg.adjacency_prob
        if pair:
            aspect = rng.uniform(3.5, 5.0)
            w, h = size, size / aspect
            gap = rng.uniform(1.0, 2.5)
            rect = _rect(w, h)
            shifted = rect + np.array([0.0, h + gap])
            rot = rng.uniform(*cfg.rotation_range)
            group = [_rotate(rect, rot), _rotate(shifted, rot)]
        else:
            shape = cfg.shapes[rng.randint(0, len(cfg.shapes) - 1)]
            group = [_make_shape(shape, size, cfg, rng)]
        polys.extend(_fit_into(group, cx, cy, usable_w, usable_h, rng))

    annotations = [
        Annotation(Polygon(pts), transcription=f"synth-{index}-{k}")
        for k, pts in enumerate(polys)
    ]
    sample = SceneSample(cfg.width, cfg.height, annotations)
    return sample, _render(cfg, index, annotations)


def _render(cfg: SynthConfig, index: int, annotations: list[Annotation]) -> np.ndarray:
    rng = SplitMix64(derive_key(cfg.seed, index, 0xF111))
    img = np.full((cfg.height, cfg.width), 40.0)
    levels = list(range(len(annotations)))
    rng.shuffle(levels)
    for k, ann in enumerate(annotations):
        # distinct per-instance fill intensity, well above background
        level = 110.0 + 120.0 * levels[k] / max(1, len(annotations) - 1)
        hit = masks.rasterize(ann.polygon, cfg.height, cfg.width) == masks.POS
        img[hit] = level
    noise_key = derive_key(cfg.seed, index, 0x0153)
    noise = (noise_unit(noise_key, img.size).reshape(img.shape) - 0.5) * 24.0
    return np.clip(np.rint(img + noise), 0, 255).astype(np.uint8)
