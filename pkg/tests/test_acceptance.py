"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import json
import time
from pathlib import Path

import numpy as np
import pytest
from shapely.geometry import Polygon as ShapelyPolygon

from conftest import (
    boundary_distance_map,
    margin_oracle,
    random_convex_polygon,
    random_scene,
    square,
)
from shrinkmask.cli import main as cli_main
from shrinkmask.evaluation import match_detections, polygon_iou
from shrinkmask.formats import Annotation
from shrinkmask.geometry import expand_polygon, offset_distance, shrink_polygon
from shrinkmask.labels import gen_margin_label
from shrinkmask.losses import LossWeights, bce_loss, dice_loss, dice_loss_grad, total_loss
from shrinkmask.masks import IGN, NEG, POS, ors, rasterize
from shrinkmask.postproc import Detection, PostprocConfig, detect
from shrinkmask.sequence import sequence_projection

from test_evaluation import max_matching_oracle
from test_sequence import oracle_projection, random_pair


def _pass(name, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"\n[acceptance] {name}: PASS{suffix}")


def _run_cli(argv):
    return cli_main([str(a) for a in argv])


def test_c1_ors_semantics():
    """Exhaustive 3x3 truth table: ignore absorbs, else positive dominates."""
    t0 = time.perf_counter()
    states = (NEG, POS, IGN)
    for a, b in itertools.product(states, repeat=2):
        got = ors(np.array([[a]], np.uint8), np.array([[b]], np.uint8))[0, 0]
        if IGN in (a, b):
            expected = IGN
        elif POS in (a, b):
            expected = POS
        else:
            expected = NEG
        assert got == expected, f"ors({a}, {b}) = {got}, expected {expected}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _pass("C1 ors-semantics", f"{elapsed * 1e3:.1f} ms")


def test_c2_margin_label_identity():
    """On 50 seeded scenes the 5-step margin label equals the brute-force
    set-identity oracle on 100% of non-boundary cells and >= 99% overall."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    total = total_match = 0
    nb_total = nb_match = 0
    for _ in range(50):
        sample = random_scene(rng, size=256, n_instances=int(rng.integers(2, 5)))
        got = gen_margin_label(sample, 0.4)
        want = margin_oracle(sample, 0.4)
        non_boundary = boundary_distance_map(sample, 0.4) > 0.75
        eq = got == want
        total += eq.size
        total_match += int(eq.sum())
        nb_total += int(non_boundary.sum())
        nb_match += int((eq & non_boundary).sum())
        assert eq[non_boundary].all(), "mismatch on a non-boundary cell"
    assert total_match / total >= 0.99
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _pass("C2 margin-label-identity",
          f"non-boundary {nb_match}/{nb_total}, all {total_match}/{total}, {elapsed:.1f} s")


def test_c3_geometry_round_trip():
    """expand(shrink) IoU >= 0.98 on 100 random convex polygons with
    inradius > 2d; detect-from-GT-map IoU mean >= 0.90, min >= 0.80."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(3301)

    count = 0
    while count < 100:
        p = random_convex_polygon(rng)
        d = offset_distance(p, 0.4)
        if not shrink_polygon(p, 2.0 * d):  # enforce inradius > 2d
            continue
        count += 1
        pieces = shrink_polygon(p, d)
        assert len(pieces) == 1
        back = expand_polygon(pieces[0], d)
        assert polygon_iou(back, p) >= 0.98

    ious = []
    count = 0
    while count < 100:
        p = random_convex_polygon(rng, scale=rng.uniform(40, 90))
        d = offset_distance(p, 0.4)
        pieces = shrink_polygon(p, d)
        if len(pieces) != 1 or not shrink_polygon(p, 2.0 * d):
            continue
        count += 1
        pm = rasterize(pieces[0], 400, 400).astype(np.float32)
        dets = detect(pm, PostprocConfig())
        assert len(dets) == 1
        ious.append(polygon_iou(dets[0].contour, p))
    mean_iou, min_iou = float(np.mean(ious)), float(np.min(ious))
    assert mean_iou >= 0.90
    assert min_iou >= 0.80
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _pass("C3 geometry-round-trip",
          f"detect IoU mean {mean_iou:.3f} min {min_iou:.3f}, {elapsed:.1f} s")


def test_c4_loss_oracle():
    """Dice examples to 1e-9, finite-difference gradient to 1e-4 relative,
    IGN-cell perturbations change the loss by exactly zero, default weights
    1/0.25/0.25/0.25."""
    all_pos = np.full((2, 2), POS, np.uint8)
    assert abs(dice_loss(np.ones((2, 2)), all_pos) - 0.0) <= 1e-9
    assert abs(dice_loss(np.ones((2, 2)), np.zeros((2, 2), np.uint8)) - 0.8) <= 1e-9
    assert abs(dice_loss(np.full((2, 2), 0.5), all_pos) - (1.0 - 5.0 / 7.0)) <= 1e-9

    rng = np.random.default_rng(4001)
    pred = rng.uniform(0.05, 0.95, (8, 8))
    gt = rng.choice([NEG, POS, IGN], size=(8, 8)).astype(np.uint8)
    gt[0, 0] = POS
    grad = dice_loss_grad(pred, gt)
    h = 1e-5
    for i in range(8):
        for j in range(8):
            up, dn = pred.copy(), pred.copy()
            up[i, j] += h
            dn[i, j] -= h
            fd = (dice_loss(up, gt) - dice_loss(dn, gt)) / (2.0 * h)
            if gt[i, j] == IGN:
                assert grad[i, j] == 0.0 and fd == 0.0
            else:
                assert abs(grad[i, j] - fd) <= 1e-4 * max(abs(fd), 1e-9)

    base = dice_loss(pred, gt)
    for _ in range(20):
        perturbed = pred.copy()
        perturbed[gt == IGN] = rng.random(int((gt == IGN).sum()))
        assert dice_loss(perturbed, gt) == base  # exactly zero change

    w = LossWeights()
    assert (w.alpha, w.beta, w.gamma, w.eta) == (1.0, 0.25, 0.25, 0.25)
    assert total_loss(1.0, 1.0, 1.0, 1.0) == 1.75
    assert bce_loss(0.5, 1) == pytest.approx(np.log(2.0), abs=1e-12)
    _pass("C4 loss-oracle")


def test_c5_sequence_projection_oracle():
    """1000 random (mask, feature) pairs match the brute-force masked-mean
    oracle exactly; transpose symmetry is exact."""
    rng = np.random.default_rng(5001)
    for _ in range(1000):
        mask, feat = random_pair(rng)
        got = sequence_projection(mask, feat)
        want = oracle_projection(mask, feat)
        assert got.shape == want.shape
        assert np.array_equal(got, want)
    checked = 0
    while checked < 200:
        mask, feat = random_pair(rng)
        rows, cols = np.nonzero(mask)
        if cols.max() - cols.min() == rows.max() - rows.min():
            continue  # square boxes tie-break to the column branch on both sides
        checked += 1
        a = sequence_projection(mask, feat)
        b = sequence_projection(mask.T, np.transpose(feat, (0, 2, 1)))
        assert np.array_equal(a, b)
    _pass("C5 sequence-projection", "1000 exact, 200 transpose-exact")


def test_c6_evaluation_protocol():
    """Hand-constructed scenes give the stated P/R/F; greedy matches the
    bipartite-matching oracle on >= 95% of 500 random small instances."""
    r = match_detections([Detection(square(0, 0, 10), 1.0)],
                         [Annotation(square(0, 0, 10))])
    assert (r.precision, r.recall, r.fmeasure) == (1.0, 1.0, 1.0)

    r = match_detections(
        [Detection(square(0, 0, 10), 1.0), Detection(square(50, 50, 10), 1.0)],
        [Annotation(square(0, 0, 10))])
    assert r.precision == 0.5 and r.recall == 1.0
    assert r.fmeasure == pytest.approx(2.0 / 3.0)

    r = match_detections([Detection(square(0, 0, 10), 1.0)],
                         [Annotation(square(0, 0, 10), dontcare=True)])
    assert (r.precision, r.recall, r.fmeasure) == (1.0, 1.0, 1.0)

    rng = np.random.default_rng(6001)
    agree = 0
    trials = 500
    for _ in range(trials):
        nd, ng = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        dets = [Detection(square(rng.uniform(0, 40), rng.uniform(0, 40),
                                 rng.uniform(6, 18)), 1.0) for _ in range(nd)]
        gts = [Annotation(square(rng.uniform(0, 40), rng.uniform(0, 40),
                                 rng.uniform(6, 18))) for _ in range(ng)]
        ious = np.zeros((nd, ng))
        for i, d in enumerate(dets):
            for j, g in enumerate(gts):
                ious[i, j] = polygon_iou(d.contour, g.polygon)
        greedy_tp = match_detections(dets, gts).true_positives
        oracle_tp = max_matching_oracle(ious, 0.5)
        assert greedy_tp <= oracle_tp
        agree += greedy_tp == oracle_tp
    rate = agree / trials
    assert rate >= 0.95
    _pass("C6 evaluation-protocol", f"greedy/bipartite agreement {rate:.1%}")


@pytest.fixture()
def bench_corpus(tmp_path):
    """One 736x736 GT-derived probability map with <= 20 instances."""
    corpus = tmp_path / "corpus"
    assert _run_cli(["synth", "--seed", 7007, "--count", 1,
                     "--height", 736, "--width", 736,
                     "--min-instances", 10, "--max-instances", 14,
                     "--min-scale", 50, "--max-scale", 150,
                     "--out-dir", corpus]) == 0
    lab = tmp_path / "lab"
    assert _run_cli(["labels", "--annotations", corpus / "annotations",
                     "--out-dir", lab]) == 0
    maps = tmp_path / "maps"
    maps.mkdir()
    for p in (lab / "labels").glob("*.shrink.ztdm"):
        (maps / p.name.replace(".shrink", "")).write_bytes(p.read_bytes())
    return maps


def test_c7_postprocessing_latency(bench_corpus, tmp_path):
    """bench p50 <= 5 ms on a 736x736 single-channel map with <= 20
    instances; detections byte-identical across --jobs settings."""
    out = tmp_path / "bench"
    assert _run_cli(["bench", "--maps", bench_corpus, "--reps", 60,
                     "--warmup", 5, "--out-dir", out]) == 0
    head = json.loads((out / "manifest.jsonl").read_text().splitlines()[0])
    p50 = head["config"]["p50_ms"]
    assert p50 <= 5.0, f"post-processing p50 {p50:.3f} ms exceeds 5 ms"

    d1, d2 = tmp_path / "j1", tmp_path / "j4"
    assert _run_cli(["detect", "--maps", bench_corpus, "--out-dir", d1, "--jobs", 1]) == 0
    assert _run_cli(["detect", "--maps", bench_corpus, "--out-dir", d2, "--jobs", 4]) == 0
    for p in sorted((d1 / "detections").iterdir()):
        assert p.read_bytes() == (d2 / "detections" / p.name).read_bytes()
    _pass("C7 postproc-latency", f"p50 {p50:.3f} ms, jobs-invariant")


def test_c8_pipeline_determinism(tmp_path):
    """synth + labels + detect + eval twice with one seed produce
    byte-identical data files (manifests carry wall-times and are excluded)."""

    def run_pipeline(root: Path):
        corpus = root / "corpus"
        assert _run_cli(["synth", "--seed", 515, "--count", 4, "--out-dir", corpus]) == 0
        lab = root / "lab"
        assert _run_cli(["labels", "--annotations", corpus / "annotations",
                         "--out-dir", lab]) == 0
        maps = root / "maps"
        maps.mkdir()
        for p in (lab / "labels").glob("*.shrink.ztdm"):
            (maps / p.name.replace(".shrink", "")).write_bytes(p.read_bytes())
        det = root / "det"
        assert _run_cli(["detect", "--maps", maps, "--out-dir", det]) == 0
        ev = root / "ev"
        assert _run_cli(["eval", "--detections", det / "detections",
                         "--ground-truth", corpus / "annotations",
                         "--out-dir", ev]) == 0
        return root

    a = run_pipeline(tmp_path / "run_a")
    b = run_pipeline(tmp_path / "run_b")
    files_a = sorted(p for p in a.rglob("*")
                     if p.is_file() and p.name != "manifest.jsonl")
    files_b = sorted(p for p in b.rglob("*")
                     if p.is_file() and p.name != "manifest.jsonl")
    assert [p.relative_to(a) for p in files_a] == [p.relative_to(b) for p in files_b]
    for pa, pb in zip(files_a, files_b):
        assert pa.read_bytes() == pb.read_bytes(), f"{pa.relative_to(a)} differs"
    _pass("C8 pipeline-determinism", f"{len(files_a)} files byte-identical")
