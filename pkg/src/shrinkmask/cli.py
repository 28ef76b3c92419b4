"""Batch command-line front end.

Commands: synth, labels, detect, eval, svdprep, bench. Every command writes
a manifest.jsonl (header record, then one record per item) into the output
directory; manifests carry wall-times and are the only non-deterministic
output, data files are byte-identical for fixed inputs, flags and seed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import evaluation, formats, labels, postproc, synth
from .sequence import sequence_projection


def _write_manifest(out_dir: Path, command: str, config: dict, items: list[dict]) -> None:
    path = out_dir / "manifest.jsonl"
    with open(path, "w", encoding="utf-8") as f:
        head = {"command": command, "config": config, "items": len(items)}
        f.write(json.dumps(head, ensure_ascii=False) + "\n")
        for item in items:
            f.write(json.dumps(item, ensure_ascii=False) + "\n")


def _report_failures(items: list[dict]) -> int:
    failures = [it for it in items if not it.get("ok", True)]
    for it in failures:
        print(f"error: {it.get('input', '?')}: {it.get('error', 'failed')}", file=sys.stderr)
    return 1 if failures else 0


def _warm_postproc() -> None:
    """Trigger one-off JIT/compile work so it stays out of per-item timings."""
    tiny = np.zeros((8, 8), np.float32)
    tiny[2:6, 2:6] = 1.0
    postproc.detect(tiny, postproc.PostprocConfig(min_area=1.0))


def _run_items(worker, tasks: list, jobs: int, warm=None) -> list[dict]:
    """Run worker over tasks, optionally in parallel; results in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        if warm is not None and tasks:
            warm()
        return [worker(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs, initializer=warm) as pool:
        return list(pool.map(worker, tasks))


def _stems(directory: Path, suffix: str) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.name.endswith(suffix))


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "annotations").mkdir(parents=True, exist_ok=True)
    cfg = synth.SynthConfig(
        seed=args.seed, height=args.height, width=args.width,
        min_instances=args.min_instances, max_instances=args.max_instances,
        scale_range=(args.min_scale, args.max_scale),
        adjacency_prob=args.adjacency_prob,
    )
    items = []
    for index in range(args.count):
        t0 = time.perf_counter()
        sample, image = synth.synth_scene(cfg, index)
        img_path = out / "images" / f"scene_{index:04d}.ztdm"
        ann_path = out / "annotations" / f"scene_{index:04d}.jsonl"
        formats.write_container(img_path, image)
        formats.write_scene(ann_path, sample)
        items.append({
            "input": index, "outputs": [str(img_path), str(ann_path)],
            "ms": (time.perf_counter() - t0) * 1e3, "ok": True,
            "instances": len(sample.annotations),
        })
    _write_manifest(out, "synth", {"count": args.count, **cfg.__dict__,
                                   "shapes": list(cfg.shapes),
                                   "scale_range": list(cfg.scale_range),
                                   "rotation_range": list(cfg.rotation_range)}, items)
    return _report_failures(items)


# ---------------------------------------------------------------------------
# labels

def _labels_worker(task) -> dict:
    path_s, out_dir_s, ratio, fmt, image_size = task
    path, out_dir = Path(path_s), Path(out_dir_s)
    stem = path.name.removesuffix(".jsonl").removesuffix(".txt")
    t0 = time.perf_counter()
    try:
        if fmt == "scene":
            sample = formats.read_scene(path)
        else:
            text = path.read_text(encoding="utf-8")
            parse = formats.parse_quad_annotations if fmt == "quad" else formats.parse_poly_annotations
            anns = parse(text)
            if image_size is None:
                raise ValueError("--image-size is required for quad/poly annotation files")
            sample = formats.SceneSample(image_size[0], image_size[1], anns)
        labelset = labels.build_label_set(sample, ratio)
        outputs = []
        for name, mask in (("shrink", labelset.shrink_full), ("shrinkq", labelset.shrink_q),
                           ("coarse", labelset.coarse), ("margin", labelset.margin)):
            out_path = out_dir / f"{stem}.{name}.ztdm"
            formats.write_container(out_path, mask)
            outputs.append(str(out_path))
        return {"input": str(path), "outputs": outputs,
                "ms": (time.perf_counter() - t0) * 1e3, "ok": True}
    except (ValueError, OSError) as e:
        return {"input": str(path), "outputs": [],
                "ms": (time.perf_counter() - t0) * 1e3, "ok": False, "error": str(e)}


def cmd_labels(args) -> int:
    out = Path(args.out_dir)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    suffix = ".jsonl" if args.format == "scene" else ".txt"
    files = _stems(Path(args.annotations), suffix)
    tasks = [(str(p), str(out / "labels"), args.shrink_ratio, args.format, args.image_size)
             for p in files]
    items = _run_items(_labels_worker, tasks, args.jobs)
    _write_manifest(out, "labels", {"shrink_ratio": args.shrink_ratio, "format": args.format},
                    items)
    return _report_failures(items)


# ---------------------------------------------------------------------------
# detect

def _load_probability_map(path: Path) -> np.ndarray:
    arr = formats.read_container(path)
    if arr.shape[0] != 1:
        raise ValueError(f"{path}: expected single-channel map, got {arr.shape[0]} channels")
    plane = arr[0]
    if plane.dtype == np.uint8:
        # tri-state / binary masks act as hard probabilities; IGN is background
        return (plane == 1).astype(np.float32)
    return plane.astype(np.float32)


def _detect_worker(task) -> dict:
    path_s, out_dir_s, cfg_kwargs, output_scale = task
    path, out_dir = Path(path_s), Path(out_dir_s)
    stem = path.name.removesuffix(".ztdm")
    try:
        pm = _load_probability_map(path)
        cfg = postproc.PostprocConfig(**cfg_kwargs)
        t0 = time.perf_counter()
        dets = postproc.detect(pm, cfg, output_scale)
        ms = (time.perf_counter() - t0) * 1e3
        out_path = out_dir / f"{stem}.jsonl"
        formats.write_records(out_path, [formats.detection_record(d.contour, d.score) for d in dets])
        return {"input": str(path), "outputs": [str(out_path)], "ms": ms,
                "ok": True, "detections": len(dets)}
    except (ValueError, OSError) as e:
        return {"input": str(path), "outputs": [], "ms": 0.0, "ok": False, "error": str(e)}


def _postproc_kwargs(args) -> dict:
    return {
        "bin_threshold": args.bin_threshold, "min_area": args.min_area,
        "min_score": args.min_score, "extend_ratio": args.extend_ratio,
        "connectivity": args.connectivity, "simplify_tol": args.simplify_tol,
    }


def cmd_detect(args) -> int:
    out = Path(args.out_dir)
    (out / "detections").mkdir(parents=True, exist_ok=True)
    files = _stems(Path(args.maps), ".ztdm")
    tasks = [(str(p), str(out / "detections"), _postproc_kwargs(args), float(args.scale))
             for p in files]
    items = _run_items(_detect_worker, tasks, args.jobs, warm=_warm_postproc)
    _write_manifest(out, "detect", {**_postproc_kwargs(args), "scale": args.scale}, items)
    return _report_failures(items)


# ---------------------------------------------------------------------------
# eval

def cmd_eval(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    det_files = {p.name.removesuffix(".jsonl"): p for p in _stems(Path(args.detections), ".jsonl")}
    gt_files = {p.name.removesuffix(".jsonl"): p for p in _stems(Path(args.ground_truth), ".jsonl")}
    tp = counted_d = counted_g = 0
    per_scene = []
    for stem in sorted(gt_files):
        sample = formats.read_scene(gt_files[stem])
        dets = []
        if stem in det_files:
            for rec in formats.read_records(det_files[stem]):
                dets.append(postproc.Detection(formats.points_to_polygon(rec["points"]),
                                               float(rec.get("score", 1.0))))
        report = evaluation.match_detections(dets, sample.annotations, args.iou_thresh)
        tp += report.true_positives
        counted_d += report.counted_detections
        counted_g += report.counted_ground_truths
        per_scene.append({"scene": stem, "tp": report.true_positives,
                          "detections": report.counted_detections,
                          "ground_truths": report.counted_ground_truths})
    total = evaluation.counts_to_report(tp, counted_d, counted_g)
    summary = {"precision": total.precision, "recall": total.recall,
               "fmeasure": total.fmeasure, "true_positives": tp,
               "counted_detections": counted_d, "counted_ground_truths": counted_g,
               "iou_thresh": args.iou_thresh, "scenes": per_scene}
    with open(out / "report.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    line = (f"P={total.precision:.4f} R={total.recall:.4f} F={total.fmeasure:.4f} "
            f"(tp={tp} dets={counted_d} gts={counted_g}, iou>={args.iou_thresh})")
    (out / "report.txt").write_text(line + "\n", encoding="utf-8")
    print(line)
    _write_manifest(out, "eval", {"iou_thresh": args.iou_thresh},
                    [{"input": stem, "outputs": [], "ms": 0.0, "ok": True} for stem in sorted(gt_files)])
    return 0


# ---------------------------------------------------------------------------
# svdprep

def _features_for(stem: str, mask: np.ndarray, args) -> np.ndarray:
    if args.features is not None:
        return formats.read_container(Path(args.features) / f"{stem}.ztdm").astype(np.float64)
    if args.images is not None:
        img = formats.read_container(Path(args.images) / f"{stem.split('.')[0]}.ztdm")[0]
        h, w = mask.shape
        fh, fw = img.shape[0] // h, img.shape[1] // w
        pooled = img[:h * fh, :w * fw].reshape(h, fh, w, fw).mean(axis=(1, 3)) / 255.0
        return pooled[None]
    return (mask == 1).astype(np.float64)[None]


def cmd_svdprep(args) -> int:
    out = Path(args.out_dir)
    (out / "sequences").mkdir(parents=True, exist_ok=True)
    files = _stems(Path(args.masks), ".ztdm")
    items = []
    index_records = []
    for path in files:
        stem = path.name.removesuffix(".ztdm")
        t0 = time.perf_counter()
        try:
            mask = (formats.read_container(path)[0] == 1).astype(np.uint8)
            feat = _features_for(stem, mask, args)
            outputs = []
            for k, comp in enumerate(postproc.connected_components(mask, 8)):
                comp_mask = np.zeros_like(mask)
                comp_mask[comp.row:comp.row + comp.cells.shape[0],
                          comp.col:comp.col + comp.cells.shape[1]][comp.cells] = 1
                steps = sequence_projection(comp_mask, feat)
                seq_path = out / "sequences" / f"{stem}.seq{k:02d}.ztdm"
                formats.write_container(seq_path, steps.T[:, :, None].astype(np.float32))
                outputs.append(str(seq_path))
                index_records.append({"mask": str(path), "component": k,
                                      "sequence": str(seq_path), "steps": len(steps)})
            items.append({"input": str(path), "outputs": outputs,
                          "ms": (time.perf_counter() - t0) * 1e3, "ok": True})
        except (ValueError, OSError) as e:
            items.append({"input": str(path), "outputs": [],
                          "ms": (time.perf_counter() - t0) * 1e3, "ok": False, "error": str(e)})
    with open(out / "sequences.jsonl", "w", encoding="utf-8") as f:
        for rec in index_records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    _write_manifest(out, "svdprep", {}, items)
    return _report_failures(items)


# ---------------------------------------------------------------------------
# bench

def cmd_bench(args) -> int:
    out = Path(args.out_dir)
    (out / "detections").mkdir(parents=True, exist_ok=True)
    files = _stems(Path(args.maps), ".ztdm")
    if not files:
        print("error: no probability maps found", file=sys.stderr)
        return 1
    maps = [_load_probability_map(p) for p in files]
    cfg = postproc.PostprocConfig(**_postproc_kwargs(args))
    scale = float(args.scale)
    for _ in range(args.warmup):
        for pm in maps:
            postproc.detect(pm, cfg, scale)
    samples = []
    last = {}
    for _ in range(args.reps):
        for path, pm in zip(files, maps):
            t0 = time.perf_counter()
            dets = postproc.detect(pm, cfg, scale)
            samples.append((time.perf_counter() - t0) * 1e3)
            last[path] = dets
    for path, dets in last.items():
        out_path = out / "detections" / f"{path.name.removesuffix('.ztdm')}.jsonl"
        formats.write_records(out_path, [formats.detection_record(d.contour, d.score) for d in dets])
    arr = np.sort(np.array(samples))
    summary = {"mean_ms": float(arr.mean()),
               "p50_ms": float(np.percentile(arr, 50)),
               "p99_ms": float(np.percentile(arr, 99)),
               "samples": len(samples), "maps": len(files), "reps": args.reps}
    print(f"post p50={summary['p50_ms']:.3f}ms mean={summary['mean_ms']:.3f}ms "
          f"p99={summary['p99_ms']:.3f}ms ({summary['samples']} samples, {summary['maps']} maps)")
    items = [{"input": str(p), "outputs": [], "ms": summary["p50_ms"], "ok": True} for p in files]
    _write_manifest(out, "bench", {**_postproc_kwargs(args), "reps": args.reps,
                                   "warmup": args.warmup, **summary}, items)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_postproc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bin-threshold", type=float, default=0.5)
    p.add_argument("--min-area", type=float, default=16.0)
    p.add_argument("--min-score", type=float, default=0.55)
    p.add_argument("--extend-ratio", type=float, default=1.5)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("--simplify-tol", type=float, default=1.0)
    p.add_argument("--scale", type=int, choices=(1, 4, 16), default=1,
                   help="multiply output coordinates (map resolution vs image)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shrinkmask",
                                 description="shrink-mask text detection toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--height", type=int, default=640)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--min-instances", type=int, default=3)
    p.add_argument("--max-instances", type=int, default=8)
    p.add_argument("--min-scale", type=float, default=60.0)
    p.add_argument("--max-scale", type=float, default=170.0)
    p.add_argument("--adjacency-prob", type=float, default=0.25)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("labels", help="generate training labels from annotations")
    p.add_argument("--annotations", required=True)
    p.add_argument("--format", choices=("scene", "quad", "poly"), default="scene")
    p.add_argument("--image-size", type=int, nargs=2, metavar=("W", "H"), default=None)
    p.add_argument("--shrink-ratio", type=float, default=0.4)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("detect", help="contour-extension post-processing on probability maps")
    p.add_argument("--maps", required=True)
    _add_postproc_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="precision/recall/F against ground truth")
    p.add_argument("--detections", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--iou-thresh", type=float, default=0.5)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("svdprep", help="sequence features from masks and feature grids")
    p.add_argument("--masks", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--images", default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_svdprep)

    p = sub.add_parser("bench", help="post-processing latency benchmark")
    p.add_argument("--maps", required=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--warmup", type=int, default=5)
    _add_postproc_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
