"""The full batch pipeline on a synthetic corpus, via the CLI entry point.

synth -> labels -> detect (on ground-truth shrink masks) -> eval, inside a
scratch directory; prints the resulting P/R/F and the per-stage manifests.
"""

import json
import shutil
import tempfile
from pathlib import Path

from shrinkmask.cli import main

root = Path(tempfile.mkdtemp(prefix="shrinkmask_demo_"))
print(f"working in {root}")

corpus = root / "corpus"
main(["synth", "--seed", "11", "--count", "6", "--adjacency-prob", "0.5",
      "--out-dir", str(corpus)])

lab = root / "lab"
main(["labels", "--annotations", str(corpus / "annotations"), "--out-dir", str(lab)])

maps = root / "maps"
maps.mkdir()
for p in sorted((lab / "labels").glob("*.shrink.ztdm")):
    shutil.copy(p, maps / p.name.replace(".shrink", ""))

det = root / "det"
main(["detect", "--maps", str(maps), "--jobs", "2", "--out-dir", str(det)])

ev = root / "ev"
main(["eval", "--detections", str(det / "detections"),
      "--ground-truth", str(corpus / "annotations"), "--out-dir", str(ev)])

report = json.loads((ev / "report.json").read_text())
print(f"\ncorpus of 6 scenes: P={report['precision']:.3f} "
      f"R={report['recall']:.3f} F={report['fmeasure']:.3f}")

head = json.loads((det / "manifest.jsonl").read_text().splitlines()[0])
times = [json.loads(ln)["ms"] for ln in (det / "manifest.jsonl").read_text().splitlines()[1:]]
print(f"detect manifest: {head['items']} maps, "
      f"post-processing {min(times):.2f}-{max(times):.2f} ms each")
print(f"outputs kept under {root} (delete when done)")
