"""Command-line trainer: train from a JSON config file, infer from a
checkpoint. Corpora come from the toolkit's synth/labels commands.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import load_corpus
from .infer import infer_dir, load_checkpoint
from .model import NetConfig
from .train import train

CONFIG_DEFAULTS = {
    "epochs": 120,
    "batch_size": 8,
    "baseline": False,
}


def cmd_train(args) -> int:
    cfg_raw = json.loads(Path(args.config).read_text())
    merged = {**CONFIG_DEFAULTS, **cfg_raw}
    for key in ("images", "labels", "out_dir"):
        if key not in merged:
            print(f"error: config is missing '{key}'", file=sys.stderr)
            return 1
    net_keys = {f.name for f in NetConfig.__dataclass_fields__.values()}
    net_kwargs = {k: v for k, v in merged.items() if k in net_keys}
    if "widths" in net_kwargs:
        net_kwargs["widths"] = tuple(net_kwargs["widths"])
    if "loss_weights" in net_kwargs:
        net_kwargs["loss_weights"] = tuple(net_kwargs["loss_weights"])
    if args.seed is not None:
        net_kwargs["seed"] = args.seed
    baseline = args.baseline or merged["baseline"]
    out_dir = args.out_dir or merged["out_dir"]
    corpus = load_corpus(merged["images"], merged["labels"])
    ckpt = train(corpus, NetConfig(**net_kwargs), epochs=merged["epochs"],
                 batch_size=merged["batch_size"], out_dir=out_dir, baseline=baseline)
    print(f"checkpoint written to {ckpt}")
    return 0


def cmd_infer(args) -> int:
    model = load_checkpoint(args.checkpoint)
    written = infer_dir(model, args.images, args.out_dir)
    print(f"{len(written)} probability maps written to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toytrainer",
                                 description="desk-scale shrink-mask detector trainer")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train from a JSON config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--baseline", action="store_true",
                   help="train the shrink-only graph (no auxiliary heads)")
    p.add_argument("--out-dir", default=None, help="override config out_dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="probability maps from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--images", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_infer)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
