"""Corpus loading: images plus the four label containers per scene."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .containers import read_container

LABEL_KINDS = ("shrink", "shrinkq", "coarse", "margin")


@dataclass
class Corpus:
    stems: list[str]
    images: torch.Tensor          # (N, 1, H, W) float32 in [0, 1]
    shrink: torch.Tensor          # (N, H, W) uint8 tri-state
    shrinkq: torch.Tensor         # (N, H/4, W/4) uint8 tri-state
    coarse: torch.Tensor          # (N, H/16, W/16) uint8 tri-state
    margin: torch.Tensor          # (N, H/4, W/4) uint8 tri-state

    def __len__(self) -> int:
        return len(self.stems)


def load_corpus(image_dir, label_dir) -> Corpus:
    image_dir, label_dir = Path(image_dir), Path(label_dir)
    stems = sorted(p.name.removesuffix(".ztdm")
                   for p in image_dir.iterdir() if p.name.endswith(".ztdm"))
    if not stems:
        raise ValueError(f"no image containers under {image_dir}")
    images, labels = [], {kind: [] for kind in LABEL_KINDS}
    for stem in stems:
        img = read_container(image_dir / f"{stem}.ztdm")[0]
        images.append(img.astype(np.float32) / 255.0)
        for kind in LABEL_KINDS:
            path = label_dir / f"{stem}.{kind}.ztdm"
            if not path.exists():
                raise ValueError(f"sample {stem}: missing {kind} label at {path}")
            labels[kind].append(read_container(path)[0])
    return Corpus(
        stems=stems,
        images=torch.from_numpy(np.stack(images)).unsqueeze(1),
        shrink=torch.from_numpy(np.stack(labels["shrink"])),
        shrinkq=torch.from_numpy(np.stack(labels["shrinkq"])),
        coarse=torch.from_numpy(np.stack(labels["coarse"])),
        margin=torch.from_numpy(np.stack(labels["margin"])),
    )
