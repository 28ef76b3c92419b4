"""Inference: checkpoint + image containers -> full-resolution probability
containers in the toolkit's interchange format."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .containers import read_container, write_container
from .model import NetConfig, build_model


def load_checkpoint(path) -> torch.nn.Module:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    raw = dict(blob["config"])
    raw["widths"] = tuple(raw["widths"])
    raw["loss_weights"] = tuple(raw["loss_weights"])
    model = build_model(NetConfig(**raw))
    if blob.get("baseline"):
        model.strip_training_heads()
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model


def predict_map(model: torch.nn.Module, image: np.ndarray) -> np.ndarray:
    """uint8 (H, W) image -> float32 (H, W) shrink probability map.

    Dimensions not divisible by 32 are zero-padded for the forward pass and
    cropped back afterwards.
    """
    h, w = image.shape
    x = torch.from_numpy(image.astype(np.float32) / 255.0)[None, None]
    pad_h = (-h) % 32
    pad_w = (-w) % 32
    if pad_h or pad_w:
        x = F.pad(x, (0, pad_w, 0, pad_h))
    with torch.no_grad():
        pm = model(x)["shrink"][0, 0, :h, :w]
    return pm.numpy().astype(np.float32)


def infer_dir(model: torch.nn.Module, image_dir, out_dir) -> list[Path]:
    image_dir, out_dir = Path(image_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in sorted(image_dir.glob("*.ztdm")):
        pm = predict_map(model, read_container(path)[0])
        out_path = out_dir / path.name
        write_container(out_path, pm)
        written.append(out_path)
    return written
