"""Desk-scale trainer for the shrink-mask detector.

Consumes corpora produced by the shrinkmask toolkit (container and record
files), trains the tiny fusion network with its coarse / margin /
discriminator training heads, and emits probability-map containers the
toolkit's detect/eval commands consume.
"""

from .data import Corpus, load_corpus
from .infer import infer_dir, load_checkpoint, predict_map
from .model import NetConfig, ShrinkNet, build_baseline, build_model
from .train import train

__all__ = [
    "Corpus", "NetConfig", "ShrinkNet", "build_baseline", "build_model",
    "infer_dir", "load_checkpoint", "load_corpus", "predict_map", "train",
]
