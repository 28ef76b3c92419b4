"""Fixtures: tiny corpora generated through the toolkit's CLI (the trainer
consumes the toolkit only through its files and commands)."""

import subprocess
import sys

import pytest


def run_toolkit(*args) -> str:
    """Invoke the shrinkmask CLI in a subprocess."""
    cmd = [sys.executable, "-m", "shrinkmask.cli", *[str(a) for a in args]]
    result = subprocess.run(cmd, capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed:\n{result.stdout}\n{result.stderr}")
    return result.stdout


SYNTH_FLAGS = ["--height", 128, "--width", 128, "--min-instances", 2,
               "--max-instances", 4, "--min-scale", 26, "--max-scale", 44]


def make_corpus(root, seed, count, flags=None):
    """synth + labels into root; returns (image_dir, label_dir, annotation_dir)."""
    corpus = root / f"corpus_{seed}"
    run_toolkit("synth", "--seed", seed, "--count", count,
                *(flags or SYNTH_FLAGS), "--out-dir", corpus)
    lab = root / f"labels_{seed}"
    run_toolkit("labels", "--annotations", corpus / "annotations", "--out-dir", lab)
    return corpus / "images", lab / "labels", corpus / "annotations"


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Eight 128x128 scenes with labels, for fast unit tests."""
    root = tmp_path_factory.mktemp("tiny")
    return make_corpus(root, seed=42, count=8)
