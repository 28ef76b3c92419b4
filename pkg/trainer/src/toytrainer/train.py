"""Training loop: Adam with polynomial learning-rate decay over the four
weighted loss terms (shrink / margin / coarse / discriminator)."""

from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from . import losses, seqfeat
from .data import Corpus
from .model import NetConfig, ShrinkNet, build_model


def batch_losses(model: ShrinkNet, corpus: Corpus, idx: list[int],
                 mining_rng: np.random.Generator | None = None):
    """Forward one batch and return the four loss terms.

    With the training heads stripped (shrink-only baseline) the margin,
    coarse and discriminator terms are constant zeros.
    """
    images = corpus.images[idx]
    aux = model.coarse_head is not None
    out = model(images, with_aux=aux)
    l_shrink = losses.dice_loss(out["shrink"][:, 0], corpus.shrink[idx])
    zero = torch.zeros((), dtype=l_shrink.dtype)
    if not aux:
        return l_shrink, zero, zero, zero
    l_margin = losses.dice_loss(out["margin"][:, 0], corpus.margin[idx])
    l_coarse = losses.dice_loss(out["coarse"][:, 0], corpus.coarse[idx])
    l_seq = zero
    if mining_rng is not None:
        pred_q = F.avg_pool2d(out["shrink"].detach(), 4)[:, 0].numpy()
        regions, feats = [], []
        for b, sample in enumerate(idx):
            gt_q = corpus.shrinkq[sample].numpy()
            for mask, label in seqfeat.mine_regions(gt_q, pred_q[b], mining_rng):
                regions.append((mask, label))
                feats.append(b)
        seqs, labels, lengths = [], [], []
        for (mask, label), b in zip(regions, feats):
            seq = seqfeat.region_sequence(out["fine"][b], mask)
            if seq is not None:
                seqs.append(seq)
                labels.append(label)
                lengths.append(seq.shape[0])
        if seqs:
            padded = torch.nn.utils.rnn.pad_sequence(seqs, batch_first=True)
            logits = model.discriminator(padded, lengths)
            l_seq = losses.bce_loss(logits, torch.tensor(labels))
    return l_shrink, l_margin, l_coarse, l_seq


def train(corpus: Corpus, cfg: NetConfig, epochs: int, batch_size: int,
          out_dir, baseline: bool = False, log_every: int = 1) -> Path:
    """Train a model on the corpus and write checkpoint.pt + metrics.jsonl."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(cfg.seed)
    model = build_model(cfg)
    if baseline:
        model.strip_training_heads()
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    order_rng = random.Random(cfg.seed)
    n = len(corpus)
    steps_per_epoch = max(1, (n + batch_size - 1) // batch_size)
    total_steps = epochs * steps_per_epoch
    step = 0
    log_path = out_dir / "metrics.jsonl"
    with open(log_path, "w", encoding="utf-8") as log:
        for epoch in range(epochs):
            order = list(range(n))
            order_rng.shuffle(order)
            sums = np.zeros(5)
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                mining_rng = np.random.default_rng((cfg.seed, epoch, start))
                lr = cfg.lr * (1.0 - step / total_steps) ** cfg.lr_power
                for group in opt.param_groups:
                    group["lr"] = lr
                l_sh, l_ma, l_co, l_sq = batch_losses(model, corpus, idx, mining_rng)
                total = losses.total_loss(l_sh, l_ma, l_co, l_sq, cfg.loss_weights)
                opt.zero_grad()
                total.backward()
                opt.step()
                step += 1
                sums += [t.item() for t in (total, l_sh, l_ma, l_co, l_sq)]
            if (epoch + 1) % log_every == 0 or epoch == epochs - 1:
                mean = sums / steps_per_epoch
                log.write(json.dumps({
                    "epoch": epoch + 1, "lr": lr, "total": mean[0],
                    "shrink": mean[1], "margin": mean[2],
                    "coarse": mean[3], "discriminator": mean[4],
                }) + "\n")
    model.eval()
    ckpt_path = out_dir / "checkpoint.pt"
    torch.save({"state_dict": model.state_dict(),
                "config": cfg.__dict__ | {"widths": list(cfg.widths),
                                          "loss_weights": list(cfg.loss_weights)},
                "baseline": baseline}, ckpt_path)
    return ckpt_path
