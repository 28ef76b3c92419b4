"""Tiny shrink-mask detector: 4-stage backbone (strides 4/8/16/32), a
coarse-fusion module with a 1/16 segmentation head, a fine-fusion module
with a 1/4 margin head, a full-resolution shrink head, and a bidirectional
LSTM sequence discriminator. The coarse, margin and discriminator heads are
training-only: stripping them leaves the shrink path bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn


@dataclass
class NetConfig:
    widths: tuple[int, int, int, int] = (16, 32, 64, 128)  # strides 4/8/16/32
    fuse_coarse: int = 32   # channels of the 1/16 fused map
    fuse_fine: int = 32     # channels of the 1/4 fused map
    rnn_hidden: int = 32
    rnn_layers: int = 2
    loss_weights: tuple[float, float, float, float] = (1.0, 0.25, 0.25, 0.25)
    lr: float = 1e-3
    lr_power: float = 0.9   # polynomial decay exponent
    seed: int = 0
    extra: dict = field(default_factory=dict)


def conv_bn(cin: int, cout: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


def tconv_bn(cin: int, cout: int, stride: int = 2) -> nn.Sequential:
    if stride == 1:
        layer = nn.ConvTranspose2d(cin, cout, 3, stride=1, padding=1, bias=False)
    else:
        layer = nn.ConvTranspose2d(cin, cout, 2, stride=2, bias=False)
    return nn.Sequential(layer, nn.BatchNorm2d(cout), nn.ReLU(inplace=True))


class Backbone(nn.Module):
    def __init__(self, widths):
        super().__init__()
        w1, w2, w3, w4 = widths
        self.stem = nn.Sequential(conv_bn(1, 8, 2), conv_bn(8, w1, 2))
        self.stage2 = conv_bn(w1, w2, 2)
        self.stage3 = conv_bn(w2, w3, 2)
        self.stage4 = conv_bn(w3, w4, 2)

    def forward(self, x):
        f1 = self.stem(x)
        f2 = self.stage2(f1)
        f3 = self.stage3(f2)
        f4 = self.stage4(f3)
        return f1, f2, f3, f4


class CoarseFusion(nn.Module):
    """Fuse the two coarse stages into a 1/16 feature map."""

    def __init__(self, w3, w4, cout):
        super().__init__()
        self.reduce3 = conv_bn(w3, cout)
        self.reduce4 = conv_bn(w4, cout)
        self.merge = conv_bn(2 * cout, cout)
        self.up = nn.Upsample(scale_factor=2, mode="nearest")

    def forward(self, f3, f4):
        cat = torch.cat([self.reduce3(f3), self.up(self.reduce4(f4))], dim=1)
        return self.merge(cat)


class FineFusion(nn.Module):
    """Fuse the two fine stages with the coarse map into 1/4 features."""

    def __init__(self, w1, w2, c_coarse, cout):
        super().__init__()
        half = cout // 2
        self.reduce1 = conv_bn(w1, half)
        self.reduce2 = conv_bn(w2, half)
        self.up2 = nn.Upsample(scale_factor=2, mode="nearest")
        self.branch_reduce = conv_bn(2 * half, half)
        self.branch_down = conv_bn(half, half, stride=2)
        self.branch_up = tconv_bn(half + c_coarse, cout)
        self.fuse = conv_bn(2 * half + cout, cout)

    def forward(self, f1, f2, coarse):
        cat = torch.cat([self.reduce1(f1), self.up2(self.reduce2(f2))], dim=1)
        down = self.branch_down(self.branch_reduce(cat))
        down = torch.cat([down, self.up2(coarse)], dim=1)
        up = self.branch_up(down)
        return self.fuse(torch.cat([cat, up], dim=1))


class SequenceDiscriminator(nn.Module):
    """Bidirectional LSTM over region sequences plus a linear classifier."""

    def __init__(self, channels, hidden, layers):
        super().__init__()
        self.rnn = nn.LSTM(channels, hidden, num_layers=layers,
                           batch_first=True, bidirectional=True)
        self.classify = nn.Linear(2 * hidden, 1)

    def forward(self, padded, lengths):
        packed = nn.utils.rnn.pack_padded_sequence(
            padded, lengths, batch_first=True, enforce_sorted=False)
        _, (h_n, _) = self.rnn(packed)
        # final layer's forward and backward hidden states, concatenated
        fwd, bwd = h_n[-2], h_n[-1]
        return self.classify(torch.cat([fwd, bwd], dim=1)).squeeze(1)


class ShrinkNet(nn.Module):
    def __init__(self, cfg: NetConfig):
        super().__init__()
        self.cfg = cfg
        torch.manual_seed(cfg.seed)
        w1, w2, w3, w4 = cfg.widths
        self.backbone = Backbone(cfg.widths)
        self.coarse_fusion = CoarseFusion(w3, w4, cfg.fuse_coarse)
        self.fine_fusion = FineFusion(w1, w2, cfg.fuse_coarse, cfg.fuse_fine)
        self.shrink_head = nn.Sequential(
            tconv_bn(cfg.fuse_fine, cfg.fuse_fine // 2),
            nn.ConvTranspose2d(cfg.fuse_fine // 2, 1, 2, stride=2),
        )
        # training-only heads
        self.coarse_head = nn.Sequential(
            conv_bn(cfg.fuse_coarse, cfg.fuse_coarse),
            nn.Conv2d(cfg.fuse_coarse, 1, 1),
        )
        self.margin_head = nn.Sequential(
            tconv_bn(cfg.fuse_fine, cfg.fuse_fine // 2, stride=1),
            nn.ConvTranspose2d(cfg.fuse_fine // 2, 1, 3, stride=1, padding=1),
        )
        self.discriminator = SequenceDiscriminator(
            cfg.fuse_fine, cfg.rnn_hidden, cfg.rnn_layers)

    def forward(self, images, with_aux: bool = False):
        """images: (B, 1, H, W) in [0, 1]; H and W divisible by 32.

        Returns a dict with 'shrink' (B, 1, H, W) probabilities and, when
        ``with_aux`` and the heads are present, 'coarse' (1/16), 'margin'
        (1/4) probabilities and the fused 'fine' features for the
        discriminator.
        """
        f1, f2, f3, f4 = self.backbone(images)
        coarse_feat = self.coarse_fusion(f3, f4)
        fine_feat = self.fine_fusion(f1, f2, coarse_feat)
        out = {"shrink": torch.sigmoid(self.shrink_head(fine_feat))}
        if with_aux and self.coarse_head is not None:
            out["coarse"] = torch.sigmoid(self.coarse_head(coarse_feat))
            out["margin"] = torch.sigmoid(self.margin_head(fine_feat))
            out["fine"] = fine_feat
        return out

    def strip_training_heads(self) -> "ShrinkNet":
        """Drop the coarse/margin/discriminator heads (inference graph)."""
        self.coarse_head = None
        self.margin_head = None
        self.discriminator = None
        return self

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def build_model(cfg: NetConfig) -> ShrinkNet:
    if tuple(cfg.widths).__len__() != 4:
        raise ValueError("widths must have exactly 4 stages (strides 4/8/16/32)")
    return ShrinkNet(cfg)


def build_baseline(full: ShrinkNet) -> ShrinkNet:
    """Shrink-only twin sharing the full model's initial weights."""
    twin = ShrinkNet(full.cfg)
    twin.load_state_dict(full.state_dict())
    return twin.strip_training_heads()
