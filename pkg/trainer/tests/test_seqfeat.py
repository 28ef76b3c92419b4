import numpy as np
import torch

from shrinkmask.sequence import sequence_projection  # oracle, test-time only

from toytrainer.seqfeat import discriminator_batch, mine_regions, region_sequence


class TestRegionSequence:
    def test_matches_toolkit_projection(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            h, w = int(rng.integers(3, 14)), int(rng.integers(3, 14))
            mask = (rng.random((h, w)) > 0.5).astype(np.uint8)
            if not mask.any():
                mask[0, 0] = 1
            feat = rng.random((4, h, w)).astype(np.float32)
            got = region_sequence(torch.from_numpy(feat), mask.astype(bool)).numpy()
            want = sequence_projection(mask, feat.astype(np.float64))
            assert got.shape == want.shape
            assert np.allclose(got, want, atol=1e-6)

    def test_gradient_flows_to_features(self):
        feat = torch.rand(2, 6, 9, requires_grad=True)
        mask = np.zeros((6, 9), bool)
        mask[1:4, 2:7] = True
        region_sequence(feat, mask).sum().backward()
        assert feat.grad.abs().sum() > 0

    def test_empty_mask_returns_none(self):
        assert region_sequence(torch.rand(1, 4, 4), np.zeros((4, 4), bool)) is None


class TestMining:
    def test_positives_are_gt_components(self):
        gt = np.zeros((16, 16), np.uint8)
        gt[2:5, 2:9] = 1
        gt[10:13, 4:12] = 1
        regions = mine_regions(gt, np.zeros((16, 16), np.float32),
                               np.random.default_rng(1))
        pos = [m for m, label in regions if label == 1.0]
        assert len(pos) == 2
        assert all((m & (gt == 1)).sum() == m.sum() for m in pos)

    def test_negatives_disjoint_from_gt(self):
        gt = np.zeros((16, 16), np.uint8)
        gt[2:6, 2:10] = 1
        pred = np.zeros((16, 16), np.float32)
        pred[2:6, 2:10] = 1.0   # overlaps gt: not a negative
        pred[10:14, 8:15] = 1.0  # disjoint: a mined negative
        regions = mine_regions(gt, pred, np.random.default_rng(2))
        for mask, label in regions:
            if label == 0.0:
                assert not (mask & (gt == 1)).any()

    def test_deterministic_given_rng(self):
        gt = np.zeros((12, 12), np.uint8)
        gt[3:6, 3:9] = 1
        a = mine_regions(gt, np.zeros((12, 12), np.float32), np.random.default_rng(7))
        b = mine_regions(gt, np.zeros((12, 12), np.float32), np.random.default_rng(7))
        assert len(a) == len(b)
        for (ma, la), (mb, lb) in zip(a, b):
            assert la == lb and np.array_equal(ma, mb)


class TestDiscriminatorBatch:
    def test_pads_and_labels(self):
        gt = np.zeros((16, 16), np.uint8)
        gt[2:5, 2:12] = 1
        regions = mine_regions(gt, np.zeros((16, 16), np.float32),
                               np.random.default_rng(3))
        feat = torch.rand(8, 16, 16)
        padded, labels, lengths = discriminator_batch(feat, regions)
        assert padded.shape[0] == len(labels) == len(lengths)
        assert padded.shape[2] == 8
        assert labels.max() == 1.0 and labels.min() == 0.0
