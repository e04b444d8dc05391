import math

import numpy as np
import pytest

from sgfsim.model import db_to_linear
from sgfsim.zones import ZoneLabel, classify_grid, classify_rate_pair, region_corners

NOMA_LABELS = (ZoneLabel.NOMA_GBU_FIRST, ZoneLabel.NOMA_GFU_FIRST, ZoneLabel.NOMA_EITHER)


class TestRegionCorners:
    def test_absent_gbu_degenerates(self):
        c = region_corners(0.0, 9.0)
        assert c.gbu_alone == 0.0
        assert c.gbu_decoded_first == 0.0
        assert c.gfu_alone == c.gfu_decoded_first == c.sum_rate == pytest.approx(math.log2(10.0))

    def test_reference_powers(self):
        c = region_corners(db_to_linear(8.0), db_to_linear(15.0))
        assert c.sum_rate == pytest.approx(5.28290, abs=1e-4)
        assert c.gbu_alone == pytest.approx(2.86979, abs=1e-4)
        assert c.gfu_alone == pytest.approx(5.02781, abs=1e-4)

    def test_sum_rate_identity(self):
        rng = np.random.default_rng(51)
        for _ in range(10_000):
            p_gbu = float(rng.uniform(0.0, 1000.0))
            p_gfu = float(rng.uniform(0.0, 1000.0))
            c = region_corners(p_gbu, p_gfu)
            assert c.gbu_decoded_first + c.gfu_alone == pytest.approx(c.sum_rate, rel=1e-12)
            assert c.gbu_alone + c.gfu_decoded_first == pytest.approx(c.sum_rate, rel=1e-12)

    def test_rejects_negative_power(self):
        with pytest.raises(ValueError):
            region_corners(-1.0, 1.0)


class TestClassifyRatePair:
    def setup_method(self):
        self.p_gbu = db_to_linear(8.0)
        self.p_gfu = db_to_linear(15.0)
        self.corners = region_corners(self.p_gbu, self.p_gfu)

    def classify(self, t_gbu, t_gfu):
        return classify_rate_pair(self.p_gbu, self.p_gfu, t_gbu, t_gfu)

    def test_corner_point_is_inclusive(self):
        c = self.corners
        label = self.classify(c.gbu_decoded_first, c.gfu_alone)
        assert label in (ZoneLabel.NOMA_GBU_FIRST, ZoneLabel.NOMA_EITHER)

    def test_sum_face_midpoint_needs_rate_splitting(self):
        # nudged just inside the face so rounding cannot push the sum over
        c = self.corners
        t_gbu = (c.gbu_alone + c.gbu_decoded_first) / 2.0
        t_gfu = c.sum_rate - t_gbu - 1e-9
        assert t_gfu <= c.gfu_alone
        assert self.classify(t_gbu, t_gfu) is ZoneLabel.RSMA_ONLY

    def test_exceeding_single_user_capacity_is_outage(self):
        c = self.corners
        assert self.classify(c.gbu_alone + 0.01, 0.1) is ZoneLabel.OUTAGE

    def test_small_pair_supports_either_order(self):
        assert self.classify(0.05, 0.05) is ZoneLabel.NOMA_EITHER

    def test_targets_must_be_positive(self):
        with pytest.raises(ValueError):
            self.classify(0.0, 1.0)

    def test_rsma_only_triangle_nonempty_for_positive_powers(self):
        rng = np.random.default_rng(52)
        for _ in range(200):
            p_gbu = float(rng.uniform(0.05, 300.0))
            p_gfu = float(rng.uniform(0.05, 300.0))
            c = region_corners(p_gbu, p_gfu)
            t_gbu = (c.gbu_alone + c.gbu_decoded_first) / 2.0
            t_gfu = c.sum_rate - t_gbu - 1e-9
            assert classify_rate_pair(p_gbu, p_gfu, t_gbu, t_gfu) is ZoneLabel.RSMA_ONLY

    def test_monotone_in_targets(self):
        rng = np.random.default_rng(53)
        for _ in range(2000):
            t_gbu = float(rng.uniform(0.01, 7.0))
            t_gfu = float(rng.uniform(0.01, 7.0))
            label = self.classify(t_gbu, t_gfu)
            if label is ZoneLabel.OUTAGE:
                assert self.classify(t_gbu + 0.5, t_gfu) is ZoneLabel.OUTAGE
                assert self.classify(t_gbu, t_gfu + 0.5) is ZoneLabel.OUTAGE


class TestClassifyGrid:
    def test_grid_shape_and_containment(self):
        p_gbu, p_gfu = 3.7, 42.0
        corners = region_corners(p_gbu, p_gfu)
        cells = classify_grid(p_gbu, p_gfu, 50)
        assert len(cells) == 2500
        for t_gbu, t_gfu, label in cells:
            if label in NOMA_LABELS:
                assert t_gbu <= corners.gbu_alone
                assert t_gfu <= corners.gfu_alone
                assert t_gbu + t_gfu <= corners.sum_rate + 1e-12

    def test_all_labels_present_at_reference_powers(self):
        cells = classify_grid(db_to_linear(8.0), db_to_linear(15.0), 60)
        labels = {label for _, _, label in cells}
        assert labels == set(ZoneLabel)

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            classify_grid(1.0, 1.0, 0)
