import numpy as np
import pytest

from spectralte.randtest import (
    TestReport,
    censored_test,
    conjunctive_test,
    eig_distance_stat,
    matched_pair_test,
)
from conftest import binary_symmetric, symmetric


class TestEigDistanceStat:
    def test_identical_arms_zero(self, rng):
        m = symmetric(rng, 5)
        assert eig_distance_stat(m, m, np.unique(m)) == pytest.approx(0.0, abs=1e-12)

    def test_ones_vs_zeros(self):
        stat = eig_distance_stat(np.ones((3, 3)), np.zeros((3, 3)), [0.5])
        assert stat == pytest.approx(1.0)

    def test_matches_direct_recomputation(self, rng):
        from spectralte.spectra import pad_values, sorted_values

        m1 = symmetric(rng, 4)
        m0 = symmetric(rng, 6)
        grid = np.unique(np.concatenate([m1.ravel(), m0.ravel()]))
        expected = 0.0
        for y in grid:
            v1 = pad_values(sorted_values((m1 <= y).astype(float)), 6)
            v0 = pad_values(sorted_values((m0 <= y).astype(float)), 6)
            expected = max(expected, float(np.sum((v1 - v0) ** 2)))
        assert eig_distance_stat(m1, m0, grid) == pytest.approx(expected)

    def test_empty_grid_rejected(self, rng):
        m = symmetric(rng, 3)
        with pytest.raises(ValueError, match="nonempty"):
            eig_distance_stat(m, m, [])


class TestReportContract:
    def test_p_value_formula_enforced(self):
        with pytest.raises(ValueError, match="p-value"):
            TestReport(
                statistic=1.0,
                resampled=np.array([0.0, 2.0]),
                p_value=0.9,
                seed=1,
                design="censored",
            )

    def test_minimum_p_value(self, rng):
        report = censored_test(
            np.ones((4, 4)) - np.eye(4), np.zeros((20, 20)), 0.3, 99, seed=11
        )
        assert report.p_value >= 1.0 / 100.0


class TestMatchedPairs:
    def test_identical_pairs_statistic_zero(self, rng):
        m = binary_symmetric(rng, 4)
        report = matched_pair_test([(m, m), (m, m)], 19, seed=5)
        assert report.statistic == pytest.approx(0.0, abs=1e-12)
        assert report.p_value == 1.0

    def test_single_pair_is_degenerate(self):
        report = matched_pair_test(
            [(np.ones((3, 3)), np.zeros((3, 3)))], 19, seed=123
        )
        assert report.p_value == 1.0  # swap leaves the squared distance unchanged

    def test_deterministic_given_seed(self, rng):
        pairs = [(binary_symmetric(rng, 4), binary_symmetric(rng, 4)) for _ in range(3)]
        a = matched_pair_test(pairs, 29, seed=7)
        b = matched_pair_test(pairs, 29, seed=7)
        assert a.statistic == b.statistic
        np.testing.assert_array_equal(a.resampled, b.resampled)
        assert a.p_value == b.p_value

    def test_empty_pairs_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            matched_pair_test([], 9, seed=1)


class TestConjunctive:
    def test_constant_outcomes_equal_groups(self, rng):
        y = np.full((6, 6), 1.0)
        labels = np.array([1, 1, 1, 2, 2, 2])
        report = conjunctive_test(y, labels, labels, 0.5, 49, seed=3)
        assert report.statistic == pytest.approx(0.0, abs=1e-12)
        assert report.p_value == 1.0

    def test_deterministic_given_seed(self, rng):
        y = (rng.random((7, 6)) < 0.5).astype(float)
        bg = (rng.random(7) < 0.5).astype(int) + 1
        sg = (rng.random(6) < 0.5).astype(int) + 1
        a = conjunctive_test(y, bg, sg, 0.4, 29, seed=13)
        b = conjunctive_test(y, bg, sg, 0.4, 29, seed=13)
        np.testing.assert_array_equal(a.resampled, b.resampled)

    def test_empty_observed_group_rejected(self, rng):
        y = (rng.random((4, 4)) < 0.5).astype(float)
        with pytest.raises(ValueError, match="empty"):
            conjunctive_test(y, [1, 1, 1, 1], [1, 2, 1, 2], 0.5, 9, seed=1)

    def test_bad_labels_rejected(self, rng):
        y = (rng.random((4, 4)) < 0.5).astype(float)
        with pytest.raises(ValueError, match="labels"):
            conjunctive_test(y, [0, 1, 2, 1], [1, 2, 1, 2], 0.5, 9, seed=1)

    def test_bad_pi_rejected(self, rng):
        y = (rng.random((4, 4)) < 0.5).astype(float)
        with pytest.raises(ValueError, match="pi"):
            conjunctive_test(y, [1, 2, 1, 2], [1, 2, 1, 2], 1.0, 9, seed=1)


class TestCensored:
    def test_extreme_separation_minimal_p(self, rng):
        complete = np.ones((6, 6)) - np.eye(6)
        empty = np.zeros((24, 24))
        report = censored_test(complete, empty, 0.25, 99, seed=7)
        assert report.p_value == pytest.approx(1.0 / 100.0)

    def test_deterministic_given_seed(self, rng):
        y0 = binary_symmetric(rng, 15, zero_diagonal=True)
        y1 = y0[:5, :5]
        a = censored_test(y1, y0, 0.3, 49, seed=99)
        b = censored_test(y1, y0, 0.3, 49, seed=99)
        np.testing.assert_array_equal(a.resampled, b.resampled)
        assert a.design == "censored"

    def test_null_submatrix_draw_not_extreme(self, rng):
        # a treated matrix drawn by the resampling mechanism itself should
        # rarely look extreme; single-run sanity only
        y0 = binary_symmetric(rng, 20, zero_diagonal=True)
        take = np.flatnonzero(rng.random(20) < 0.3)
        report = censored_test(y0[np.ix_(take, take)], y0, 0.3, 99, seed=5)
        assert report.p_value >= 0.01
