import itertools

import numpy as np
import pytest

from spectralte.scalar import (
    OutcomeVector,
    binned_cate,
    ecdf,
    fh_bounds,
    makarov_bounds,
    qte,
    quantile,
)


def pairing_oracle_dte(v1, v0, y):
    """Fraction of differences <= y over every explicit pairing of the vectors."""
    values = []
    for perm in itertools.permutations(range(len(v1))):
        diffs = np.asarray(v1)[list(perm)] - np.asarray(v0)
        values.append(float(np.mean(diffs <= y)))
    return min(values), max(values)


class TestFhBounds:
    @pytest.mark.parametrize(
        "f1, f0, lo, up",
        [(0.7, 0.6, 0.3, 0.6), (1.0, 1.0, 1.0, 1.0), (0.3, 0.4, 0.0, 0.3)],
    )
    def test_formula(self, f1, f0, lo, up):
        b = fh_bounds(f1, f0)
        assert b.lower == pytest.approx(lo)
        assert b.upper == pytest.approx(up)

    def test_rejects_outside_unit_interval(self):
        with pytest.raises(ValueError):
            fh_bounds(1.2, 0.5)
        with pytest.raises(ValueError):
            fh_bounds(0.5, -0.1)

    def test_lower_never_exceeds_upper(self, rng):
        for _ in range(200):
            f1, f0 = rng.random(2)
            b = fh_bounds(f1, f0)
            assert b.lower <= b.upper

    def test_contains_any_explicit_pairing(self, rng):
        # joint CDF realized by a coupling always sits inside the bracket
        for _ in range(20):
            v1 = rng.normal(size=5)
            v0 = rng.normal(size=5)
            y1, y0 = rng.normal(size=2)
            for perm in itertools.permutations(range(5)):
                joint = float(np.mean((v1[list(perm)] <= y1) & (v0 <= y0)))
                b = fh_bounds(ecdf(v1, y1), ecdf(v0, y0))
                assert b.lower - 1e-12 <= joint <= b.upper + 1e-12


class TestMakarovBounds:
    def test_identical_marginals_uninformative_at_zero(self, rng):
        v = rng.normal(size=6)
        b = makarov_bounds(v, v, 0.0)
        assert b.lower == pytest.approx(0.0)
        assert b.upper == pytest.approx(1.0)

    def test_constant_shift_saturates(self, rng):
        v0 = rng.normal(size=5)
        v1 = v0 + 1.0
        b = makarov_bounds(v1, v0, 2.5)
        assert b.lower == pytest.approx(1.0)
        assert b.upper == pytest.approx(1.0)
        lo, hi = pairing_oracle_dte(v1, v0, 2.5)
        assert lo == hi == 1.0

    def test_contains_pairing_oracle(self, rng):
        for _ in range(15):
            v1 = rng.normal(size=5)
            v0 = rng.normal(size=5)
            y = float(rng.normal())
            lo, hi = pairing_oracle_dte(v1, v0, y)
            b = makarov_bounds(v1, v0, y)
            assert b.lower - 1e-12 <= lo
            assert hi <= b.upper + 1e-12

    def test_invariant_to_independent_permutations(self, rng):
        v1 = rng.normal(size=6)
        v0 = rng.normal(size=6)
        base = makarov_bounds(v1, v0, 0.4)
        moved = makarov_bounds(rng.permutation(v1), rng.permutation(v0), 0.4)
        assert moved.lower == pytest.approx(base.lower)
        assert moved.upper == pytest.approx(base.upper)


class TestQte:
    def test_parallel_shift(self):
        assert qte([1.0, 2.0], [0.0, 1.0], 0.5) == pytest.approx(1.0)

    def test_identical_vectors_zero(self, rng):
        v = rng.normal(size=7)
        for u in (0.01, 0.25, 0.5, 0.99, 1.0):
            assert qte(v, v, u) == 0.0

    def test_rejects_invalid_level(self):
        with pytest.raises(ValueError):
            qte([1.0], [1.0], 0.0)
        with pytest.raises(ValueError):
            quantile([1.0], 1.5)

    def test_left_continuous_inverse(self):
        v = [1.0, 2.0, 3.0, 4.0]
        assert quantile(v, 0.25) == 1.0
        assert quantile(v, 0.26) == 2.0
        assert quantile(v, 1.0) == 4.0

    def test_more_conservative_than_any_coupling(self, rng):
        # sum of squared quantile gaps <= sum of squared paired gaps
        n = 7
        grid = (np.arange(n) + 1) / n
        for _ in range(25):
            v1 = rng.normal(size=n)
            v0 = rng.normal(size=n)
            q_sum = sum(qte(v1, v0, u) ** 2 for u in grid)
            paired = float(np.sum((v1 - v0) ** 2))
            assert q_sum <= paired + 1e-9


class TestBinnedCate:
    def test_single_bin_is_mean_difference(self, rng):
        y1 = rng.random((4, 4))
        y1 = (y1 + y1.T) / 2
        y0 = rng.random((3, 3))
        y0 = (y0 + y0.T) / 2
        values, weights, labels = binned_cate(y1, y0, ["a"] * 4, ["a"] * 3)
        assert labels == [("a", "a")]
        assert values[0] == pytest.approx(y1.mean() - y0.mean())
        assert weights[0] == 16

    def test_identical_arms_zero(self, rng):
        y = rng.random((4, 4))
        y = (y + y.T) / 2
        bins = ["a", "b", "a", "b"]
        values, weights, _ = binned_cate(y, y, bins, bins)
        np.testing.assert_allclose(values, 0.0, atol=1e-15)
        assert weights.sum() == 16

    def test_two_bins_match_hand_cells(self):
        y1 = np.array(
            [
                [0.0, 1.0, 2.0, 3.0],
                [1.0, 0.0, 4.0, 5.0],
                [2.0, 4.0, 0.0, 6.0],
                [3.0, 5.0, 6.0, 0.0],
            ]
        )
        y0 = np.zeros((4, 4))
        bins = ["a", "a", "b", "b"]
        values, weights, labels = binned_cate(y1, y0, bins, bins)
        cells = dict(zip(labels, values))
        assert cells[("a", "a")] == pytest.approx(np.mean([0.0, 1.0, 1.0, 0.0]))
        assert cells[("a", "b")] == pytest.approx(np.mean([2.0, 3.0, 4.0, 5.0]))
        assert cells[("b", "a")] == pytest.approx(np.mean([2.0, 4.0, 3.0, 5.0]))
        assert cells[("b", "b")] == pytest.approx(np.mean([0.0, 6.0, 6.0, 0.0]))
        assert weights.sum() == 16

    def test_missing_bin_rejected(self, rng):
        y = rng.random((3, 3))
        y = (y + y.T) / 2
        with pytest.raises(ValueError, match="only one arm.*'c'|'c'"):
            binned_cate(y, y, ["a", "b", "c"], ["a", "b", "b"])

    def test_label_length_mismatch_rejected(self, rng):
        y = rng.random((3, 3))
        y = (y + y.T) / 2
        with pytest.raises(ValueError, match="labels"):
            binned_cate(y, y, ["a", "b"], ["a", "b", "a"])


class TestOutcomeVector:
    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="nonempty"):
            OutcomeVector([])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            OutcomeVector([1.0, np.inf])
