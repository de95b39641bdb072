import numpy as np
import pytest

from spectralte.bounds import dpo_bounds
from spectralte.smooth import (
    ONE_SIDED_QUINTIC,
    SYMMETRIC_QUARTIC,
    default_bandwidth,
    smooth_kernel,
    smoothed_dpo_bounds,
    smoothed_eig_product,
    smoothed_ste_cdf,
)
from spectralte.spectra import eig_dot, indicator, sorted_values
from spectralte.ste import stt
from conftest import symmetric

KNOTS = {"symmetricQuartic": (-1.0, 1.0), "oneSidedQuintic": (0.0, 1.0)}


class TestKernels:
    @pytest.mark.parametrize("kernel", [SYMMETRIC_QUARTIC, ONE_SIDED_QUINTIC])
    def test_limits_and_range(self, kernel):
        assert kernel.evaluate(-10.0) == 1.0
        assert kernel.evaluate(10.0) == 0.0
        u = np.linspace(-2, 2, 2001)
        v = kernel.evaluate(u)
        assert np.all((v >= 0.0) & (v <= 1.0))
        assert np.all(np.diff(v) <= 1e-12)  # monotone nonincreasing

    def test_quartic_center(self):
        assert SYMMETRIC_QUARTIC.evaluate(0.0) == pytest.approx(0.5)

    def test_quintic_counts_threshold_fully(self):
        assert ONE_SIDED_QUINTIC.evaluate(0.0) == 1.0

    @pytest.mark.parametrize("kernel", [SYMMETRIC_QUARTIC, ONE_SIDED_QUINTIC])
    def test_derivative_consistent_and_bounded(self, kernel):
        u = np.linspace(-1.5, 1.5, 3001)
        step = u[1] - u[0]
        numeric = np.gradient(kernel.evaluate(u), step)
        np.testing.assert_allclose(numeric, kernel.derivative(u), atol=5e-3)
        assert np.max(np.abs(kernel.derivative(u))) < 2.0

    @pytest.mark.parametrize("kernel", [SYMMETRIC_QUARTIC, ONE_SIDED_QUINTIC])
    def test_derivative_zero_outside_transition(self, kernel):
        lo, hi = KNOTS[kernel.kind]
        assert kernel.derivative(lo - 0.5) == 0.0
        assert kernel.derivative(hi + 0.5) == 0.0

    @pytest.mark.parametrize("kernel", [SYMMETRIC_QUARTIC, ONE_SIDED_QUINTIC])
    def test_second_derivative_continuous_at_knots(self, kernel):
        # closed-form second derivatives, derived independently of the library
        if kernel.kind == "symmetricQuartic":
            def second_inside(u):
                return (15.0 / 4.0) * u * (1.0 - u**2)
            inside = lambda u: -1.0 < u < 1.0
        else:
            def second_inside(u):
                return -60.0 * u * (2.0 * u - 1.0) * (u - 1.0)
            inside = lambda u: 0.0 < u < 1.0

        step = 1e-4
        for knot in KNOTS[kernel.kind]:
            # both one-sided limits of K'' are zero: no jump at the knot
            assert second_inside(knot) == pytest.approx(0.0, abs=1e-12)
            # and the shipped derivative matches the closed form near the knot,
            # so the kernel really is twice differentiable there
            for offset in (-3 * step, 3 * step):
                u = knot + offset
                numeric = (
                    kernel.derivative(u + step) - kernel.derivative(u - step)
                ) / (2 * step)
                analytic = second_inside(u) if inside(u) else 0.0
                assert abs(numeric - analytic) < 1e-4

    def test_lookup_by_name(self):
        assert smooth_kernel("symmetricQuartic") is SYMMETRIC_QUARTIC
        with pytest.raises(ValueError, match="unknown kernel"):
            smooth_kernel("gaussian")


class TestSmoothedEigProduct:
    def test_saturated_regime_equals_exact(self, rng):
        y = symmetric(rng, 6)
        t = float(y.max()) + 5.0  # every entry far below the threshold
        value = smoothed_eig_product(y, y, t, t, h=1.0)
        v = sorted_values(indicator(y, t).entries)
        assert value == pytest.approx(eig_dot(v, v, "sorted"), abs=1e-12)

    def test_far_above_thresholds_zero(self, rng):
        y = symmetric(rng, 5)
        t = float(y.min()) - 5.0
        assert smoothed_eig_product(y, y, t, t, h=1.0) == pytest.approx(0.0, abs=1e-12)

    def test_small_bandwidth_approximates_exact(self, rng):
        y1 = symmetric(rng, 20)
        y0 = symmetric(rng, 20)
        # thresholds in the widest entry-free gaps, comfortably off the values
        def gap_midpoint(m):
            entries = np.unique(m)
            gaps = np.diff(entries)
            k = int(np.argmax(gaps))
            return float((entries[k] + entries[k + 1]) / 2.0)

        t1, t0 = gap_midpoint(y1), gap_midpoint(y0)
        scale = float(max(y1.max() - y1.min(), y0.max() - y0.min()))
        value = smoothed_eig_product(y1, y0, t1, t0, h=1e-3 * scale)
        exact = eig_dot(
            sorted_values(indicator(y1, t1).entries),
            sorted_values(indicator(y0, t0).entries),
            "sorted",
        )
        assert value == pytest.approx(exact, abs=1e-3)

    def test_rejects_bad_bandwidth(self, rng):
        y = symmetric(rng, 3)
        with pytest.raises(ValueError, match="bandwidth"):
            smoothed_eig_product(y, y, 0.0, 0.0, h=0.0)


class TestSmoothedDpoBounds:
    def test_saturated_equals_exact(self, rng):
        y1 = symmetric(rng, 5)
        y0 = symmetric(rng, 5)
        t1 = float(y1.max()) + 5.0
        t0 = float(y0.max()) + 5.0
        sm = smoothed_dpo_bounds(y1, y0, t1, t0, h=1.0)
        exact = dpo_bounds(y1, y0, t1, t0)
        assert sm.lower == pytest.approx(exact.lower, abs=1e-12)
        assert sm.upper == pytest.approx(exact.upper, abs=1e-12)

    def test_all_zero_regime(self, rng):
        y1 = symmetric(rng, 5)
        t = float(min(y1.min(), y1.min())) - 5.0
        sm = smoothed_dpo_bounds(y1, y1, t, t, h=1.0)
        assert sm.lower == pytest.approx(0.0, abs=1e-12)
        assert sm.upper == pytest.approx(0.0, abs=1e-12)

    def test_bandwidth_sweep_converges(self, rng):
        y1 = symmetric(rng, 30)
        y0 = symmetric(rng, 30)
        t1, t0 = 0.137, -0.259
        scale = float(max(y1.max() - y1.min(), y0.max() - y0.min()))
        exact = dpo_bounds(y1, y0, t1, t0)
        errors = []
        for frac in (0.1, 0.01, 0.001):
            sm = smoothed_dpo_bounds(y1, y0, t1, t0, h=frac * scale)
            errors.append(
                max(abs(sm.lower - exact.lower), abs(sm.upper - exact.upper))
            )
        assert errors[0] > errors[1] > errors[2]
        assert errors[1] < 0.02


class TestSmoothedSteCdf:
    def test_above_support_one(self, rng):
        y1 = symmetric(rng, 6)
        y0 = symmetric(rng, 6)
        entries = stt(y1, y0).entries
        h = 0.1
        y = float(entries.max()) + 2 * h
        assert smoothed_ste_cdf(y1, y0, "treated", y, h) == pytest.approx(1.0)

    def test_below_support_zero(self, rng):
        y1 = symmetric(rng, 6)
        y0 = symmetric(rng, 6)
        entries = stt(y1, y0).entries
        h = 0.1
        y = float(entries.min()) - 2 * h
        assert smoothed_ste_cdf(y1, y0, "treated", y, h) == pytest.approx(0.0)

    def test_close_to_exact_cdf_at_small_bandwidth(self, rng):
        y1 = symmetric(rng, 15)
        y0 = symmetric(rng, 15)
        entries = stt(y1, y0).entries.ravel()
        y = float(np.median(entries)) + 0.000417
        scale = float(entries.max() - entries.min())
        value = smoothed_ste_cdf(y1, y0, "treated", y, h=0.01 * scale)
        exact = float(np.mean(entries <= y))
        assert abs(value - exact) < 0.02

    def test_monotone_in_y(self, rng):
        y1 = symmetric(rng, 8)
        y0 = symmetric(rng, 8)
        grid = np.linspace(-3, 3, 21)
        values = [smoothed_ste_cdf(y1, y0, "untreated", y, h=0.25) for y in grid]
        assert np.all(np.diff(values) >= -1e-12)

    def test_rejects_bad_basis(self, rng):
        y = symmetric(rng, 3)
        with pytest.raises(ValueError, match="basis_arm"):
            smoothed_ste_cdf(y, y, "both", 0.0, 0.1)


def test_default_bandwidth_positive(rng):
    y1 = symmetric(rng, 10)
    y0 = symmetric(rng, 12)
    h = default_bandwidth(y1, y0)
    assert h > 0
    assert h == pytest.approx(
        1.06 * np.concatenate([y1.ravel(), y0.ravel()]).std() * 12 ** (-1 / 3)
    )
