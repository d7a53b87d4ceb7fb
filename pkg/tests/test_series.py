"""Coefficient algebra and the tail-product decay regime checker."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renewkit import laws, renewal, series
from renewkit.errors import HypothesisViolated, ZeroCoefficientInWindow

finite_vec = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=40
)


class TestCauchyProduct:
    def test_examples(self):
        a = series.CoeffSeries([1, 1])
        b = series.CoeffSeries([1, -1])
        np.testing.assert_array_equal(series.cauchy_product(a, b, 2).c, [1, 0, -1])
        delta = series.CoeffSeries([1])
        x = series.CoeffSeries([3.0, -2.0, 0.5])
        np.testing.assert_array_equal(series.cauchy_product(delta, x, 2).c, x.c)

    def test_against_reference_loop(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=60)
        b = rng.normal(size=45)
        out = series.cauchy_product(series.CoeffSeries(a), series.CoeffSeries(b), 80).c
        ref = np.zeros(81)
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                if i + j <= 80:
                    ref[i + j] += ai * bj
        np.testing.assert_allclose(out, ref, atol=1e-12)

    @given(finite_vec, finite_vec)
    @settings(max_examples=60)
    def test_commutative(self, a, b):
        n = len(a) + len(b) - 2
        ab = series.cauchy_product(series.CoeffSeries(a), series.CoeffSeries(b), n).c
        ba = series.cauchy_product(series.CoeffSeries(b), series.CoeffSeries(a), n).c
        np.testing.assert_allclose(ab, ba, atol=1e-12)

    @given(finite_vec, finite_vec, finite_vec)
    @settings(max_examples=40)
    def test_associative(self, a, b, c):
        sa, sb, sc = map(series.CoeffSeries, (a, b, c))
        n = len(a) + len(b) + len(c) - 3
        left = series.cauchy_product(
            series.cauchy_product(sa, sb, len(a) + len(b) - 2), sc, n
        ).c
        right = series.cauchy_product(
            sa, series.cauchy_product(sb, sc, len(b) + len(c) - 2), n
        ).c
        np.testing.assert_allclose(left, right, atol=1e-10)

    def test_degree_validation(self):
        a = series.CoeffSeries([1, 2])
        with pytest.raises(ValueError):
            series.cauchy_product(a, a, 3)


class TestRunningSums:
    def test_examples(self):
        z_minus_z2 = series.CoeffSeries([0, 1, -1])
        np.testing.assert_array_equal(series.inv_one_minus_z(z_minus_z2).c, [0, 1, 0])
        sq = series.cauchy_product(z_minus_z2, z_minus_z2, 4)
        np.testing.assert_array_equal(series.inv_one_minus_z(sq).c, [0, 0, 1, -1, 0])
        const = series.CoeffSeries([1, 0, 0])
        np.testing.assert_array_equal(series.inv_one_minus_z(const).c, [1, 1, 1])

    @given(finite_vec)
    @settings(max_examples=60)
    def test_differences_recover_input(self, a):
        c = series.inv_one_minus_z(series.CoeffSeries(a)).c
        recovered = np.diff(np.concatenate([[0.0], c]))
        np.testing.assert_allclose(recovered, a, atol=1e-9)


class TestDifferentiate:
    def test_examples(self):
        np.testing.assert_array_equal(
            series.differentiate(series.CoeffSeries([0, 1, 0])).c, [1, 0]
        )
        np.testing.assert_array_equal(
            series.differentiate(series.CoeffSeries([1, 1, 1])).c, [1, 2]
        )

    def test_chain_rule_cross_check_with_renewal(self):
        # derivative of the renewal generating function equals u^2 * g'
        n = 1 << 10
        tl = laws.puncture(laws.custom_return([0.4, 0.35, 0.25]), 0.6)
        u = renewal.renewal_direct(tl, n + 1).u
        g = tl.lag_masses(n + 1)
        u_s = series.CoeffSeries(u)
        g_s = series.CoeffSeries(g)
        lhs = series.differentiate(u_s).c[: n + 1]
        uu = series.cauchy_product(u_s, u_s, n + 1)
        rhs = series.cauchy_product(uu, series.differentiate(g_s), n).c[: n + 1]
        np.testing.assert_allclose(lhs[: len(rhs)], rhs, atol=1e-12)


class TestDecayFit:
    def test_pure_power(self):
        n = np.arange(1, 20001, dtype=float)
        c = series.CoeffSeries(np.concatenate([[0.0], n**-2]))
        fit = series.decay_exponent_fit(c, (100, 20001))
        assert fit.slope == pytest.approx(-2.0, abs=0.01)
        assert not fit.curved

    def test_log_corrected_power(self):
        n = np.arange(1, 10**6 + 1, dtype=float)
        c = series.CoeffSeries(np.concatenate([[0.0], n**-2 * np.log(n + 1e-12)]))
        fit = series.decay_exponent_fit(c, (10**5, 10**6 + 1))
        assert -2.1 < fit.slope < -1.9
        assert fit.curved
        assert fit.curvature < 0.0  # the log factor flattens as n grows

    def test_constant_series(self):
        c = series.CoeffSeries(np.ones(500))
        fit = series.decay_exponent_fit(c, (10, 500))
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_zero_in_window(self):
        c = series.CoeffSeries([1.0, 1.0, 0.0, 1.0])
        with pytest.raises(ZeroCoefficientInWindow):
            series.decay_exponent_fit(c, (1, 4))


class TestRegimeCheck:
    def test_hypothesis_violated(self):
        a = series.CoeffSeries([1.0, 1.0])
        with pytest.raises(HypothesisViolated):
            series.regime_check(a, a, 0.5)

    def test_degenerate_polynomial(self):
        z = series.CoeffSeries([0, 1, -1])
        rep = series.regime_check(z, z, 0.5)
        assert rep.regime == "super-polynomial"

    def test_beta_above_one_matches(self):
        a = series.power_tail_series(1.5, 100000)
        rep = series.regime_check(a, a, 1.5)
        assert rep.predicted_exponent == 2.5
        assert abs(rep.fitted_exponent - 2.5) <= 0.15
        assert rep.matches_prediction

    def test_beta_one_log_regime_bounded(self):
        a = series.power_tail_series(1.0, 1 << 17)
        rep = series.regime_check(a, a, 1.0)
        assert rep.regime == "log-corrected"
        assert rep.log_ratio_spread < 4.0
        assert rep.matches_prediction

    def test_beta_half_truncation_dominated(self):
        # For beta < 1 the balancing mass at the origin interacts with the
        # chopped tail and the top-decade fit lands near the universal
        # truncation exponent (~0.74), well short of the predicted 2 beta.
        # The checker must report that honestly rather than match.
        a = series.power_tail_series(0.5, 100000)
        rep = series.regime_check(a, a, 0.5)
        assert rep.predicted_exponent == 1.0
        assert rep.fitted_exponent == pytest.approx(0.74, abs=0.08)
        assert not rep.matches_prediction

    def test_beta_one_ratio_bounded_on_wide_window(self):
        a = series.power_tail_series(1.0, 1 << 20)
        c = series._product_tail_coeffs(a, a)
        idx = np.arange(1000, (1 << 20) + 1)
        ratio = np.abs(c[1000 : (1 << 20) + 1]) * idx**2 / np.log(idx)
        assert ratio.min() > 0.0
        assert ratio.max() / ratio.min() < 1.1
