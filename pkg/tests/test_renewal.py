"""Renewal engines: exact values, engine agreement, diagnostics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import renewal_by_composition
from renewkit import laws, renewal
from renewkit.errors import CapacityExceeded, MissingTailIndex


def _random_law(rng, n_support=None):
    if rng.random() < 0.5:
        beta = float(rng.uniform(0.3, 2.5))
        return laws.power_law_return(beta, n_support or 4096)
    k = int(rng.integers(2, 9))
    while True:
        m = rng.uniform(0.05, 1.0, size=k)
        if rng.random() < 0.3:
            m[int(rng.integers(0, k))] = 0.0
        if m.sum() > 0:
            support = np.flatnonzero(m) + 1
            if np.gcd.reduce(support) == 1:
                return laws.custom_return(m / m.sum())


class TestDirectEngine:
    def test_geometric_closed_form(self):
        tl = laws.puncture(laws.custom_return([1.0]), 0.5)
        rs = renewal.renewal_direct(tl, 3)
        np.testing.assert_allclose(rs.u, [1.0, 0.5, 0.25, 0.125], rtol=0, atol=0)

    def test_hand_recursion(self):
        tl = laws.puncture(laws.custom_return([0.5, 0.5]), 0.5)
        rs = renewal.renewal_direct(tl, 3)
        np.testing.assert_allclose(rs.u, [1.0, 0.25, 0.3125, 0.140625], atol=1e-16)

    def test_u0_is_one(self):
        for law in (laws.custom_return([0.3, 0.7]), laws.power_law_return(1.1, 64)):
            rs = renewal.renewal_direct(laws.puncture(law, 0.42), 16)
            assert rs.u[0] == 1.0

    def test_geometric_long_run(self):
        tl = laws.puncture(laws.custom_return([1.0]), 0.5)
        rs = renewal.renewal_direct(tl, 200)
        n = np.arange(201)
        np.testing.assert_allclose(rs.u, 0.5**n, rtol=1e-12)

    def test_composition_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(4):
            law = _random_law(rng, n_support=16)
            tl = laws.puncture(law, float(rng.uniform(0.2, 0.8)))
            rs = renewal.renewal_direct(tl, 12)
            for n in range(13):
                assert rs.u[n] == pytest.approx(
                    renewal_by_composition(tl, n), abs=1e-13
                )

    def test_capacity(self):
        tl = laws.puncture(laws.custom_return([1.0]), 0.5)
        with pytest.raises(CapacityExceeded):
            renewal.renewal_direct(tl, renewal.CAPACITY_LIMIT + 1)


class TestFastEngine:
    def test_matches_direct_on_examples(self):
        for masses, p in (([1.0], 0.5), ([0.5, 0.5], 0.5), ([0.2, 0.3, 0.5], 0.7)):
            tl = laws.puncture(laws.custom_return(masses), p)
            a = renewal.renewal_direct(tl, 2000).u
            b = renewal.renewal_fast(tl, 2000).u
            assert np.max(np.abs(a - b)) <= 1e-11

    def test_geometric_deep_tail_relative(self):
        tl = laws.puncture(laws.custom_return([1.0]), 0.5)
        rs = renewal.renewal_fast(tl, 100)
        assert rs.u[100] == pytest.approx(0.5**100, rel=1e-9)

    @given(st.integers(min_value=0, max_value=200))
    @settings(max_examples=20, deadline=None)
    def test_engines_agree_small(self, n):
        tl = laws.puncture(laws.custom_return([0.4, 0.35, 0.25]), 0.6)
        a = renewal.renewal_direct(tl, n).u
        b = renewal.renewal_fast(tl, n).u
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_engines_agree_random_corpus(self):
        rng = np.random.default_rng(202)
        for k in (10, 12, 14):
            n = 1 << k
            law = _random_law(rng, n_support=n)
            tl = laws.puncture(law, float(rng.uniform(0.1, 0.9)))
            a = renewal.renewal_direct(tl, n).u
            b = renewal.renewal_fast(tl, n).u
            assert np.max(np.abs(a - b)) <= 1e-11

    def test_bit_stable_rerun(self):
        tl = laws.puncture(laws.power_law_return(0.5, 1 << 12), 0.5)
        a = renewal.renewal_fast(tl, 1 << 12).u
        b = renewal.renewal_fast(tl, 1 << 12).u
        assert np.array_equal(a, b)


class TestMassAndTails:
    def test_total_mass(self):
        assert renewal.total_mass(laws.puncture(laws.custom_return([1.0]), 0.5)) == 2.0
        tl = laws.puncture(laws.custom_return([1.0]), 0.3)
        assert renewal.total_mass(tl) == pytest.approx(10.0 / 7.0, rel=1e-15)

    @given(st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=25)
    def test_total_mass_exceeds_one(self, p):
        tl = laws.puncture(laws.custom_return([0.5, 0.5]), p)
        assert renewal.total_mass(tl) > 1.0

    def test_partial_sums_monotone_and_bounded(self):
        tl = laws.puncture(laws.power_law_return(0.5, 1 << 14), 0.5)
        rs = renewal.renewal_fast(tl, 1 << 14)
        partial = np.cumsum(rs.u)
        assert np.all(np.diff(partial) >= 0.0)
        assert partial[-1] <= renewal.total_mass(tl) + 1e-9
        assert np.all(rs.tail_sums >= -1e-12)

    def test_mass_conservation_vs_tail_prediction(self):
        tl = laws.puncture(laws.power_law_return(0.5, 1 << 16), 0.5)
        rs = renewal.renewal_fast(tl, 1 << 16)
        deficit = renewal.total_mass(tl) - float(np.sum(rs.u))
        predicted = (1.0 - tl.p) ** -2 * tl.defective_tail(1 << 16)
        assert deficit > 0.0
        assert 0.5 <= deficit / predicted <= 2.0


class TestDiagnostics:
    def test_missing_tail_index(self):
        tl = laws.puncture(laws.custom_return([1.0]), 0.5)
        rs = renewal.renewal_direct(tl, 32)
        with pytest.raises(MissingTailIndex):
            renewal.diag_pointwise(rs)
        with pytest.raises(MissingTailIndex):
            renewal.diag_tailsum(rs)

    def test_ratios_positive_and_finite(self):
        tl = laws.puncture(laws.power_law_return(0.8, 1 << 12), 0.4)
        rs = renewal.renewal_fast(tl, 1 << 12)
        r = renewal.diag_pointwise(rs)
        t = renewal.diag_tailsum(rs)
        assert np.all(np.isfinite(r)) and np.all(r > 0.0)
        assert np.all(np.isfinite(t)) and np.all(t > 0.0)

    def test_pointwise_ratio_converges(self):
        tl = laws.puncture(laws.power_law_return(0.5, 1 << 16), 0.5)
        rs = renewal.renewal_fast(tl, 1 << 16)
        r = renewal.diag_pointwise(rs)
        dyadic = [abs(r[(1 << k) - 1] - 1.0) for k in (10, 12, 14, 16)]
        assert dyadic[-1] <= 0.01
        assert dyadic[-1] <= dyadic[0]

    def test_pointwise_trend_monotone_beta15(self):
        tl = laws.puncture(laws.power_law_return(1.5, 1 << 16), 0.3)
        rs = renewal.renewal_fast(tl, 1 << 16)
        r = renewal.diag_pointwise(rs)
        devs = [abs(r[(1 << k) - 1] - 1.0) for k in range(8, 17, 2)]
        assert all(a >= b for a, b in zip(devs, devs[1:]))


def test_renewal_csv(tmp_path):
    tl = laws.puncture(laws.power_law_return(0.5, 64), 0.5)
    rs = renewal.renewal_fast(tl, 64)
    path = tmp_path / "u.csv"
    renewal.write_renewal_csv(rs, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,u_n,tail_u,ratio_pointwise,ratio_tailsum"
    assert len(lines) == 66
    row = lines[2].split(",")
    assert float(row[1]) == pytest.approx(rs.u[1], rel=1e-16)
