"""Special-function targets: gamma, incomplete Beta, Mittag-Leffler, fits."""

import math

import numpy as np
import pytest
from scipy.special import betainc

from renewkit import distributions as dist
from renewkit import laws
from renewkit.errors import BetaOutOfRange, MissingTailIndex, OutOfDomain
from renewkit.montecarlo import SimConfig


class TestGamma:
    def test_known_values(self):
        assert dist.gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert dist.gamma_fn(5.0) == pytest.approx(24.0, rel=1e-12)
        assert dist.gamma_fn(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)

    def test_domain(self):
        for x in (0.05, 51.0, -1.0):
            with pytest.raises(OutOfDomain):
                dist.gamma_fn(x)


class TestBetaIncomplete:
    def test_arcsine_case(self):
        assert dist.beta_incomplete(0.5, 1.0) == pytest.approx(math.pi, abs=1e-8)
        assert dist.beta_incomplete(0.5, 0.5) == pytest.approx(math.pi / 2, abs=1e-10)

    def test_zero(self):
        for beta in (0.1, 0.5, 0.9):
            assert dist.beta_incomplete(beta, 0.0) == 0.0

    def test_against_scipy_oracle(self):
        for beta in (0.1, 0.25, 0.5, 0.75, 0.9):
            for t in (0.01, 0.2, 0.5, 0.8, 0.99, 1.0):
                ref = math.pi / math.sin(math.pi * beta) * betainc(beta, 1 - beta, t)
                assert dist.beta_incomplete(beta, t) == pytest.approx(ref, abs=1e-9)

    def test_monotone(self):
        t = np.linspace(0, 1, 41)
        vals = [dist.beta_incomplete(0.3, ti) for ti in t]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_reflection_identity(self):
        # u -> 1-u swaps the exponents
        for beta in (0.2, 0.5, 0.7):
            for t in (0.1, 0.4, 0.9):
                lhs = dist.beta_incomplete(beta, t)
                rhs = dist.beta_incomplete(beta, 1.0) - dist.beta_incomplete(
                    1.0 - beta, 1.0 - t
                )
                assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_total_mass_reflection(self):
        for beta in [k / 10 for k in range(1, 10)]:
            total = dist.beta_incomplete(beta, 1.0)
            assert total * math.sin(math.pi * beta) / math.pi == pytest.approx(
                1.0, abs=1e-8
            )

    def test_domain_errors(self):
        with pytest.raises(BetaOutOfRange):
            dist.beta_incomplete(1.0, 0.5)
        with pytest.raises(ValueError):
            dist.beta_incomplete(0.5, 1.5)


class TestMittagLefflerMoments:
    def test_zeroth_and_first(self):
        for beta in (0.2, 0.5, 0.8, 1.0):
            assert dist.ml_moment(beta, 0) == 1.0
            assert dist.ml_moment(beta, 1) == pytest.approx(1.0, rel=1e-14)

    def test_arcsine_second_moment(self):
        assert dist.ml_moment(0.5, 2) == pytest.approx(math.pi / 2, rel=1e-13)

    def test_degenerate_at_one(self):
        for k in range(11):
            assert dist.ml_moment(1.0, k) == pytest.approx(1.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(BetaOutOfRange):
            dist.ml_moment(1.2, 1)
        with pytest.raises(ValueError):
            dist.ml_moment(0.5, -1)


class TestCharFit:
    def test_power_law_slope(self):
        law = laws.power_law_return(0.5, 10**6)
        grid = np.logspace(-2.5, -1, 24)
        fit = dist.estimate_c_beta(law, grid)
        assert abs(fit.slope - 0.5) <= 0.03
        assert not fit.rejected

    def test_grid_halving_stability(self):
        law = laws.power_law_return(0.5, 10**6)
        grid = np.logspace(-2.5, -1, 24)
        fit_full = dist.estimate_c_beta(law, grid)
        fit_half = dist.estimate_c_beta(law, grid[::2])
        assert abs(fit_half.c_abs / fit_full.c_abs - 1.0) < 0.02

    def test_deterministic_law_rejected(self):
        det = laws.custom_return([1.0])
        fit = dist.estimate_c_beta(det, np.logspace(-2.5, -1, 12), beta=0.5)
        assert fit.rejected
        assert fit.slope == pytest.approx(1.0, abs=0.02)

    def test_missing_tail_index(self):
        with pytest.raises(MissingTailIndex):
            dist.estimate_c_beta(laws.custom_return([1.0]), [0.01, 0.02, 0.05])


class TestStableScaling:
    def test_power_law_self_consistency(self):
        law = laws.power_law_return(0.5, 10**5)
        cfg = SimConfig(seed=9, samples=30000)
        rep = dist.stable_scaling_check(law, (500, 2000), 30000, cfg)
        assert rep.ks_distance <= 0.03
        assert rep.converged

    def test_deterministic_law_degenerate(self):
        det = laws.custom_return([1.0])
        cfg = SimConfig(seed=9, samples=2000)
        rep = dist.stable_scaling_check(det, (100, 400), 2000, cfg, beta=0.5)
        assert rep.ks_distance == 1.0  # point masses at different locations
        assert not rep.converged

    def test_seed_determinism(self):
        law = laws.power_law_return(0.5, 10**4)
        cfg = SimConfig(seed=123, samples=5000)
        a = dist.stable_scaling_check(law, (200, 800), 5000, cfg)
        b = dist.stable_scaling_check(law, (200, 800), 5000, cfg)
        assert a.ks_distance == b.ks_distance

    def test_m2_validation(self):
        law = laws.power_law_return(0.5, 10**4)
        cfg = SimConfig(seed=1, samples=100)
        with pytest.raises(ValueError):
            dist.stable_scaling_check(law, (100, 300), 100, cfg)
