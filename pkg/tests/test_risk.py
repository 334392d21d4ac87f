"""Spatial risk measures: mean cost, variance reduction, asymptotics."""

import math

import numpy as np
import pytest

from windrisk import (
    ConvergenceError,
    DomainError,
    GevParams,
    PowerSpec,
    RiskQuery,
    UnsupportedVariogramError,
    anisotropic_power,
    asymptotic_cov_integral,
    clt_approx,
    disk,
    es_asymptotic,
    gamma,
    mean_cost,
    norm_pdf,
    power,
    quadratic_form,
    r2,
    square,
    var_asymptotic,
    var_gev,
    var_simple,
)

from conftest import ETA, TAU, XI


class TestMeanCost:
    def test_simple_mode(self):
        assert mean_cost(PowerSpec.simple(0.5)) == pytest.approx(gamma(0.5), rel=1e-14)

    def test_gev_beta_one(self, paper_gev):
        expected = 45.0 - 15.0 * gamma(1.2)
        assert mean_cost(PowerSpec.gev(1, paper_gev)) == pytest.approx(expected, rel=1e-13)

    def test_xi_minus_one_collapses(self):
        # eta + tau - tau Gamma(2) = eta
        p = PowerSpec.gev(1, GevParams(30.0, 3.0, -1.0))
        assert mean_cost(p) == pytest.approx(30.0, rel=1e-13)

    def test_mc_oracle(self, paper_gev):
        rng = np.random.default_rng(17)
        z = 1.0 / -np.log(rng.uniform(size=2_000_000))
        zg = (ETA - TAU / XI) + TAU * z**XI / XI
        se = zg.std(ddof=1) / math.sqrt(len(zg))
        assert abs(mean_cost(PowerSpec.gev(1, paper_gev)) - zg.mean()) <= 3.0 * se

    def test_moment_violations(self):
        with pytest.raises(DomainError):
            mean_cost(PowerSpec(beta=1.5, margin=None))
        with pytest.raises(DomainError):
            mean_cost(PowerSpec.gev(2, GevParams(0.0, 1.0, 0.6)))


class TestR2:
    def test_collapses_to_variance_at_zero(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        q = RiskQuery(region=disk(1.0), power=p, variogram=power(1.0, 2.0))
        assert r2(q, 1e-8) == pytest.approx(var_gev(p), rel=1e-3)

    def test_strictly_decreasing_and_vanishing(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        q = RiskQuery(region=disk(1.0), power=p, variogram=power(1.0, 2.0))
        lams = [0.25, 0.7, 2.0, 6.0, 18.0, 50.0]
        vals = [r2(q, lam) for lam in lams]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        # total diversification: the 1e-3 relative level is crossed between
        # lam = 50 (2.0e-3, cross-checked by Monte Carlo) and lam = 100
        assert r2(q, 100.0) < 1e-3 * var_gev(p)

    def test_square_dominates_disk(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        vgram = power(1.0, 2.0)
        for lam in (2.0, 10.0):
            r_disk = r2(RiskQuery(region=disk(1.0), power=p, variogram=vgram), lam)
            r_square = r2(RiskQuery(region=square(1.0), power=p, variogram=vgram), lam)
            assert r_square >= r_disk

    def test_simple_margin_mode(self):
        p = PowerSpec.simple(0.25)
        q = RiskQuery(region=disk(1.0), power=p, variogram=power(1.0, 1.0))
        assert r2(q, 1e-8) == pytest.approx(var_simple(0.25), rel=1e-3)
        assert 0.0 < r2(q, 5.0) < var_simple(0.25)

    def test_anisotropic_rejected(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        v = quadratic_form([[2.0, 0.5], [0.5, 1.0]])
        with pytest.raises(UnsupportedVariogramError):
            r2(RiskQuery(region=disk(1.0), power=p, variogram=v), 1.0)

    def test_xi_zero_continuity(self):
        # |r2(xi=+eps) - r2(xi=-eps)| <= 1e-2 r2 at the Gumbel limit
        v = power(1.0, 1.0)
        lam = 2.0
        vals = {}
        for xi in (1e-4, -1e-4, 0.0):
            p = PowerSpec.gev(1, GevParams(ETA, TAU, xi))
            vals[xi] = r2(RiskQuery(region=disk(1.0), power=p, variogram=v), lam)
        assert abs(vals[1e-4] - vals[-1e-4]) <= 1e-2 * vals[0.0]

    def test_lam_validation(self, paper_gev):
        q = RiskQuery(region=disk(1.0), power=PowerSpec.gev(1, paper_gev),
                      variogram=power(1.0, 1.0))
        with pytest.raises(DomainError):
            r2(q, 0.0)


class TestAsymptoticCovIntegral:
    def test_positive(self, paper_gev):
        for psi in (1.0, 2.0):
            val = asymptotic_cov_integral(PowerSpec.gev(1, paper_gev), power(1.0, psi))
            assert val > 0.0

    def test_beta_zero_field_is_constant(self):
        assert asymptotic_cov_integral(PowerSpec.simple(0.0), power(1.0, 1.0)) == 0.0

    def test_slow_decay_diagnosed(self, paper_gev):
        with pytest.raises(ConvergenceError):
            asymptotic_cov_integral(PowerSpec.gev(1, paper_gev), power(1.0, 0.05))

    def test_anisotropic_rejected(self, paper_gev):
        v = anisotropic_power(1.0, [[2.0, 0.5], [0.5, 1.0]], 1.0)
        with pytest.raises(UnsupportedVariogramError):
            asymptotic_cov_integral(PowerSpec.gev(1, paper_gev), v)


class TestCltApprox:
    def test_variance_scaling(self, paper_gev):
        q = RiskQuery(region=disk(1.0), power=PowerSpec.gev(1, paper_gev),
                      variogram=power(1.0, 1.0))
        a = clt_approx(q, 10.0)
        b = clt_approx(q, 20.0)
        assert b.variance == pytest.approx(a.variance / 4.0, rel=1e-10)

    def test_mean_independent_of_scale_and_region(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        v = power(1.0, 1.0)
        a = clt_approx(RiskQuery(region=disk(1.0), power=p, variogram=v), 10.0)
        b = clt_approx(RiskQuery(region=square(3.0), power=p, variogram=v), 50.0)
        assert a.mean == b.mean == pytest.approx(mean_cost(p), rel=1e-14)

    def test_sd(self, paper_gev):
        q = RiskQuery(region=disk(1.0), power=PowerSpec.gev(1, paper_gev),
                      variogram=power(1.0, 1.0))
        c = clt_approx(q, 10.0)
        assert c.sd == pytest.approx(math.sqrt(c.variance), rel=1e-15)


class TestVarEsAsymptotic:
    def test_alpha_half_returns_mean_with_warning(self, paper_gev):
        q = RiskQuery(region=disk(1.0), power=PowerSpec.gev(1, paper_gev),
                      variogram=power(1.0, 1.0), alpha=0.5)
        with pytest.warns(RuntimeWarning):
            assert var_asymptotic(q, 10.0) == mean_cost(q.power)

    def test_increasing_in_alpha(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        v = power(1.0, 1.0)
        vals = [
            var_asymptotic(RiskQuery(region=disk(1.0), power=p, variogram=v, alpha=a), 25.0)
            for a in (0.9, 0.95, 0.99)
        ]
        assert vals[0] < vals[1] < vals[2]

    def test_es_dominates_var(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        v = power(1.0, 1.0)
        for a in (0.9, 0.95, 0.99):
            q = RiskQuery(region=disk(1.0), power=p, variogram=v, alpha=a)
            assert es_asymptotic(q, 25.0) > var_asymptotic(q, 25.0)

    def test_es_alpha_half_closed_form(self, paper_gev):
        p = PowerSpec.gev(1, paper_gev)
        v = power(1.0, 1.0)
        q = RiskQuery(region=disk(1.0), power=p, variogram=v, alpha=0.5)
        k_num = asymptotic_cov_integral(p, v)
        lam = 10.0
        expected = mean_cost(p) + norm_pdf(0.0) / 0.5 * math.sqrt(k_num) / (
            math.sqrt(math.pi) * lam
        )
        assert es_asymptotic(q, lam) == pytest.approx(expected, rel=1e-12)

    def test_alpha_validation(self, paper_gev):
        with pytest.raises(DomainError):
            RiskQuery(region=disk(1.0), power=PowerSpec.gev(1, paper_gev),
                      variogram=power(1.0, 1.0), alpha=1.0)
