import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.special import erf

from elgdist.distributions import ElgParams, elg_sample
from elgdist.estimation import FitOptions, log_likelihood
from elgdist.inference import (
    ComparisonRow,
    InformationCriteria,
    ModelComparison,
    compare_models,
    fit_elg,
    fit_gamma,
    fit_lg,
    fit_lindley,
    fit_model,
    fit_weibull,
    information_criteria,
    lr_test,
    lr_test_nested,
)
from elgdist.special import DomainError


@pytest.fixture(scope="module")
def relief_table(relief):
    return compare_models(relief)


def _phi(z):
    return 0.5 * (1 + erf(z / math.sqrt(2)))


class TestCriteria:
    def test_elg_row(self):
        c = information_criteria(-15.5528, 3, 20)
        assert (c.aic, c.bic, c.aicc) == pytest.approx((37.1056, 40.0928, 38.6056), abs=5e-4)

    def test_gamma_row(self):
        # loglik back-derived as k - AIC/2
        c = information_criteria(2 - 39.6372 / 2, 2, 20)
        assert c.loglik == pytest.approx(-17.8186, abs=1e-12)
        assert (c.aic, c.aicc) == pytest.approx((39.6372, 40.3431), abs=5e-5)
        assert c.bic == pytest.approx(41.6287, abs=5e-4)

    def test_trivial(self):
        c = information_criteria(0.0, 1, 10)
        assert (c.aic, c.aicc) == (2.0, 2.5)
        assert c.bic == pytest.approx(2.302585, abs=1e-6)

    @pytest.mark.parametrize("k,n", [(3, 4), (2, 3), (0, 10), (1.5, 10)])
    def test_domain(self, k, n):
        with pytest.raises(DomainError):
            information_criteria(-1.0, k, n)

    @given(st.floats(-1e4, 1e4), st.integers(1, 6), st.integers(8, 10 ** 6))
    def test_identities(self, ll, k, n):
        c = information_criteria(ll, k, n)
        assert c.aic == 2 * k - 2 * ll
        assert c.bic == k * math.log(n) - 2 * ll
        assert c.aicc == c.aic + 2 * k * (k + 1) / (n - k - 1)


class TestLrTest:
    def test_equal(self):
        r = lr_test(-3.0, -3.0, 1)
        assert (r.omega, r.p_value) == (0.0, 1.0)

    def test_within_slack(self):
        assert lr_test(-3.0, -3.0 + 5e-9, 2).omega == 0.0

    def test_nesting_violation(self):
        with pytest.raises(DomainError):
            lr_test(-3.0, -2.9, 1)

    def test_df(self):
        with pytest.raises(DomainError):
            lr_test(0.0, -1.0, 0)

    @given(st.floats(1e-6, 60.0))
    def test_df1_normal_identity(self, omega):
        r = lr_test(omega / 2, 0.0, 1)
        assert r.p_value == pytest.approx(2 * (1 - _phi(math.sqrt(omega))), abs=1e-8)

    @given(st.floats(1e-3, 80.0), st.integers(1, 6))
    def test_against_scipy_chi2(self, omega, df):
        assert lr_test(omega / 2, 0.0, df).p_value == pytest.approx(stats.chi2.sf(omega, df), abs=1e-12)

    def test_relief_lg_null(self, relief):
        r = lr_test_nested(relief, "lg")
        assert r.df == 1
        assert r.omega == pytest.approx(7.5667, abs=0.02)
        assert r.p_value == pytest.approx(0.0059, abs=0.001)

    def test_relief_lindley_null(self, relief):
        lg = lr_test_nested(relief, "lg")
        r = lr_test_nested(relief, "lindley")
        assert r.df == 2 and r.omega >= lg.omega

    def test_unknown_null(self, relief):
        with pytest.raises(DomainError):
            lr_test_nested(relief, "weibull")


class TestComparators:
    def test_gamma(self, relief):
        f = fit_gamma(relief)
        assert f.estimates["shape"] == pytest.approx(9.6685, rel=5e-4)
        assert f.estimates["rate"] == pytest.approx(5.0887, rel=5e-4)
        assert f.criteria().aic == pytest.approx(39.6372, abs=0.05)
        assert f.score_norm <= 1e-8

    def test_gamma_against_scipy(self, relief):
        shape, _, scale = stats.gamma.fit(relief.values, floc=0)
        f = fit_gamma(relief)
        assert f.estimates["shape"] == pytest.approx(shape, rel=1e-4)
        assert f.estimates["rate"] == pytest.approx(1 / scale, rel=1e-4)
        assert f.loglik >= stats.gamma.logpdf(relief.values, shape, scale=scale).sum() - 1e-9

    def test_weibull(self, relief):
        f = fit_weibull(relief)
        assert f.estimates["shape"] == pytest.approx(2.7870, rel=5e-4)
        assert f.estimates["scale"] == pytest.approx(2.1300, rel=5e-4)
        assert f.criteria().aic == pytest.approx(45.1728, abs=0.05)
        c, _, s = stats.weibull_min.fit(relief.values, floc=0)
        assert f.estimates["shape"] == pytest.approx(c, rel=1e-4)
        assert f.estimates["scale"] == pytest.approx(s, rel=1e-4)

    def test_lg(self, relief):
        f = fit_lg(relief)
        assert f.estimates["theta"] == pytest.approx(3.1827, rel=5e-3)
        assert abs(f.estimates["p"] + 125.1293) / 125.1293 <= 0.05
        assert f.criteria().aic == pytest.approx(42.6723, abs=0.05)
        assert f.score_norm <= 1e-8

    def test_lindley(self, relief):
        f = fit_lindley(relief)
        xbar = relief.values.mean()
        closed = (-(xbar - 1) + math.sqrt((xbar - 1) ** 2 + 8 * xbar)) / (2 * xbar)
        assert f.estimates["theta"] == pytest.approx(closed, rel=1e-13)
        assert f.loglik == pytest.approx(log_likelihood(ElgParams(1, closed, 0), relief), rel=1e-13)

    def test_nesting_chain(self, relief):
        lg = fit_lg(relief)
        assert fit_elg(relief, lg).loglik >= lg.loglik >= fit_lindley(relief).loglik

    @pytest.mark.parametrize("seed", [3, 4])
    def test_nesting_chain_simulated(self, seed):
        x = elg_sample(ElgParams(3.0, 1.0, 0.6), 80, seed)
        lg = fit_lg(x)
        full = fit_elg(x, lg)
        assert full.loglik >= lg.loglik - 1e-8 >= fit_lindley(x).loglik - 2e-8
        assert 2 * (full.loglik - lg.loglik) >= -1e-8

    def test_std_errors(self, relief):
        se = fit_gamma(relief).std_errors()
        assert set(se) == {"shape", "rate"} and all(v > 0 for v in se.values())

    def test_unknown(self, relief):
        with pytest.raises(DomainError):
            fit_model("lognormal", relief)


class TestCompare:
    def test_relief_rows(self, relief_table):
        t = relief_table
        assert [r.name for r in t.rows] == ["elg", "gamma", "weibull", "lg"]
        assert t.best_by_aic == t.best_by_bic == t.best_by_aicc == "elg"
        elg = t.row("elg").criteria
        assert (elg.aic, elg.bic, elg.aicc) == pytest.approx((37.1056, 40.0928, 38.6056), abs=0.05)
        g = t.row("gamma").criteria
        assert (g.aic, g.bic, g.aicc) == pytest.approx((39.6372, 41.6287, 40.3431), abs=0.05)

    def test_identities_exact(self, relief_table):
        for r in relief_table.rows:
            c = r.criteria
            assert c.aic == pytest.approx(2 * c.k - 2 * c.loglik, abs=1e-12)
            assert c.bic == pytest.approx(c.k * math.log(c.n) - 2 * c.loglik, abs=1e-12)
            assert c.aicc == pytest.approx(c.aic + 2 * c.k * (c.k + 1) / (c.n - c.k - 1), abs=1e-12)
            assert r.score_norm <= 1e-8

    def test_gamma_simulation(self):
        x = np.random.default_rng(500).gamma(5.0, 0.5, 500)
        t = compare_models(x, models=("gamma", "weibull"))
        assert t.row("gamma").criteria.aic <= t.row("weibull").criteria.aic

    def test_error_row(self):
        t = compare_models([1.0, 2.0, 3.0, 4.0, 1e6], opts=FitOptions(max_iterations=40))
        errors = {r.name for r in t.rows if r.error}
        assert errors and errors != {r.name for r in t.rows}
        assert t.best_by_aic not in errors

    def test_all_rows_fail(self):
        t = compare_models([2.0] * 6)
        assert all(r.error for r in t.rows) and t.best_by_aic is None

    def test_json_roundtrip(self, relief_table):
        text = json.dumps(relief_table.to_dict())
        back = ModelComparison.from_dict(json.loads(text))
        assert back == relief_table
        assert isinstance(back.rows[0], ComparisonRow)
        assert isinstance(back.rows[0].criteria, InformationCriteria)
