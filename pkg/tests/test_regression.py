import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from epiphase.errors import DegenerateRegressorError, InsufficientDataError, InvalidArgumentError
from epiphase.regression import (
    betainc,
    f_upper_p,
    ols_fit,
    phase_fit_table,
    stars,
    t_two_sided_p,
)
from epiphase.series import DailySeries


class TestTails:
    @pytest.mark.parametrize("t,df,p", [(2.228, 10, 0.05), (2.571, 5, 0.05),
                                        (2.042, 30, 0.05), (3.169, 10, 0.01)])
    def test_table_values(self, t, df, p):
        assert t_two_sided_p(t, df) == pytest.approx(p, abs=5e-4)

    def test_against_scipy(self, rng):
        for _ in range(200):
            t, df = rng.normal(0, 4), int(rng.integers(1, 200))
            assert t_two_sided_p(t, df) == pytest.approx(2 * stats.t.sf(abs(t), df),
                                                          rel=1e-9, abs=1e-300)

    def test_f_against_scipy(self, rng):
        for _ in range(100):
            f, d2 = rng.exponential(4.0), int(rng.integers(1, 200))
            assert f_upper_p(f, 1, d2) == pytest.approx(stats.f.sf(f, 1, d2), rel=1e-9)

    def test_betainc_edges(self):
        assert betainc(2.0, 3.0, 0.0) == 0.0
        assert betainc(2.0, 3.0, 1.0) == 1.0
        assert betainc(1.0, 1.0, 0.3) == pytest.approx(0.3, abs=1e-14)
        with pytest.raises(InvalidArgumentError):
            betainc(0.0, 1.0, 0.5)

    def test_special_values(self):
        assert t_two_sided_p(0.0, 5) == pytest.approx(1.0)
        assert t_two_sided_p(math.inf, 5) == 0.0
        assert math.isnan(t_two_sided_p(math.nan, 5))


class TestOls:
    def test_exact_line(self):
        x = np.arange(10.0)
        fit = ols_fit(x, 1.0 + 2.0 * x)
        assert fit.exact_fit
        assert fit.beta0 == pytest.approx(1.0) and fit.beta1 == pytest.approx(2.0)
        assert fit.r2 == 1.0 and fit.se1 == 0.0 and fit.sig_f == 0.0

    def test_hand_example(self):
        # xbar 1.5, ybar 2.75, Sxx 5, Sxy 5.5
        fit = ols_fit([0, 1, 2, 3], [1, 3, 2, 5])
        assert fit.beta1 == pytest.approx(1.1)
        assert fit.beta0 == pytest.approx(1.1)
        # residuals -0.1, 0.8, -1.3, 0.6 give SSR 2.7 over SST 8.75
        assert fit.r2 == pytest.approx(1 - 2.7 / 8.75)
        assert fit.se1 == pytest.approx(math.sqrt(1.35 / 5))
        assert fit.adj_r2 == pytest.approx(1 - (2.7 / 8.75) * 3 / 2)

    def test_against_linregress(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 60))
            x = rng.normal(0, 10, n)
            y = 0.3 - 0.02 * x + rng.normal(0, 1, n)
            fit, ref = ols_fit(x, y), stats.linregress(x, y)
            assert fit.beta1 == pytest.approx(ref.slope, rel=1e-9, abs=1e-12)
            assert fit.beta0 == pytest.approx(ref.intercept, rel=1e-9, abs=1e-12)
            assert fit.se1 == pytest.approx(ref.stderr, rel=1e-9)
            assert fit.se0 == pytest.approx(ref.intercept_stderr, rel=1e-9)
            assert fit.p1 == pytest.approx(ref.pvalue, rel=1e-7, abs=1e-14)
            assert fit.r2 == pytest.approx(ref.rvalue ** 2, rel=1e-9, abs=1e-12)

    def test_f_is_t_squared(self, rng):
        for _ in range(50):
            x = rng.normal(size=20)
            fit = ols_fit(x, x + rng.normal(size=20))
            assert fit.f_stat == pytest.approx(fit.t1 ** 2, rel=1e-6)
            assert fit.sig_f == pytest.approx(fit.p1, rel=1e-9)

    def test_residuals_orthogonal(self, rng):
        x, y = rng.normal(size=30), rng.normal(size=30)
        fit = ols_fit(x, y)
        resid = y - fit.beta0 - fit.beta1 * x
        assert abs(resid.sum()) < 1e-12
        assert abs(resid @ x) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-100, 100), st.floats(0.1, 100))
    def test_affine_invariance(self, seed, shift, scale):
        r = np.random.default_rng(seed)
        x, y = r.normal(size=15), r.normal(size=15)
        base = ols_fit(x, y)
        moved = ols_fit(x * scale + shift, y)
        assert moved.beta1 == pytest.approx(base.beta1 / scale, rel=1e-7)
        assert moved.t1 == pytest.approx(base.t1, rel=1e-7)
        assert moved.r2 == pytest.approx(base.r2, rel=1e-7, abs=1e-12)

    def test_constant_regressor(self):
        with pytest.raises(DegenerateRegressorError):
            ols_fit([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_few(self):
        with pytest.raises(InsufficientDataError):
            ols_fit([1.0, 2.0], [1.0, 2.0])

    def test_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            ols_fit([1.0, 2.0, math.nan], [1.0, 2.0, 3.0])

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            ols_fit([1.0, 2.0, 3.0], [1.0, 2.0])


class TestStars:
    @pytest.mark.parametrize("p,s", [(0.0005, "***"), (0.005, "**"), (0.03, "*"),
                                     (0.05, ""), (math.nan, "")])
    def test_levels(self, p, s):
        assert stars(p) == s


class _Phase:
    def __init__(self, name, start, end):
        self.name, self.start_day, self.end_day = name, start, end


class _Timeline:
    def __init__(self, phases):
        self.phases = phases


class TestPhaseFitTable:
    def test_rows_and_notes(self, rng):
        cases = DailySeries.from_values(np.arange(1.0, 31.0))
        red = DailySeries.from_values(0.1 + 0.01 * np.arange(30) + rng.normal(0, 0.01, 30))
        flat = DailySeries.from_values(np.r_[np.full(20, 5.0), np.arange(10.0)])
        tl = _Timeline([_Phase("a", 1, 20), _Phase("b", 21, 22)])
        table = phase_fit_table({"subway": red}, cases, tl)
        assert table.get("a", "subway").fit.beta1 == pytest.approx(0.01, abs=0.005)
        assert table.get("b", "subway").note == "insufficient-data"
        degen = phase_fit_table({"subway": red}, flat, _Timeline([_Phase("a", 1, 20)]))
        assert degen.get("a", "subway").note == "degenerate-regressor"
        with pytest.raises(KeyError):
            table.get("a", "traffic")

    def test_lag_shifts_regressor(self):
        cases = DailySeries.from_values(np.arange(1.0, 31.0) ** 1.5)
        red = DailySeries.from_values(np.arange(1.0, 31.0) ** 1.5, start_day=1)
        shifted = DailySeries(np.arange(3, 33), red.values)
        fit = phase_fit_table({"m": shifted}, cases, _Timeline([_Phase("a", 5, 30)]), lag=2)
        assert fit.get("a", "m").fit.exact_fit
