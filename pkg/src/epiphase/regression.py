"""Bivariate OLS with classical inference, fitted per epidemic phase.

Response: mobility reduction. Regressor: smoothed daily case count.
Tail probabilities come from the regularized incomplete beta function,
evaluated by its continued-fraction expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRegressorError, InsufficientDataError, InvalidArgumentError
from .series import DailySeries

_CF_TOL = 1e-12
_CF_MAX_ITER = 10_000
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = _TINY if abs(d) < _TINY else d
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise InvalidArgumentError("betainc needs a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """``P(|T| >= |t|)`` for Student's t with ``df`` degrees of freedom."""
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def f_upper_p(f: float, d1: float, d2: float) -> float:
    """``P(F >= f)`` for the F distribution with (d1, d2) degrees of freedom."""
    if math.isnan(f):
        return math.nan
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


def stars(p: float) -> str:
    if math.isnan(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class OlsFit:
    beta0: float
    beta1: float
    se0: float
    se1: float
    t0: float
    t1: float
    p0: float
    p1: float
    r2: float
    adj_r2: float
    f_stat: float
    sig_f: float
    n: int
    exact_fit: bool = False

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def ols_fit(x, y) -> OlsFit:
    """Fit ``y = beta0 + beta1 x + e`` by least squares.

    When the residual sum of squares vanishes the fit is flagged exact and
    standard errors and p-values are reported as 0 (t and F as +/-inf).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidArgumentError("x and y must be 1-D and equally long")
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 observations, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidArgumentError("x and y must be finite")

    xbar, ybar = x.mean(), y.mean()
    dx, dy = x - xbar, y - ybar
    sxx = float(dx @ dx)
    if sxx <= 0.0 or np.ptp(x) == 0.0:
        raise DegenerateRegressorError("regressor is constant")
    beta1 = float(dx @ dy) / sxx
    beta0 = float(ybar - beta1 * xbar)
    resid = y - (beta0 + beta1 * x)
    ssr = float(resid @ resid)
    sst = float(dy @ dy)
    df = n - 2

    scale = max(float(np.max(np.abs(y))), float(np.max(np.abs(beta0 + beta1 * x))), 1e-300)
    exact = ssr <= n * (64 * np.finfo(float).eps * scale) ** 2
    if exact:
        def sign(v):
            return math.copysign(math.inf, v) if v != 0 else math.nan

        return OlsFit(beta0, beta1, 0.0, 0.0, sign(beta0), sign(beta1), 0.0, 0.0,
                      1.0, 1.0, math.inf, 0.0, n, exact_fit=True)

    s2 = ssr / df
    se1 = math.sqrt(s2 / sxx)
    se0 = math.sqrt(s2 * (1.0 / n + xbar * xbar / sxx))
    t0, t1 = beta0 / se0, beta1 / se1
    r2 = 1.0 - ssr / sst if sst > 0 else 0.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df
    f_stat = beta1 * beta1 * sxx / s2
    return OlsFit(
        beta0, beta1, se0, se1, t0, t1,
        t_two_sided_p(t0, df), t_two_sided_p(t1, df),
        r2, adj_r2, f_stat, f_upper_p(f_stat, 1, df), n,
    )


@dataclass
class PhaseFitRow:
    phase: str
    mode: str
    start_day: int
    end_day: int
    fit: OlsFit | None
    n_usable: int
    note: str = ""


@dataclass
class PhaseFitTable:
    rows: list = field(default_factory=list)

    def get(self, phase: str, mode: str) -> PhaseFitRow:
        for row in self.rows:
            if row.phase == phase and row.mode == mode:
                return row
        raise KeyError((phase, mode))


def phase_fit_table(reduction_by_mode: dict, cases_sma: DailySeries, timeline,
                    lag: int = 0) -> PhaseFitTable:
    """One OLS fit per (phase, mode) on the days of the phase.

    ``lag`` pairs the reduction on day d with the case count on day d - lag.
    Phases with fewer than 3 days where both series are present get a row
    with ``fit=None`` and an ``insufficient-data`` note.
    """
    table = PhaseFitTable()
    for phase in timeline.phases:
        days = np.arange(phase.start_day, phase.end_day + 1)
        for mode in sorted(reduction_by_mode):
            y = reduction_by_mode[mode].reindex(days).values
            x = cases_sma.reindex(days - lag).values
            ok = ~(np.isnan(x) | np.isnan(y))
            row = PhaseFitRow(phase.name, mode, phase.start_day, phase.end_day,
                              None, int(ok.sum()))
            try:
                row.fit = ols_fit(x[ok], y[ok])
            except InsufficientDataError:
                row.note = "insufficient-data"
            except DegenerateRegressorError:
                row.note = "degenerate-regressor"
            table.rows.append(row)
    return table
