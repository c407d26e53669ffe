"""Moments and the moment generating function of the ELG distribution.

E(X^n) is a weighted sum of exponentiated-Lindley moments, each expressed
through the triple sum K(a, b, c, delta). The mixture series converges only
when |p / (1 - p)| < 1; outside that range the moment is computed by
quadrature instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import gammaln, gammasgn

from .distributions import ElgParams, elg_logpdf
from .special import (
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    integrate_semi_infinite,
    sum_series,
)

__all__ = ["MomentResult", "k_function", "elg_moment", "elg_mgf", "summary_stats",
           "series_applicable"]

SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 500
_GATE_MARGIN = 1e-9

# partial-sum checkpoints for tail extrapolation of the K series
_CHECKPOINTS = (64, 128, 256, 512, 1024)
_COMPONENT_TOL = 1e-13
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class MomentResult:
    value: float
    terms_used: int
    converged: bool
    method: Literal["series", "quadrature"]

    def __post_init__(self):
        if self.method == "series" and self.converged and self.terms_used < 1:
            raise ValueError("a converged series result must use at least one term")


def _signed_binom_logs(a1: float, i: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(sign, log|.|) of (-1)^i * C(a1, i) for real a1, vectorized over i."""
    i = np.asarray(i, dtype=float)
    sign = gammasgn(a1 + 1.0) * gammasgn(a1 - i + 1.0) * np.where(i % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = gammaln(a1 + 1.0) - gammaln(i + 1.0) - gammaln(a1 - i + 1.0)
    if float(a1).is_integer() and a1 >= 0:
        dead = i > a1
        sign = np.where(dead, 0.0, sign)
        mag = np.where(dead, -np.inf, mag)
    return sign, mag


def _k_terms(a: float, b: float, c: int, delta: float, n_terms: int) -> np.ndarray:
    """Terms i = 0 .. n_terms-1 of the outer K series.

    For fixed i the double sum over j and k,
        sum_j C(i,j) b^j sum_k C(j+1,k) (c+k)! / s^(c+k+1),  s = b i + delta,
    divided by (1+b)^i, is regrouped by powers of x using
        (1+x) (1+b(1+x))^i / (1+b)^i = (1+x) sum_m C(i,m) (b/(1+b))^m x^m,
    which needs O(i) positive terms instead of O(i^2).
    """
    i = np.arange(n_terms, dtype=float)
    sign, log_coef = _signed_binom_logs(a - 1.0, i)
    lf = gammaln(np.arange(n_terms + c + 3, dtype=float))  # log factorials shifted by one
    ii = np.arange(n_terms)[:, None]
    m = np.arange(n_terms)[None, :]
    live = m <= ii
    diff = np.where(live, ii - m, 0)
    log_s = np.log(b * np.arange(n_terms, dtype=float) + delta)[:, None]
    log_c = lf[ii + 1] - lf[m + 1] - lf[diff + 1] + m * math.log(b / (1.0 + b))
    # (c+m)!/s^(c+m+1) + (c+m+1)!/s^(c+m+2) = (c+m)!/s^(c+m+1) * (1 + (c+m+1)/s)
    log_t = (log_c + lf[c + m + 1] - (c + m + 1) * log_s
             + np.log1p((c + m + 1) / np.exp(log_s)))
    log_t = np.where(live, log_t, -np.inf)
    top = log_t.max(axis=1, keepdims=True)
    log_inner = np.log(np.exp(log_t - top).sum(axis=1)) + top[:, 0]
    with np.errstate(invalid="ignore"):
        out = sign * np.exp(log_coef + log_inner)
    return np.where(sign == 0.0, 0.0, out)


def _k_triple_sum_term(a: float, b: float, c: int, delta: float, i: int) -> float:
    """The i-th outer term summed literally over j and k. Slow; used as a check."""
    sign, log_coef = _signed_binom_logs(a - 1.0, np.array([i]))
    if sign[0] == 0.0:
        return 0.0
    s = b * i + delta
    acc = 0.0
    for j in range(i + 1):
        for k in range(j + 2):
            acc += (math.comb(i, j) * b ** j * math.comb(j + 1, k)
                    * math.exp(gammaln(c + k + 1.0) - (c + k + 1.0) * math.log(s)))
    return float(sign[0]) * math.exp(log_coef[0]) * acc / (1.0 + b) ** i


def _extrapolate_tail(terms: np.ndarray, sigma: float) -> float:
    """Limit of partial sums whose terms decay like i^-sigma.

    The partial sums behave as S + N^(1-sigma) (h0 + h1/N + h2/N^2 + ...),
    so S is solved for jointly with the leading h coefficients at
    geometrically spaced checkpoints.
    """
    partial = np.cumsum(terms)
    n_last = len(terms)
    # the tail beyond N is at most about N |t_N| / (sigma - 1)
    if abs(terms[-1]) * n_last / (sigma - 1.0) <= _EPS * max(abs(partial[-1]), 1e-300):
        return float(partial[-1])
    ns = np.array(_CHECKPOINTS, dtype=float)
    cols = np.column_stack([np.ones_like(ns)] + [(ns / ns[-1]) ** (1.0 - sigma - m)
                                                 for m in range(len(ns) - 1)])
    cols /= np.abs(cols).max(axis=0)
    coef, *_ = np.linalg.lstsq(cols, partial[np.array(_CHECKPOINTS) - 1], rcond=None)
    return float(coef[0])


@dataclass(frozen=True)
class _KValue:
    value: float
    terms: int
    abs_sum: float  # sum of |term|, for a cancellation error bound


def _k_eval(a, b, c, delta, abs_tol=SERIES_TOL, max_terms=SERIES_MAX_TERMS) -> _KValue:
    if not (a > 0 and b > 0 and delta > 0):
        raise DomainError("k_function requires a > 0, b > 0, delta > 0")
    if int(c) != c or c < 0:
        raise DomainError("c must be a nonnegative integer")
    c = int(c)
    if float(a).is_integer():
        terms = _k_terms(a, b, c, delta, int(a))
        return _KValue(math.fsum(terms), len(terms), float(np.abs(terms).sum()))
    sigma = a + c + 1.0
    # the binomial factors only start to shrink once i passes a
    n = min(max(64, 2 * math.ceil(a) + 16), max_terms)
    while True:
        terms = _k_terms(a, b, c, delta, n)
        try:
            res = sum_series(lambda i: terms[i], abs_tol, n)
            return _KValue(res.value, res.terms, float(np.abs(terms[:res.terms]).sum()))
        except ConvergenceError:
            pass
        # terms decay like i^-sigma; skip the long pass if it cannot reach abs_tol
        projected = abs(terms[-1]) * ((n - 1) / (max_terms - 1)) ** sigma
        if n >= max_terms or projected > 0.1 * abs_tol:
            break
        n = max_terms
    terms = _k_terms(a, b, c, delta, _CHECKPOINTS[-1])
    return _KValue(_extrapolate_tail(terms, sigma), len(terms), float(np.abs(terms).sum()))


def k_function(a: float, b: float, c: int, delta: float, *,
               abs_tol: float = SERIES_TOL, max_terms: int = SERIES_MAX_TERMS) -> float:
    """K(a, b, c, delta) with the inner integrals in closed form.

    The outer series terminates when a is a positive integer. Otherwise it is
    summed until three consecutive terms fall below ``abs_tol``; when its
    polynomial decay is too slow for that within ``max_terms`` the tail is
    extrapolated.
    """
    return _k_eval(a, b, c, delta, abs_tol, max_terms).value


def series_applicable(params: ElgParams) -> bool:
    """True when the mixture expansion in powers of p/(1-p) converges."""
    return abs(params.p / (1.0 - params.p)) < 1.0 - _GATE_MARGIN


def _mixture_series(params: ElgParams, c: int, delta: float, log_weight) -> tuple[float, int]:
    """Sum over k of (-p/(1-p))^k times the k-th exponentiated-Lindley component.

    For large integer shapes the binomial expansion inside K cancels
    catastrophically; any component whose rounding error bound would exceed
    _COMPONENT_TOL is integrated numerically instead.
    """
    a, t, p = params.alpha, params.theta, params.p
    ratio = -p / (1.0 - p)
    lead = t * t / (1.0 + t)

    def term(k: int) -> float:
        if ratio == 0.0 and k > 0:
            return 0.0
        beta = a * (k + 1)
        w = ratio ** k / (1.0 - p)
        kv = _k_eval(beta, t, c, delta)
        if abs(w) * beta * lead * kv.abs_sum * 8 * _EPS <= _COMPONENT_TOL:
            return w * beta * lead * kv.value
        return w * _quadrature(ElgParams(beta, t, 0.0), log_weight)

    res = sum_series(term, SERIES_TOL, SERIES_MAX_TERMS)
    return res.value, res.terms


def _quadrature(params: ElgParams, log_weight) -> float:
    spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-11, max_subdivisions=2000)
    return integrate_semi_infinite(
        lambda x: np.exp(log_weight(x) + elg_logpdf(params, x)), spec)


def elg_moment(params: ElgParams, n: int,
               method: Literal["auto", "series", "quadrature"] = "auto") -> MomentResult:
    """Raw moment E(X^n). ``n = 0`` is accepted as a normalization check."""
    if int(n) != n or n < 0:
        raise DomainError("moment order must be a nonnegative integer")
    n = int(n)
    use_series = method == "series" or (method == "auto" and series_applicable(params))
    if use_series:
        if not series_applicable(params):
            raise DomainError("series path requires |p/(1-p)| < 1")
        value, terms = _mixture_series(params, n, params.theta, lambda x: n * np.log(x))
        return MomentResult(value, terms, True, "series")
    value = _quadrature(params, lambda x: n * np.log(x))
    return MomentResult(value, 0, True, "quadrature")


def elg_mgf(params: ElgParams, t: float,
            method: Literal["auto", "series", "quadrature"] = "auto") -> MomentResult:
    """E(exp(tX)) for t < theta."""
    if not t < params.theta:
        raise DomainError("the moment generating function needs t < theta")
    if t == 0.0:
        return MomentResult(1.0, 1, True, "series" if method != "quadrature" else "quadrature")
    use_series = method == "series" or (method == "auto" and series_applicable(params))
    if use_series:
        if not series_applicable(params):
            raise DomainError("series path requires |p/(1-p)| < 1")
        value, terms = _mixture_series(params, 0, params.theta - t, lambda x: t * x)
        return MomentResult(value, terms, True, "series")
    value = _quadrature(params, lambda x: t * x)
    return MomentResult(value, 0, True, "quadrature")


def summary_stats(params: ElgParams) -> dict[str, float]:
    """Mean, variance, skewness and (non-excess) kurtosis from raw moments 1..4."""
    m1, m2, m3, m4 = (elg_moment(params, k).value for k in (1, 2, 3, 4))
    var = m2 - m1 * m1
    if not var > 0:
        raise ConvergenceError("moment evaluation gave a nonpositive variance")
    mu3 = m3 - 3 * m1 * m2 + 2 * m1 ** 3
    mu4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 ** 4
    return {
        "mean": m1,
        "variance": var,
        "skewness": mu3 / var ** 1.5,
        "kurtosis": mu4 / var ** 2,
    }
