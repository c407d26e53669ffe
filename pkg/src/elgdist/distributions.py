"""Exponentiated Lindley geometric (ELG) distribution and its comparators.

All evaluation functions accept a scalar or an array for ``x``/``u`` and
return a float or an ndarray to match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import DomainError, lambert_w_minus1, log_gamma

__all__ = [
    "ElgParams", "LindleyParams", "LgParams", "GammaParams", "WeibullParams",
    "MASK64", "splitmix64", "uniforms",
    "lindley_cdf", "lindley_pdf", "lindley_survival",
    "elg_cdf", "elg_pdf", "elg_logpdf", "elg_survival", "elg_hazard",
    "elg_quantile", "elg_isf", "elg_sample", "quartiles",
    "lg_pdf", "gamma_pdf", "gamma_logpdf", "weibull_pdf", "weibull_logpdf",
    "norming_constants", "minima_scale", "block_minima", "block_maxima",
    "gumbel_cdf", "minima_limit_cdf",
]

_HUGE = np.finfo(float).max


@dataclass(frozen=True)
class ElgParams:
    """Shape ``alpha``, rate-like ``theta`` and compounding parameter ``p``.

    Any p < 1 gives a proper density; the geometric-compounding reading needs
    0 < p < 1, which the EM fitter enforces on its own.
    """
    alpha: float
    theta: float
    p: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not (self.p < 1 and math.isfinite(self.p)):
            raise DomainError(f"p must be < 1, got {self.p}")

    def as_dict(self) -> dict[str, float]:
        return {"alpha": self.alpha, "theta": self.theta, "p": self.p}


@dataclass(frozen=True)
class LindleyParams:
    theta: float

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise DomainError(f"theta must be positive, got {self.theta}")

    def as_dict(self) -> dict[str, float]:
        return {"theta": self.theta}


@dataclass(frozen=True)
class LgParams:
    theta: float
    p: float

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not (self.p < 1 and math.isfinite(self.p)):
            raise DomainError(f"p must be < 1, got {self.p}")

    def as_elg(self) -> ElgParams:
        return ElgParams(1.0, self.theta, self.p)

    def as_dict(self) -> dict[str, float]:
        return {"theta": self.theta, "p": self.p}


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError("gamma shape and rate must be positive")

    def as_dict(self) -> dict[str, float]:
        return {"shape": self.shape, "rate": self.rate}


@dataclass(frozen=True)
class WeibullParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("weibull shape and scale must be positive")

    def as_dict(self) -> dict[str, float]:
        return {"shape": self.shape, "scale": self.scale}


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _prep(x, *, strict: bool, name: str = "x"):
    arr = np.asarray(x, dtype=float)
    bad = ~(arr > 0) if strict else ~(arr >= 0)
    if np.any(bad):
        bound = "> 0" if strict else ">= 0"
        raise DomainError(f"{name} must be {bound}")
    return arr


def _out(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _lindley_parts(theta: float, x: np.ndarray):
    """(G, 1 - G, log G) for the Lindley cdf G, each without cancellation."""
    e = np.exp(-theta * x)
    gbar = (1.0 + theta * x / (theta + 1.0)) * e
    g = -np.expm1(-theta * x) - theta * x / (theta + 1.0) * e
    g = np.where(gbar > 0.5, g, 1.0 - gbar)
    with np.errstate(divide="ignore"):
        log_g = np.where(gbar > 0.5, np.log(g), np.log1p(-gbar))
    return g, gbar, log_g


def _elg_parts(params: ElgParams, x: np.ndarray):
    """log G, G^alpha and 1 - G^alpha, and the denominator 1 - p (1 - G^alpha)."""
    _, _, log_g = _lindley_parts(params.theta, x)
    a_log = params.alpha * log_g
    g_a = np.exp(a_log)
    s_a = -np.expm1(a_log)
    denom = 1.0 - params.p * s_a
    return log_g, g_a, s_a, denom


# ---------------------------------------------------------------------------
# Lindley
# ---------------------------------------------------------------------------

def lindley_cdf(params: LindleyParams, x):
    xx = _prep(x, strict=False)
    g, _, _ = _lindley_parts(params.theta, xx)
    return _out(g)


def lindley_survival(params: LindleyParams, x):
    xx = _prep(x, strict=False)
    _, gbar, _ = _lindley_parts(params.theta, xx)
    return _out(gbar)


def lindley_pdf(params: LindleyParams, x):
    xx = _prep(x, strict=True)
    t = params.theta
    return _out(t * t / (t + 1.0) * (1.0 + xx) * np.exp(-t * xx))


# ---------------------------------------------------------------------------
# ELG
# ---------------------------------------------------------------------------

def elg_cdf(params: ElgParams, x):
    xx = _prep(x, strict=False)
    _, g_a, _, _ = _elg_parts(params, xx)
    # written as a chain of monotone operations so rounding cannot break monotonicity
    with np.errstate(divide="ignore"):
        return _out(1.0 / ((1.0 - params.p) / g_a + params.p))


def elg_survival(params: ElgParams, x):
    xx = _prep(x, strict=False)
    _, _, s_a, _ = _elg_parts(params, xx)
    with np.errstate(divide="ignore"):
        return _out((1.0 - params.p) / (1.0 / s_a - params.p))


def elg_logpdf(params: ElgParams, x):
    xx = _prep(x, strict=True)
    a, t, p = params.alpha, params.theta, params.p
    log_g, _, _, denom = _elg_parts(params, xx)
    with np.errstate(invalid="ignore"):
        shape_term = np.where(a == 1.0, 0.0, (a - 1.0) * log_g)
    return _out(math.log(a) + 2.0 * math.log(t) + math.log1p(-p) - math.log1p(t)
                + np.log1p(xx) - t * xx + shape_term - 2.0 * np.log(denom))


def elg_pdf(params: ElgParams, x):
    """ELG density. For alpha < 1 the density diverges at 0; values that would
    overflow saturate at the largest finite float."""
    with np.errstate(over="ignore"):
        val = np.exp(np.asarray(elg_logpdf(params, x)))
    return _out(np.minimum(val, _HUGE))


def _log_s_alpha(params: ElgParams, x: np.ndarray, log_g: np.ndarray, s_a: np.ndarray):
    """log(1 - G^alpha), switching to log(alpha) + log(1 - G) deep in the
    upper tail where 1 - G^alpha underflows."""
    t = params.theta
    log_gbar = np.log1p(t * x / (t + 1.0)) - t * x
    with np.errstate(divide="ignore"):
        direct = np.log(s_a)
    # 1 - G^alpha = alpha (1 - G) (1 + O(1 - G)) as G -> 1
    return np.where(log_gbar < -40.0, math.log(params.alpha) + log_gbar, direct)


def elg_hazard(params: ElgParams, x):
    xx = _prep(x, strict=True)
    a, t, p = params.alpha, params.theta, params.p
    log_g, _, s_a, denom = _elg_parts(params, xx)
    log_s = _log_s_alpha(params, xx, log_g, s_a)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        shape_term = np.where(a == 1.0, 0.0, (a - 1.0) * log_g)
        log_h = (math.log(a) + 2.0 * math.log(t) - math.log1p(t) + np.log1p(xx) - t * xx
                 + shape_term - log_s - np.log(denom))
        val = np.exp(log_h)
    return _out(np.minimum(val, _HUGE))


def _w_argument_scale(theta: float) -> float:
    return (theta + 1.0) * math.exp(-(theta + 1.0))


_SMALL_G = 1e-3


def _quantile_from_gbar(theta: float, one_minus_v: np.ndarray,
                        log_v: np.ndarray | None = None) -> np.ndarray:
    """Invert the Lindley cdf, G(x) = v, through W_{-1} given 1 - v.

    The closed form loses relative accuracy as v -> 0 (x is the difference of
    two nearly equal numbers), so when ``log_v`` is supplied, entries with
    v < 1e-3 are recomputed by Newton's method on log G(log x).
    """
    arg = -_w_argument_scale(theta) * one_minus_v
    arg = np.clip(arg, -INV_E_GUARD, -1e-300)
    w = lambert_w_minus1(arg)
    x = np.asarray(-1.0 - 1.0 / theta - w / theta, dtype=float)
    if log_v is None:
        return x
    log_v = np.broadcast_to(np.asarray(log_v, dtype=float), x.shape)
    small = log_v < math.log(_SMALL_G)
    if np.any(small):
        x = x.copy()
        x[small] = _invert_small_g(theta, log_v[small])
    return x


def _invert_small_g(theta: float, log_v: np.ndarray) -> np.ndarray:
    # G(x) = theta^2 x / (theta + 1) (1 + O(x)) starts Newton close to the root
    t = theta
    log_x = log_v + math.log1p(t) - 2.0 * math.log(t)
    # below e^-600 the leading term is already exact in double precision
    live = log_x > -600.0
    for _ in range(50):
        if not live.any():
            break
        lx, lv = log_x[live], log_v[live]
        x = np.exp(lx)
        _, _, log_g = _lindley_parts(t, x)
        log_pdf = 2.0 * math.log(t) - math.log1p(t) + np.log1p(x) - t * x
        slope = np.exp(lx + log_pdf - log_g)  # d log G / d log x
        step = (log_g - lv) / slope
        log_x[live] = lx - step
        idx = np.flatnonzero(live)
        live[idx[np.abs(step) <= 4 * np.finfo(float).eps]] = False
    return np.exp(log_x)


INV_E_GUARD = math.exp(-1.0) - 1e-15


def _check_u(u, name="u"):
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError(f"{name} must lie in (0, 1)")
    return arr


def elg_quantile(params: ElgParams, u):
    """Inverse cdf via the Lambert W_{-1} closed form."""
    uu = _check_u(u)
    a, p = params.alpha, params.p
    s = 1.0 - uu
    # log of G^alpha = u (1 - p) / (1 - p u), split to avoid cancellation at either end
    lo = uu <= 0.5
    with np.errstate(divide="ignore"):
        log_ga = np.where(
            lo,
            np.log(uu) + math.log1p(-p) - np.log1p(-p * uu),
            np.log1p(-s / (1.0 - p * uu)),
        )
    one_minus_v = -np.expm1(log_ga / a)
    return _out(_quantile_from_gbar(params.theta, one_minus_v, log_ga / a))


def elg_isf(params: ElgParams, s):
    """Inverse survival function: x with S(x) = s. Accurate deep in the upper tail."""
    ss = _check_u(s, "s")
    a, p = params.alpha, params.p
    log_ga = np.log1p(-ss / (1.0 - p + p * ss))
    one_minus_v = -np.expm1(log_ga / a)
    return _out(_quantile_from_gbar(params.theta, one_minus_v, log_ga / a))


def quartiles(params: ElgParams) -> tuple[float, float, float]:
    """Q1, Q2, Q3 from the explicit quartile expressions."""
    a, t, p = params.alpha, params.theta, params.p
    out = []
    for num, den in ((1 - p, 4 - p), (1 - p, 2 - p), (3 - 3 * p, 4 - 3 * p)):
        v = (num / den) ** (1.0 / a)
        out.append(float(_quantile_from_gbar(t, np.asarray(1.0 - v), np.log(v))))
    return tuple(out)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of SplitMix64 started from state ``seed``.

    State update: state += 0x9E3779B97F4A7C15 (mod 2^64). Output:
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
    z *= 0x94D049BB133111EB; z ^= z >> 31.
    Because the state after k steps is seed + k * increment, the sequence is
    computed in one vectorized pass.
    """
    if not (0 <= int(seed) <= MASK64):
        raise DomainError("seed must be a 64-bit unsigned integer")
    k = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(int(seed)) + k * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return z


def uniforms(seed: int, n: int) -> np.ndarray:
    """Uniforms in the open interval (0, 1): top 53 bits of each draw, offset
    by half a unit so neither endpoint occurs."""
    bits = splitmix64(seed, n) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0 ** -53


def elg_sample(params: ElgParams, n: int, seed: int) -> np.ndarray:
    """``n`` ELG variates by inverse transform of seeded SplitMix64 uniforms."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    u = uniforms(seed, int(n))
    return np.atleast_1d(elg_quantile(params, u))


# ---------------------------------------------------------------------------
# Comparator densities
# ---------------------------------------------------------------------------

def lg_pdf(params: LgParams, x):
    xx = _prep(x, strict=True)
    t, p = params.theta, params.p
    e = np.exp(-t * xx)
    body = t * t / (t + 1.0) * (1.0 - p) * (1.0 + xx) * e
    return _out(body / (1.0 - p * (t + 1.0 + t * xx) / (t + 1.0) * e) ** 2)


def gamma_logpdf(params: GammaParams, x):
    xx = _prep(x, strict=True)
    k, r = params.shape, params.rate
    return _out(k * math.log(r) - log_gamma(k) + (k - 1.0) * np.log(xx) - r * xx)


def gamma_pdf(params: GammaParams, x):
    return _out(np.exp(np.asarray(gamma_logpdf(params, x))))


def weibull_logpdf(params: WeibullParams, x):
    xx = _prep(x, strict=True)
    k, lam = params.shape, params.scale
    y = np.log(xx / lam)
    return _out(math.log(k / lam) + (k - 1.0) * y - np.exp(k * y))


def weibull_pdf(params: WeibullParams, x):
    return _out(np.exp(np.asarray(weibull_logpdf(params, x))))


# ---------------------------------------------------------------------------
# Extreme values
# ---------------------------------------------------------------------------

def norming_constants(params: ElgParams, n: int) -> tuple[float, float]:
    """(a_n, b_n) = (theta, F^{-1}(1 - 1/n)) for the Gumbel-type sample extreme."""
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    return params.theta, float(elg_quantile(params, 1.0 - 1.0 / n))


def minima_scale(params: ElgParams, n: int) -> float:
    """c_n = F^{-1}(1/n); X_(1) / c_n converges to the law 1 - exp(-x^alpha)."""
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    return float(elg_quantile(params, 1.0 / n))


def block_minima(params: ElgParams, n: int, reps: int, seed: int) -> np.ndarray:
    """``reps`` exact draws of the minimum of ``n`` ELG variates.

    Uses X_(1) = F^{-1}(1 - (1 - U)^(1/n)), so no block is simulated in full.
    """
    u = uniforms(seed, reps)
    return np.atleast_1d(elg_quantile(params, -np.expm1(np.log1p(-u) / n)))


def block_maxima(params: ElgParams, n: int, reps: int, seed: int) -> np.ndarray:
    """``reps`` exact draws of the maximum of ``n`` ELG variates,
    X_(n) = S^{-1}(1 - U^(1/n))."""
    u = uniforms(seed, reps)
    return np.atleast_1d(elg_isf(params, -np.expm1(np.log(u) / n)))


def gumbel_cdf(x):
    return _out(np.exp(-np.exp(-np.asarray(x, dtype=float))))


def minima_limit_cdf(x, alpha: float):
    xx = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _out(-np.expm1(-xx ** alpha))
