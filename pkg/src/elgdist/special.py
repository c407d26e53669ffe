"""Numerical primitives: Lambert W (lower branch), log-gamma, the regularized
lower incomplete gamma function, semi-infinite adaptive quadrature and a
guarded series summer.

Everything here is a pure function; nothing keeps state between calls.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special as _sp

__all__ = [
    "DomainError",
    "ConvergenceError",
    "QuadratureSpec",
    "SeriesSum",
    "lambert_w_minus1",
    "log_gamma",
    "regularized_gamma_lower",
    "integrate_semi_infinite",
    "sum_series",
]

INV_E = math.exp(-1.0)


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(RuntimeError):
    """An iterative procedure exhausted its budget before meeting tolerance."""


# ---------------------------------------------------------------------------
# Lambert W, lower real branch
# ---------------------------------------------------------------------------

# Series of W_{-1} about the branch point in powers of
# s = -sqrt(2 (1 + e z)); coefficients from Corless et al. (1996).
_BRANCH_SERIES = (-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0,
                  769.0 / 17280.0, -221.0 / 8505.0)


def _w_initial(z: np.ndarray) -> np.ndarray:
    w = np.empty_like(z)
    near = z < -0.25
    if near.any():
        s = -np.sqrt(2.0 * np.maximum(1.0 + math.e * z[near], 0.0))
        acc = np.zeros_like(s)
        for c in reversed(_BRANCH_SERIES):
            acc = acc * s + c
        w[near] = acc
    far = ~near
    if far.any():
        lz = np.log(-z[far])
        w[far] = lz - np.log(-lz)
    return w


def lambert_w_minus1(z):
    """Lower real branch W_{-1} of the inverse of w -> w e^w.

    Defined on [-1/e, 0) with values in (-inf, -1]. Accepts a scalar or an
    array; the starting value comes from the branch-point series when
    z < -0.25 and from ln(-z) - ln(-ln(-z)) otherwise, refined by Halley's
    method.
    """
    arr = np.asarray(z, dtype=float)
    scalar = arr.ndim == 0
    zz = np.atleast_1d(arr).astype(float, copy=True)
    if np.any(np.isnan(zz)) or np.any(zz < -INV_E) or np.any(zz >= 0.0):
        raise DomainError("lambert_w_minus1 requires -1/e <= z < 0")

    w = _w_initial(zz)
    at_branch = zz == -INV_E
    w[at_branch] = -1.0
    active = ~at_branch
    for _ in range(64):
        if not active.any():
            break
        wa = w[active]
        za = zz[active]
        ew = np.exp(wa)
        f = wa * ew - za
        wp1 = wa + 1.0
        # at wp1 == 0 the step is undefined; such points already sit on the branch
        safe = np.where(wp1 == 0.0, -1e-300, wp1)
        denom = ew * safe - (wa + 2.0) * f / (2.0 * safe)
        dw = np.where(denom == 0.0, 0.0, f / denom)
        wn = np.minimum(wa - dw, -1.0)
        w[active] = wn
        done = np.abs(wn - wa) <= 4.0 * np.finfo(float).eps * np.abs(wn)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return float(w[0]) if scalar else w.reshape(arr.shape)


# ---------------------------------------------------------------------------
# Gamma-family functions
# ---------------------------------------------------------------------------

def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("log_gamma requires x > 0")
    out = _sp.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def regularized_gamma_lower(s, x):
    """P(s, x) = gamma(s, x) / Gamma(s); x may be +inf."""
    s_arr = np.asarray(s, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(s_arr > 0.0)):
        raise DomainError("regularized_gamma_lower requires s > 0")
    if np.any(~(x_arr >= 0.0)):
        raise DomainError("regularized_gamma_lower requires x >= 0")
    out = np.where(np.isinf(x_arr), 1.0, _sp.gammainc(s_arr, np.where(np.isinf(x_arr), 0.0, x_arr)))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature on (0, inf)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be a positive integer")


# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WK_FULL = np.concatenate([_WK[:-1], _WK[::-1]])
_WG_FULL = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae (1, 3, 5) and the centre
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[[13, 11, 9]] = _WG[:3]
_WG_FULL[7] = _WG[3]


def _gk15(g: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(g(mid + half * _NODES), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("integrand is not finite on the integration domain")
    k = half * float(vals @ _WK_FULL)
    gauss = half * float(vals @ _WG_FULL)
    return k, abs(k - gauss)


def integrate_semi_infinite(f: Callable, spec: QuadratureSpec | None = None) -> float:
    """Integral of ``f`` over (0, inf).

    ``f`` must accept a numpy array. The substitution x = t / (1 - t) maps the
    half-line onto (0, 1), where globally adaptive Gauss-Kronrod bisection
    runs until the summed error estimate meets the tolerances.
    """
    spec = spec or QuadratureSpec()

    def g(t):
        one_minus = 1.0 - t
        x = t / one_minus
        return np.asarray(f(x), dtype=float) / (one_minus * one_minus)

    val, err = _gk15(g, 0.0, 1.0)
    heap = [(-err, 0.0, 1.0, val)]
    total, total_err = val, err
    used = 1
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if used >= spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not converge in {spec.max_subdivisions} subdivisions "
                f"(estimate {total:.12g}, error {total_err:.3g})")
        neg_err, a, b, v = heapq.heappop(heap)
        m = 0.5 * (a + b)
        v1, e1 = _gk15(g, a, m)
        v2, e2 = _gk15(g, m, b)
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        used += 1
        # resum rather than update incrementally to keep roundoff out of the estimate
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return total


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

class SeriesSum(NamedTuple):
    value: float
    terms: int


def sum_series(term: Callable[[int], float], abs_tol: float = 1e-12,
               max_terms: int = 500) -> SeriesSum:
    """Sum term(0) + term(1) + ... until three consecutive terms are below
    ``abs_tol`` in magnitude.

    Requiring three small terms in a row keeps a sign change in an
    alternating series from ending the sum early.
    """
    if not abs_tol > 0:
        raise DomainError("abs_tol must be positive")
    total = 0.0
    comp = 0.0  # Kahan compensation
    small_run = 0
    for k in range(max_terms):
        t = float(term(k))
        if not math.isfinite(t):
            raise ConvergenceError(f"series term {k} is not finite")
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
        small_run = small_run + 1 if abs(t) < abs_tol else 0
        if small_run >= 3:
            return SeriesSum(total, k + 1)
    raise ConvergenceError(f"series did not converge within {max_terms} terms")
