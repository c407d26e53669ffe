"""Maximum likelihood for the ELG model: log-likelihood, analytic score and
observed information, Newton-Raphson, the EM algorithm and Wald intervals.

Parameter order is always (alpha, theta, p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.special import ndtri

from .distributions import ElgParams, _lindley_parts
from .special import ConvergenceError, DomainError

__all__ = [
    "Dataset", "FitOptions", "FitResult", "ConfidenceIntervals",
    "DegenerateDataError", "SingularInformationError",
    "tau", "log_likelihood", "score", "hessian", "observed_information",
    "invert_information", "default_init", "fit_mle_newton", "fit_mle_em",
    "em_expected_z", "em_p_update", "confidence_intervals", "normal_quantile",
]

MIN_FIT_SIZE = 5


class DegenerateDataError(DomainError):
    """The sample cannot support a fit (too small, or every value identical)."""


class SingularInformationError(np.linalg.LinAlgError):
    """The observed information is not positive definite at the reported point."""

    def __init__(self, msg: str, fit: "FitResult | None" = None):
        super().__init__(msg)
        self.fit = fit


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    label: str = "data"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).ravel().copy()
        if arr.size == 0:
            raise DomainError("dataset is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("failure times must be finite and positive")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 500
    grad_tol: float = 1e-8
    step_halving_max: int = 30
    param_floor: float = 1e-10

    def __post_init__(self):
        if min(self.max_iterations, self.grad_tol, self.step_halving_max, self.param_floor) <= 0:
            raise DomainError("fit options must all be positive")


@dataclass
class FitResult:
    params: ElgParams
    loglik: float
    score_norm: float
    info: np.ndarray
    vcov: np.ndarray | None
    iterations: int
    converged: bool
    method: Literal["newton", "em"]
    trace: list[tuple[int, float]] = field(default_factory=list)
    info_condition: float = math.nan

    @property
    def std_errors(self) -> np.ndarray:
        if self.vcov is None:
            raise SingularInformationError("no variance matrix available", self)
        return np.sqrt(np.diag(self.vcov))


@dataclass(frozen=True)
class ConfidenceIntervals:
    level: float
    alpha_ci: tuple[float, float]
    theta_ci: tuple[float, float]
    p_ci: tuple[float, float]


def _as_dataset(data) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset(np.asarray(data, dtype=float))


def _require_fit_size(data: Dataset):
    if data.n < MIN_FIT_SIZE:
        raise DegenerateDataError(f"fitting needs at least {MIN_FIT_SIZE} observations, got {data.n}")
    if np.ptp(data.values) == 0.0:
        raise DegenerateDataError("all observations are identical; the likelihood is unbounded")


# ---------------------------------------------------------------------------
# Per-observation building blocks
# ---------------------------------------------------------------------------

def tau(theta: float, x):
    """Lindley cdf 1 - (theta + 1 + theta x)/(theta + 1) exp(-theta x)."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    xx = np.asarray(x, dtype=float)
    if np.any(xx <= 0):
        raise DomainError("x must be positive")
    g, _, _ = _lindley_parts(theta, xx)
    return float(g) if g.ndim == 0 else g


class _Lindley:
    """log tau and its first two theta-derivatives at each observation."""

    def __init__(self, theta: float, x: np.ndarray):
        t = theta
        e = np.exp(-t * x)
        _, _, log_g = _lindley_parts(t, x)
        g = np.exp(log_g)
        phi = t * (1.0 + x) / (t + 1.0) + t / (t + 1.0) ** 2
        dphi = (1.0 + x) / (t + 1.0) ** 2 + (1.0 - t) / (t + 1.0) ** 3
        d1 = x * e * phi
        d2 = x * e * (dphi - x * phi)
        self.L = log_g
        self.L_t = d1 / g
        self.L_tt = d2 / g - self.L_t ** 2


class _Terms:
    """Derivatives of A = tau^alpha and D = 1 - p + p A."""

    def __init__(self, params: ElgParams, x: np.ndarray, lin: _Lindley | None = None):
        a, p = params.alpha, params.p
        lin = lin or _Lindley(params.theta, x)
        L, Lt, Ltt = lin.L, lin.L_t, lin.L_tt
        self.lin = lin
        A = np.exp(a * L)
        S = -np.expm1(a * L)
        self.A, self.S = A, S
        self.A_a = L * A
        self.A_t = a * Lt * A
        self.A_aa = L * L * A
        self.A_at = Lt * A * (1.0 + a * L)
        self.A_tt = a * A * (Ltt + a * Lt * Lt)
        self.D = 1.0 - p * S


def log_likelihood(params: ElgParams, data) -> float:
    """Log-likelihood written out term by term; -inf if any density vanishes."""
    data = _as_dataset(data)
    x = data.values
    n = data.n
    a, t, p = params.alpha, params.theta, params.p
    _, _, log_g = _lindley_parts(t, x)
    S = -np.expm1(a * log_g)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (n * math.log(a) + 2 * n * math.log(t) - n * math.log1p(t) + n * math.log1p(-p)
               + np.log1p(x).sum() - t * x.sum() + (a - 1.0) * log_g.sum()
               - 2.0 * np.log(1.0 - p * S).sum())
    val = float(val)
    return val if math.isfinite(val) else -math.inf


def _score_and_hessian(params: ElgParams, x: np.ndarray):
    a, t, p = params.alpha, params.theta, params.p
    n = x.size
    T = _Terms(params, x)
    L, Lt, Ltt = T.lin.L, T.lin.L_t, T.lin.L_tt
    D = T.D
    Da, Dt, Dp = p * T.A_a, p * T.A_t, -T.S
    ra, rt, rp = Da / D, Dt / D, Dp / D
    g = np.array([
        n / a + L.sum() - 2.0 * ra.sum(),
        n * (2.0 / t - 1.0 / (t + 1.0)) - x.sum() + (a - 1.0) * Lt.sum() - 2.0 * rt.sum(),
        -n / (1.0 - p) - 2.0 * rp.sum(),
    ])
    H = np.empty((3, 3))
    H[0, 0] = -n / a ** 2 - 2.0 * (p * T.A_aa / D - ra * ra).sum()
    H[0, 1] = Lt.sum() - 2.0 * (p * T.A_at / D - ra * rt).sum()
    H[0, 2] = -2.0 * (T.A_a / D - ra * rp).sum()
    H[1, 1] = (n * (-2.0 / t ** 2 + 1.0 / (t + 1.0) ** 2) + (a - 1.0) * Ltt.sum()
               - 2.0 * (p * T.A_tt / D - rt * rt).sum())
    H[1, 2] = -2.0 * (T.A_t / D - rt * rp).sum()
    H[2, 2] = -n / (1.0 - p) ** 2 + 2.0 * (rp * rp).sum()
    H[1, 0], H[2, 0], H[2, 1] = H[0, 1], H[0, 2], H[1, 2]
    return g, H


def score(params: ElgParams, data) -> np.ndarray:
    """Gradient of the log-likelihood in (alpha, theta, p)."""
    return _score_and_hessian(params, _as_dataset(data).values)[0]


def hessian(params: ElgParams, data) -> np.ndarray:
    return _score_and_hessian(params, _as_dataset(data).values)[1]


def observed_information(params: ElgParams, data) -> np.ndarray:
    """Negative Hessian of the log-likelihood."""
    return -hessian(params, data)


def invert_information(info: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse of a symmetric positive definite information matrix and its
    2-norm condition number."""
    sym = 0.5 * (info + info.T)
    eig = np.linalg.eigvalsh(sym)
    cond = float(eig[-1] / eig[0]) if eig[0] > 0 else math.inf
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError(
            f"observed information is not positive definite (eigenvalues {eig})") from exc
    inv_chol = np.linalg.solve(chol, np.eye(sym.shape[0]))
    return inv_chol.T @ inv_chol, cond


# ---------------------------------------------------------------------------
# Newton-Raphson
# ---------------------------------------------------------------------------

def _newton_direction(g: np.ndarray, H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    scale = max(float(np.max(np.abs(w))), 1e-300)
    # flip or lift eigenvalues so the model is concave
    lam = -np.maximum(np.abs(w), 1e-8 * scale)
    return -V @ ((V.T @ g) / lam)


def _newton_maximize(evaluate, u0: np.ndarray, opts: FitOptions, max_step: float = 3.0):
    """Maximize in unconstrained coordinates ``u``.

    ``evaluate(u)`` returns (loglik, grad_u, hess_u, score_norm) where
    score_norm is measured in the model's natural coordinates.
    """
    u = np.asarray(u0, dtype=float)
    ll, g, H, snorm = evaluate(u)
    if not math.isfinite(ll):
        raise ConvergenceError("log-likelihood is not finite at the starting point")
    trace = [(0, ll)]
    it = 0
    converged = snorm <= opts.grad_tol
    while not converged and it < opts.max_iterations:
        it += 1
        d = _newton_direction(g, H)
        big = float(np.max(np.abs(d)))
        if big > max_step:
            d *= max_step / big
        step = 1.0
        accepted = False
        slack = 1e-13 * (1.0 + abs(ll))
        for _ in range(opts.step_halving_max):
            cand = u + step * d
            try:
                res = evaluate(cand)
            except (DomainError, ArithmeticError):
                res = None
            if res is not None and math.isfinite(res[0]) and res[0] >= ll - slack:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        u = cand
        ll, g, H, snorm = res
        trace.append((it, ll))
        converged = snorm <= opts.grad_tol
    return u, ll, snorm, it, converged, trace


def _elg_from_u(u: np.ndarray) -> ElgParams:
    # p = 1 - exp(-q) spans (-inf, 1)
    return ElgParams(math.exp(u[0]), math.exp(u[1]), -math.expm1(-u[2]))


def _u_from_elg(params: ElgParams) -> np.ndarray:
    return np.array([math.log(params.alpha), math.log(params.theta), -math.log1p(-params.p)])


def _elg_evaluate(x: np.ndarray):
    def evaluate(u):
        if not np.all(np.isfinite(u)) or abs(u[0]) > 700 or abs(u[1]) > 700 or u[2] > 700:
            raise DomainError("parameters out of range")
        params = _elg_from_u(u)
        if not params.p < 1.0:
            raise DomainError("p reached 1")
        ll = log_likelihood(params, x)
        if not math.isfinite(ll):
            return ll, None, None, math.inf
        g, H = _score_and_hessian(params, x)
        J = np.array([params.alpha, params.theta, 1.0 - params.p])
        gu = J * g
        Hu = J[:, None] * H * J[None, :] + np.diag([gu[0], gu[1], -gu[2]])
        return ll, gu, Hu, float(np.linalg.norm(g))
    return evaluate


def lindley_theta_closed_form(xbar: float) -> float:
    """Lindley MLE, which coincides with the moment estimator."""
    return (-(xbar - 1.0) + math.sqrt((xbar - 1.0) ** 2 + 8.0 * xbar)) / (2.0 * xbar)


_ALPHA_MULT = (0.25, 1.0, 4.0, 16.0, 64.0)
_THETA_MULT = (0.25, 0.5, 1.0, 2.0, 4.0)
_Q_OFFSETS = (-2.4, -1.2, 0.0, 1.2, 2.4)


def _init_grid(data: Dataset) -> list[tuple[float, ElgParams]]:
    theta0 = lindley_theta_closed_form(float(data.values.mean()))
    q0 = -math.log1p(-0.1)
    cells = []
    for am in _ALPHA_MULT:
        for tm in _THETA_MULT:
            for dq in _Q_OFFSETS:
                params = ElgParams(am, theta0 * tm, -math.expm1(-(q0 + dq)))
                cells.append((log_likelihood(params, data), params))
    cells.sort(key=lambda c: -c[0] if math.isfinite(c[0]) else math.inf)
    return cells


def default_init(data) -> ElgParams:
    """Best cell of a 5x5x5 log-likelihood grid around the Lindley fit
    (alpha = 1, theta = Lindley MLE, p = 0.1)."""
    return _init_grid(_as_dataset(data))[0][1]


def _finish(params, ll, x, it, converged, trace, method, opts) -> FitResult:
    g, H = _score_and_hessian(params, x)
    info = -H
    snorm = float(np.linalg.norm(g))
    result = FitResult(params, ll, snorm, info, None, it, converged, method, trace)
    try:
        result.vcov, result.info_condition = invert_information(info)
    except SingularInformationError as exc:
        result.converged = False
        raise SingularInformationError(str(exc), result) from None
    if np.any(np.diag(result.vcov) <= 0):
        result.converged = False
    return result


def fit_mle_newton(data, init: ElgParams | None = None,
                   opts: FitOptions | None = None) -> FitResult:
    """Newton-Raphson MLE in the coordinates (log alpha, log theta, -log(1-p)).

    Each step is the Newton step on a concave-corrected Hessian, halved until
    the log-likelihood does not decrease. Without ``init`` the start is the
    best cell of :func:`default_init`'s grid; if Newton stalls there the next
    best cells are tried.
    """
    data = _as_dataset(data)
    _require_fit_size(data)
    opts = opts or FitOptions()
    x = data.values
    evaluate = _elg_evaluate(x)
    starts = [init] if init is not None else [c[1] for c in _init_grid(data)[:5]]
    best = None
    for start in starts:
        u, ll, snorm, it, conv, trace = _newton_maximize(evaluate, _u_from_elg(start), opts)
        cand = (conv, ll, u, it, trace)
        if best is None or (cand[0], cand[1]) > (best[0], best[1]):
            best = cand
        if conv:
            break
    conv, ll, u, it, trace = best
    return _finish(_elg_from_u(u), ll, x, it, conv, trace, "newton", opts)


# ---------------------------------------------------------------------------
# EM
# ---------------------------------------------------------------------------

def em_expected_z(params: ElgParams, x) -> np.ndarray:
    """E[Z | X = x] for the geometric count: (1 + p s) / (1 - p s), s = 1 - tau^alpha."""
    xx = np.asarray(x, dtype=float)
    _, _, log_g = _lindley_parts(params.theta, xx)
    s = -np.expm1(params.alpha * log_g)
    return (1.0 + params.p * s) / (1.0 - params.p * s)


def em_p_update(z) -> float:
    """p = 1 - n / sum(z)."""
    z = np.asarray(z, dtype=float)
    return float(1.0 - z.size / z.sum())


def _q_function(a: float, t: float, x: np.ndarray, zm1: np.ndarray):
    """Expected complete-data log-likelihood in (alpha, theta), less the p terms,
    with its gradient and Hessian."""
    n = x.size
    lin = _Lindley(t, x)
    L, Lt, Ltt = lin.L, lin.L_t, lin.L_tt
    A = np.exp(a * L)
    S = -np.expm1(a * L)
    A_a, A_t = L * A, a * Lt * A
    A_aa, A_at, A_tt = L * L * A, Lt * A * (1.0 + a * L), a * A * (Ltt + a * Lt * Lt)
    val = (n * math.log(a) + 2 * n * math.log(t) - n * math.log1p(t) - t * x.sum()
           + (a - 1.0) * L.sum() + (zm1 * np.log(S)).sum())
    ra, rt = A_a / S, A_t / S
    g = np.array([
        n / a + L.sum() - (zm1 * ra).sum(),
        n * (2.0 / t - 1.0 / (t + 1.0)) - x.sum() + (a - 1.0) * Lt.sum() - (zm1 * rt).sum(),
    ])
    H = np.empty((2, 2))
    H[0, 0] = -n / a ** 2 - (zm1 * (A_aa / S + ra * ra)).sum()
    H[0, 1] = H[1, 0] = Lt.sum() - (zm1 * (A_at / S + ra * rt)).sum()
    H[1, 1] = (n * (-2.0 / t ** 2 + 1.0 / (t + 1.0) ** 2) + (a - 1.0) * Ltt.sum()
               - (zm1 * (A_tt / S + rt * rt)).sum())
    return val, g, H


def _m_step(x, z, a, t, opts: FitOptions):
    """Maximize the expected complete-data log-likelihood over (alpha, theta).

    Joint Newton in (log alpha, log theta) with step halving; every accepted
    step raises the objective, so the EM ascent property is kept even when
    the inner loop stops early.
    """
    zm1 = z - 1.0

    def evaluate(u):
        if not np.all(np.abs(u) < 700):
            raise DomainError("parameters out of range")
        aa, tt = math.exp(u[0]), math.exp(u[1])
        val, g, H = _q_function(aa, tt, x, zm1)
        J = np.array([aa, tt])
        gu = J * g
        Hu = J[:, None] * H * J[None, :] + np.diag(gu)
        return val, gu, Hu, float(np.linalg.norm(g))

    inner = FitOptions(max_iterations=50, grad_tol=1e-3 * opts.grad_tol,
                       step_halving_max=opts.step_halving_max, param_floor=opts.param_floor)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        u, *_ = _newton_maximize(evaluate, np.log([a, t]), inner, max_step=2.0)
    return math.exp(u[0]), math.exp(u[1])


def fit_mle_em(data, init: ElgParams | None = None, opts: FitOptions | None = None) -> FitResult:
    """EM algorithm treating the geometric count as missing data.

    E-step: z_i = E[Z | x_i]. M-step: p = 1 - n / sum(z) in closed form, then
    (alpha, theta) maximize the expected complete-data log-likelihood.
    Stops once the observed-data score norm is at most 10 * grad_tol.
    """
    data = _as_dataset(data)
    _require_fit_size(data)
    opts = opts or FitOptions()
    if init is None:
        init = default_init(data)
        if not 0.0 < init.p < 1.0:
            init = ElgParams(init.alpha, init.theta, 0.5)
    if not 0.0 < init.p < 1.0:
        raise DomainError("EM needs a starting p inside (0, 1)")
    x = data.values
    a, t, p = init.alpha, init.theta, init.p
    params = init
    ll = log_likelihood(params, x)
    trace = [(0, ll)]
    tol = 10.0 * opts.grad_tol
    snorm = float(np.linalg.norm(score(params, x)))
    converged = snorm <= tol
    it = 0
    while not converged and it < opts.max_iterations:
        it += 1
        z = em_expected_z(params, x)
        p = em_p_update(z)
        if not opts.param_floor < p < 1.0 - opts.param_floor:
            raise DomainError(f"EM update moved p to the boundary ({p!r})")
        a, t = _m_step(x, z, a, t, opts)
        params = ElgParams(a, t, p)
        ll = log_likelihood(params, x)
        trace.append((it, ll))
        snorm = float(np.linalg.norm(score(params, x)))
        converged = snorm <= tol
    return _finish(params, ll, x, it, converged, trace, "em", opts)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------

def normal_quantile(level: float) -> float:
    """Upper (1 - level)/2 point of the standard normal."""
    if not 0.0 < level < 1.0:
        raise DomainError("confidence level must lie in (0, 1)")
    return float(ndtri(0.5 + 0.5 * level))


def confidence_intervals(fit: FitResult, level: float = 0.95) -> ConfidenceIntervals:
    """Wald intervals: estimate +/- z * standard error."""
    z = normal_quantile(level)
    if fit.vcov is None:
        raise SingularInformationError("fit has no variance matrix", fit)
    var = np.diag(fit.vcov)
    if np.any(var <= 0):
        raise SingularInformationError("nonpositive variance in the inverted information", fit)
    se = np.sqrt(var)
    est = (fit.params.alpha, fit.params.theta, fit.params.p)
    ci = [(e - z * s, e + z * s) for e, s in zip(est, se)]
    return ConfidenceIntervals(level, ci[0], ci[1], ci[2])
