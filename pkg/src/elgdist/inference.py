"""Information criteria, likelihood-ratio tests and the comparator fits
(Gamma, Weibull, Lindley-geometric, Lindley) used for model comparison."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import digamma, polygamma

from .distributions import (
    ElgParams,
    GammaParams,
    LgParams,
    LindleyParams,
    WeibullParams,
    gamma_logpdf,
    weibull_logpdf,
)
from .estimation import (
    Dataset,
    FitOptions,
    FitResult,
    SingularInformationError,
    _as_dataset,
    _newton_maximize,
    _require_fit_size,
    _score_and_hessian,
    fit_mle_newton,
    invert_information,
    lindley_theta_closed_form,
    log_likelihood,
)
from .special import ConvergenceError, DomainError, regularized_gamma_lower

__all__ = [
    "InformationCriteria", "LrTestResult", "ModelFit", "ComparisonRow", "ModelComparison",
    "information_criteria", "lr_test", "lr_test_nested",
    "fit_gamma", "fit_weibull", "fit_lg", "fit_lindley", "fit_elg", "fit_model",
    "compare_models", "MODEL_NAMES",
]

NESTING_SLACK = 1e-8
SCORE_TOL = 1e-8
MODEL_NAMES = ("elg", "gamma", "weibull", "lg", "lindley")


@dataclass(frozen=True)
class InformationCriteria:
    loglik: float
    k: int
    n: int
    aic: float
    bic: float
    aicc: float


def information_criteria(loglik: float, k: int, n: int) -> InformationCriteria:
    """AIC, BIC and small-sample corrected AIC."""
    if int(k) != k or k < 1 or int(n) != n or n < 1:
        raise DomainError("k and n must be positive integers")
    if n <= k + 1:
        raise DomainError(f"AICc needs n > k + 1 (n={n}, k={k})")
    aic = 2.0 * k - 2.0 * loglik
    return InformationCriteria(
        loglik=loglik, k=int(k), n=int(n), aic=aic,
        bic=k * math.log(n) - 2.0 * loglik,
        aicc=aic + 2.0 * k * (k + 1) / (n - k - 1),
    )


@dataclass(frozen=True)
class LrTestResult:
    omega: float
    df: int
    p_value: float
    null_description: str = ""
    loglik_full: float = math.nan
    loglik_restricted: float = math.nan


def lr_test(loglik_full: float, loglik_restricted: float, df: int,
            null_description: str = "") -> LrTestResult:
    """omega = 2 (l_full - l_restricted), referred to chi-square(df)."""
    if int(df) != df or df < 1:
        raise DomainError("df must be a positive integer")
    if loglik_full < loglik_restricted - NESTING_SLACK:
        raise DomainError(
            f"restricted fit beats the full fit ({loglik_restricted!r} > {loglik_full!r}); "
            "the models are not nested or a fit did not reach its maximum")
    omega = max(0.0, 2.0 * (loglik_full - loglik_restricted))
    p_value = 1.0 - regularized_gamma_lower(0.5 * df, 0.5 * omega) if omega > 0 else 1.0
    return LrTestResult(omega, int(df), min(1.0, max(0.0, p_value)), null_description,
                        loglik_full, loglik_restricted)


# ---------------------------------------------------------------------------
# Fitted-model record
# ---------------------------------------------------------------------------

@dataclass
class ModelFit:
    """A fitted model: point estimates, log-likelihood and observed information."""
    model: str
    params: object
    param_names: tuple[str, ...]
    loglik: float
    score_norm: float
    info: np.ndarray
    n: int
    iterations: int = 0
    converged: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.param_names)

    @property
    def estimates(self) -> dict[str, float]:
        return {name: float(v) for name, v in asdict(self.params).items()}

    def vcov(self) -> np.ndarray:
        return invert_information(self.info)[0]

    def std_errors(self) -> dict[str, float]:
        se = np.sqrt(np.diag(self.vcov()))
        return dict(zip(self.param_names, map(float, se)))

    def criteria(self) -> InformationCriteria:
        return information_criteria(self.loglik, self.k, self.n)


def _check_score(fit: ModelFit) -> ModelFit:
    if not fit.score_norm <= SCORE_TOL:
        fit.converged = False
        raise ConvergenceError(
            f"{fit.model} fit stopped with score norm {fit.score_norm:.3g} > {SCORE_TOL:g}")
    return fit


def _bracket_root(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of a function decreasing from positive to negative, bracket grown geometrically."""
    for _ in range(200):
        if f(lo) > 0:
            break
        lo *= 0.5
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 2.0
    if not (f(lo) > 0 > f(hi)):
        raise ConvergenceError("could not bracket the profile root")
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


# ---------------------------------------------------------------------------
# Comparator fits
# ---------------------------------------------------------------------------

def _gamma_score_info(k: float, r: float, x: np.ndarray):
    n = x.size
    g = np.array([n * math.log(r) - n * float(digamma(k)) + np.log(x).sum(),
                  n * k / r - x.sum()])
    info = np.array([[n * float(polygamma(1, k)), -n / r], [-n / r, n * k / r ** 2]])
    return g, info


def fit_gamma(data) -> ModelFit:
    """Gamma MLE: the shape solves log k - digamma(k) = log(mean x) - mean(log x);
    the rate is then k / mean x."""
    data = _as_dataset(data)
    _require_fit_size(data)
    x = data.values
    s = math.log(x.mean()) - float(np.log(x).mean())
    if not s > 0:
        raise DomainError("gamma fit needs nonconstant data")
    k = _bracket_root(lambda k: math.log(k) - float(digamma(k)) - s, 0.5 / s, 1.0 / s)
    r = k / x.mean()
    params = GammaParams(k, r)
    g, info = _gamma_score_info(k, r, x)
    ll = float(gamma_logpdf(params, x).sum())
    return _check_score(ModelFit("gamma", params, ("shape", "rate"), ll,
                                 float(np.linalg.norm(g)), info, data.n))


def _weibull_score_info(k: float, lam: float, x: np.ndarray):
    n = x.size
    y = np.log(x / lam)
    w = np.exp(k * y)
    g = np.array([n / k + y.sum() - (w * y).sum(), -n * k / lam + (k / lam) * w.sum()])
    hkk = -n / k ** 2 - (w * y * y).sum()
    hkl = -n / lam + w.sum() / lam + (k / lam) * (w * y).sum()
    hll = n * k / lam ** 2 - k * (k + 1) / lam ** 2 * w.sum()
    return g, -np.array([[hkk, hkl], [hkl, hll]])


def fit_weibull(data) -> ModelFit:
    """Weibull MLE from the profile shape equation
    1/k + mean(log x) - sum(x^k log x) / sum(x^k) = 0, then scale = mean(x^k)^(1/k)."""
    data = _as_dataset(data)
    _require_fit_size(data)
    x = data.values
    # rescale for conditioning; the shape equation is scale-free
    xs = x / np.exp(np.log(x).mean())
    ly = np.log(xs)

    def shape_eq(k):
        w = np.exp(k * ly - np.max(k * ly))
        return 1.0 / k - float((w * ly).sum() / w.sum())

    k = _bracket_root(shape_eq, 0.5, 2.0)
    lam = float(np.mean(x ** k) ** (1.0 / k))
    params = WeibullParams(k, lam)
    g, info = _weibull_score_info(k, lam, x)
    ll = float(weibull_logpdf(params, x).sum())
    return _check_score(ModelFit("weibull", params, ("shape", "scale"), ll,
                                 float(np.linalg.norm(g)), info, data.n))


def fit_lindley(data) -> ModelFit:
    """Lindley MLE by bisection on the monotone score 2n/theta - n/(theta+1) - sum x."""
    data = _as_dataset(data)
    _require_fit_size(data)
    x = data.values
    n, sx = data.n, float(x.sum())

    def s(t):
        return 2.0 * n / t - n / (t + 1.0) - sx

    lo, hi = 1e-8, 1e6
    if not (s(lo) > 0 > s(hi)):
        raise ConvergenceError("Lindley score has no root in (1e-8, 1e6)")
    # bisect in log theta down to adjacent floats
    for _ in range(2000):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if s(mid) > 0:
            lo = mid
        else:
            hi = mid
    t = lo if abs(s(lo)) <= abs(s(hi)) else hi
    params = LindleyParams(t)
    ll = log_likelihood(ElgParams(1.0, t, 0.0), x)
    info = np.array([[2.0 * n / t ** 2 - n / (t + 1.0) ** 2]])
    return _check_score(ModelFit("lindley", params, ("theta",), ll, abs(s(t)), info, data.n))


def _lg_evaluate(x: np.ndarray):
    def evaluate(u):
        if not np.all(np.isfinite(u)) or abs(u[0]) > 700 or abs(u[1]) > 700:
            raise DomainError("parameters out of range")
        params = ElgParams(1.0, math.exp(u[0]), -math.expm1(-u[1]))
        if not params.p < 1.0:
            raise DomainError("p reached 1")
        ll = log_likelihood(params, x)
        if not math.isfinite(ll):
            return ll, None, None, math.inf
        g, H = _score_and_hessian(params, x)
        g, H = g[1:], H[1:, 1:]
        J = np.array([params.theta, 1.0 - params.p])
        gu = J * g
        Hu = J[:, None] * H * J[None, :] + np.diag([gu[0], -gu[1]])
        return ll, gu, Hu, float(np.linalg.norm(g))
    return evaluate


_LG_THETA_MULT = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
_LG_Q = (-7.0, -5.5, -4.0, -2.5, -1.0, 0.0, 1.0, 2.5)


def fit_lg(data, opts: FitOptions | None = None) -> ModelFit:
    """Lindley-geometric MLE (alpha = 1), p anywhere below 1.

    Newton in (log theta, q) with p = 1 - exp(-q), started from the best
    cells of a grid that reaches p of order -1000.
    """
    data = _as_dataset(data)
    _require_fit_size(data)
    opts = opts or FitOptions()
    x = data.values
    theta0 = lindley_theta_closed_form(float(x.mean()))
    cells = []
    for tm in _LG_THETA_MULT:
        for q in _LG_Q:
            u = np.array([math.log(theta0 * tm), q])
            ll = log_likelihood(ElgParams(1.0, theta0 * tm, -math.expm1(-q)), x)
            if math.isfinite(ll):
                cells.append((ll, u))
    cells.sort(key=lambda c: -c[0])
    evaluate = _lg_evaluate(x)
    best = None
    for _, u0 in cells[:5]:
        u, ll, snorm, it, conv, _ = _newton_maximize(evaluate, u0, opts)
        if best is None or (conv, ll) > (best[4], best[1]):
            best = (u, ll, snorm, it, conv)
        if conv:
            break
    u, ll, snorm, it, conv = best
    params = LgParams(math.exp(u[0]), -math.expm1(-u[1]))
    g, H = _score_and_hessian(ElgParams(1.0, params.theta, params.p), x)
    fit = ModelFit("lg", params, ("theta", "p"), ll, float(np.linalg.norm(g[1:])),
                   -H[1:, 1:], data.n, iterations=it, converged=conv)
    return _check_score(fit)


def fit_elg(data, lg: ModelFit | None = None, opts: FitOptions | None = None) -> ModelFit:
    """ELG MLE by Newton from the grid start; when an LG fit is supplied Newton
    is also started from (1, theta_lg, p_lg) and the higher likelihood kept,
    so the full model never scores below its submodel."""
    data = _as_dataset(data)
    opts = opts or FitOptions()
    fits: list[FitResult] = []
    errors = []
    starts = [None]
    if lg is not None:
        starts.append(ElgParams(1.0, lg.params.theta, lg.params.p))
    for start in starts:
        try:
            fits.append(fit_mle_newton(data, start, opts))
        except SingularInformationError as exc:
            if exc.fit is not None:
                fits.append(exc.fit)
            errors.append(str(exc))
        except (ConvergenceError, DomainError, ArithmeticError) as exc:
            errors.append(str(exc))
    good = [f for f in fits if f.converged]
    if not good:
        raise ConvergenceError("ELG fit did not converge" + (f": {errors[0]}" if errors else ""))
    best = max(good, key=lambda f: f.loglik)
    return ModelFit("elg", best.params, ("alpha", "theta", "p"), best.loglik, best.score_norm,
                    best.info, data.n, iterations=best.iterations, converged=True)


def fit_model(name: str, data, opts: FitOptions | None = None) -> ModelFit:
    if name == "elg":
        return fit_elg(data, opts=opts)
    if name == "lg":
        return fit_lg(data, opts)
    if name == "gamma":
        return fit_gamma(data)
    if name == "weibull":
        return fit_weibull(data)
    if name == "lindley":
        return fit_lindley(data)
    raise DomainError(f"unknown model {name!r}")


def lr_test_nested(data, null: str = "lg", opts: FitOptions | None = None) -> LrTestResult:
    """ELG against its LG (alpha = 1) or Lindley (alpha = 1, p = 0) submodel."""
    data = _as_dataset(data)
    lg = fit_lg(data, opts)
    full = fit_elg(data, lg, opts)
    if null == "lg":
        return lr_test(full.loglik, lg.loglik, 1, "alpha = 1 (LG)")
    if null == "lindley":
        return lr_test(full.loglik, fit_lindley(data).loglik, 2, "alpha = 1, p = 0 (Lindley)")
    raise DomainError(f"unknown null model {null!r}")


# ---------------------------------------------------------------------------
# Comparison table
# ---------------------------------------------------------------------------

@dataclass
class ComparisonRow:
    name: str
    params: dict[str, float]
    criteria: InformationCriteria | None
    error: str | None = None
    score_norm: float = math.nan

    def to_dict(self) -> dict:
        return {
            "name": self.name, "params": dict(self.params),
            "criteria": asdict(self.criteria) if self.criteria else None,
            "error": self.error, "score_norm": self.score_norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonRow":
        crit = InformationCriteria(**d["criteria"]) if d.get("criteria") else None
        return cls(d["name"], dict(d["params"]), crit, d.get("error"), d.get("score_norm", math.nan))


@dataclass
class ModelComparison:
    rows: list[ComparisonRow]
    best_by_aic: str | None
    best_by_bic: str | None
    best_by_aicc: str | None

    @classmethod
    def from_rows(cls, rows: list[ComparisonRow]) -> "ModelComparison":
        ok = [r for r in rows if r.criteria is not None]

        def best(attr):
            return min(ok, key=lambda r: getattr(r.criteria, attr)).name if ok else None
        return cls(rows, best("aic"), best("bic"), best("aicc"))

    def row(self, name: str) -> ComparisonRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "best_by_aic": self.best_by_aic,
                "best_by_bic": self.best_by_bic, "best_by_aicc": self.best_by_aicc}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelComparison":
        return cls([ComparisonRow.from_dict(r) for r in d["rows"]],
                   d["best_by_aic"], d["best_by_bic"], d["best_by_aicc"])


def compare_models(data, models: tuple[str, ...] = ("elg", "gamma", "weibull", "lg"),
                   opts: FitOptions | None = None) -> ModelComparison:
    """Fit each model and tabulate its criteria. A failed fit becomes an error
    row; the other rows are unaffected."""
    data = _as_dataset(data)
    fitted: dict[str, ModelFit] = {}
    rows = []
    for name in models:
        try:
            if name == "elg":
                lg = fitted.get("lg")
                if lg is None:
                    try:
                        lg = fitted["lg"] = fit_lg(data, opts)
                    except (ConvergenceError, DomainError, ArithmeticError):
                        lg = None
                fit = fit_elg(data, lg, opts)
            elif name in fitted:
                fit = fitted[name]
            else:
                fit = fit_model(name, data, opts)
            fitted[name] = fit
            rows.append(ComparisonRow(name, fit.estimates, fit.criteria(),
                                      score_norm=fit.score_norm))
        except (ConvergenceError, DomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
            rows.append(ComparisonRow(name, {}, None, f"{type(exc).__name__}: {exc}"))
    return ModelComparison.from_rows(rows)
