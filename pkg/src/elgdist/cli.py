"""Command-line interface: ``elg {fit,compare,lrtest,sample,eval,moments}``.

Every command prints an envelope with the command name, a digest of the
input bytes and flags, the results and any warnings, either as a table or
as one JSON object per line (``--format json``).

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure
(non-convergence, degenerate data, singular information), 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import distributions as dist
from .data import BUILTIN, RELIEF_TIMES
from .distributions import ElgParams
from .estimation import (
    Dataset,
    DegenerateDataError,
    FitOptions,
    SingularInformationError,
    confidence_intervals,
    fit_mle_em,
    fit_mle_newton,
    normal_quantile,
)
from .inference import compare_models, fit_model, information_criteria, lr_test, lr_test_nested
from .moments import elg_mgf, elg_moment, summary_stats
from .special import ConvergenceError, DomainError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
RIDGE_CONDITION = 1e4
MAX_SEED = 2 ** 64 - 1


class UsageError(Exception):
    pass


class DataParseError(UsageError):
    pass


@dataclass
class Envelope:
    command: str
    inputs_digest: str
    results: dict[str, Any]
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "Envelope":
        return cls(**json.loads(text))


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

def parse_values(text: str) -> list[float]:
    """One positive number per line. Blank lines and lines starting with '#'
    are skipped; a single-column CSV with an optional text header is accepted."""
    values = []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        while len(cells) > 1 and cells[-1] == "":
            cells.pop()
        if len(cells) != 1:
            raise DataParseError(f"line {lineno}: expected a single column, got {len(cells)}")
        cell = cells[0].strip('"').strip("'")
        try:
            v = float(cell)
        except ValueError:
            if not seen_data and not values:
                seen_data = True  # column header
                continue
            raise DataParseError(f"line {lineno}: cannot parse {cell!r} as a number") from None
        seen_data = True
        if not math.isfinite(v) or v <= 0:
            raise DataParseError(f"line {lineno}: failure times must be positive and finite, got {cell!r}")
        values.append(v)
    if not values:
        raise DataParseError("no data values found")
    return values


def load_data(source: str) -> tuple[Dataset, bytes]:
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in BUILTIN:
            raise UsageError(f"unknown builtin dataset {name!r}; available: {', '.join(BUILTIN)}")
        data = BUILTIN[name]()
        return data, "".join(f"{v!r}\n" for v in RELIEF_TIMES).encode()
    raw = Path(source).read_bytes()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DataParseError(f"{source}: not UTF-8 text ({exc})") from None
    return Dataset(np.array(parse_values(text)), label=source), raw


def inputs_digest(command: str, flags: dict[str, Any], data_bytes: bytes = b"") -> str:
    h = hashlib.sha256()
    h.update(data_bytes)
    h.update(b"\0")
    h.update(json.dumps({"command": command, **flags}, sort_keys=True, default=str).encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _params_from(args) -> ElgParams:
    return ElgParams(args.alpha, args.theta, args.p)


EM_MAX_ITER = 50_000


def _fit_options(args) -> FitOptions:
    # EM converges linearly, so it gets a larger default budget
    max_iter = args.max_iter
    if max_iter is None:
        max_iter = EM_MAX_ITER if getattr(args, "method", None) == "em" else 500
    return FitOptions(max_iterations=max_iter, grad_tol=args.grad_tol)


_SOLVER = {"lg": "newton", "lindley": "bisection", "gamma": "profile", "weibull": "profile"}


def cmd_fit(args, data: Dataset) -> tuple[dict, list[str]]:
    warnings = []
    if args.method == "em" and args.model != "elg":
        raise UsageError("--method em applies only to --model elg")
    z = normal_quantile(args.level)
    opts = _fit_options(args)
    if args.model == "elg":
        fit = fit_mle_em(data, opts=opts) if args.method == "em" else fit_mle_newton(data, opts=opts)
        if not fit.converged:
            raise ConvergenceError(
                f"{args.method} did not converge in {fit.iterations} iterations "
                f"(score norm {fit.score_norm:.3g})")
        ci = confidence_intervals(fit, args.level)
        names = ("alpha", "theta", "p")
        est = dict(zip(names, (fit.params.alpha, fit.params.theta, fit.params.p)))
        se = dict(zip(names, map(float, fit.std_errors)))
        intervals = {"alpha": list(ci.alpha_ci), "theta": list(ci.theta_ci), "p": list(ci.p_ci)}
        loglik, score_norm, iters = fit.loglik, fit.score_norm, fit.iterations
        trace = {"steps": len(fit.trace), "first_loglik": fit.trace[0][1],
                 "last_loglik": fit.trace[-1][1]}
        cond = fit.info_condition
        if cond > RIDGE_CONDITION:
            warnings.append(
                f"observed information condition number {cond:.3g}: the likelihood is flat along "
                "a ridge, so point estimates are weakly identified; compare log-likelihoods")
    else:
        m = fit_model(args.model, data, opts)
        est = m.estimates
        try:
            se = m.std_errors()
        except np.linalg.LinAlgError as exc:
            raise SingularInformationError(str(exc)) from None
        intervals = {k: [est[k] - z * se[k], est[k] + z * se[k]] for k in est}
        loglik, score_norm, iters = m.loglik, m.score_norm, m.iterations
        trace = {"steps": iters}
        if args.model == "gamma":
            warnings.append("gamma density: x^(shape-1) exp(-rate x) rate^shape / Gamma(shape)")
    k = len(est)
    crit = None
    if data.n > k + 1:
        crit = asdict(information_criteria(loglik, k, data.n))
    results = {
        "model": args.model, "method": args.method if args.model == "elg" else _SOLVER[args.model],
        "n": data.n, "estimates": est, "std_errors": se, "level": args.level,
        "intervals": intervals, "loglik": loglik, "score_norm": score_norm,
        "iterations": iters, "trace": trace, "criteria": crit,
    }
    return results, warnings


def cmd_compare(args, data: Dataset) -> tuple[dict, list[str]]:
    comp = compare_models(data, opts=_fit_options(args))
    warnings = [f"{r.name}: {r.error}" for r in comp.rows if r.error]
    try:
        elg = fit_mle_newton(data, opts=_fit_options(args))
        if elg.info_condition > RIDGE_CONDITION:
            warnings.append(
                f"elg: observed information condition number {elg.info_condition:.3g}; "
                "estimates lie on a flat likelihood ridge, so the log-likelihood and "
                "criteria are the reliable comparison, not the individual estimates")
    except (ConvergenceError, DomainError, np.linalg.LinAlgError, ArithmeticError):
        pass
    return comp.to_dict(), warnings


def cmd_lrtest(args, data: Dataset | None) -> tuple[dict, list[str]]:
    if data is None:
        if args.loglik_full is None or args.loglik_restricted is None:
            raise UsageError("lrtest needs --data, or both --loglik-full and --loglik-restricted")
        res = lr_test(args.loglik_full, args.loglik_restricted, args.df, "user supplied")
    else:
        res = lr_test_nested(data, args.null, _fit_options(args))
    return asdict(res), []


def cmd_sample(args) -> tuple[dict, list[str]]:
    values = dist.elg_sample(_params_from(args), args.n, args.seed)
    results = {"params": asdict(_params_from(args)), "n": args.n, "seed": args.seed}
    text = "".join(f"{v!r}\n" for v in values.tolist())
    if args.output:
        Path(args.output).write_text(text)
        results["output"] = args.output
        results["sha256"] = hashlib.sha256(text.encode()).hexdigest()
    else:
        results["values"] = values.tolist()
    return results, []


_EVAL = {
    "pdf": dist.elg_pdf, "cdf": dist.elg_cdf, "survival": dist.elg_survival,
    "hazard": dist.elg_hazard, "quantile": dist.elg_quantile,
}


def _grid(args) -> np.ndarray:
    if args.what == "quantile":
        if args.u is None:
            raise UsageError("--what quantile needs --u")
        return np.array(args.u, dtype=float)
    if args.x is not None:
        return np.array(args.x, dtype=float)
    if args.grid is not None:
        start, stop, step = args.grid
        if not step > 0 or stop < start:
            raise UsageError("--grid needs START <= STOP and STEP > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)
    raise UsageError("give --x values or --grid START STOP STEP")


def cmd_eval(args) -> tuple[dict, list[str]]:
    params = _params_from(args)
    pts = _grid(args)
    ys = np.atleast_1d(_EVAL[args.what](params, pts))
    key = "u" if args.what == "quantile" else "x"
    return {"params": asdict(params), "what": args.what,
            "points": [{key: float(a), "y": float(b)} for a, b in zip(pts, ys)]}, []


def cmd_moments(args) -> tuple[dict, list[str]]:
    params = _params_from(args)
    raw = [elg_moment(params, k) for k in range(1, args.n_max + 1)]
    results = {
        "params": asdict(params),
        "method": raw[0].method if raw else None,
        "raw_moments": [{"order": k + 1, "value": r.value, "terms": r.terms_used,
                         "method": r.method} for k, r in enumerate(raw)],
    }
    if args.n_max >= 4:
        results["summary"] = summary_stats(params)
    if args.mgf_t is not None:
        m = elg_mgf(params, args.mgf_t)
        results["mgf"] = {"t": args.mgf_t, "value": m.value, "method": m.method}
    return results, []


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt(x)}" for k, x in v.items())
    return str(v)


def render_table(env: Envelope) -> str:
    out = [f"# {env.command}  digest {env.inputs_digest[:16]}"]
    r = env.results
    if env.command == "compare":
        head = f"{'model':<8} {'loglik':>12} {'AIC':>12} {'BIC':>12} {'AICc':>12}  estimates"
        out.append(head)
        for row in r["rows"]:
            c = row["criteria"]
            if c is None:
                out.append(f"{row['name']:<8} error: {row['error']}")
                continue
            out.append(f"{row['name']:<8} {_fmt(c['loglik']):>12} {_fmt(c['aic']):>12} "
                       f"{_fmt(c['bic']):>12} {_fmt(c['aicc']):>12}  {_fmt(row['params'])}")
        out.append(f"best: AIC {r['best_by_aic']}, BIC {r['best_by_bic']}, AICc {r['best_by_aicc']}")
    elif env.command == "eval":
        key = "u" if r["what"] == "quantile" else "x"
        out.append(f"{key:>12} {r['what']:>14}")
        out.extend(f"{_fmt(pt[key]):>12} {_fmt(pt['y']):>14}" for pt in r["points"])
    elif env.command == "sample" and "values" in r:
        out.append(f"params: {_fmt(r['params'])}  n={r['n']}  seed={r['seed']}")
        out.extend(_fmt(v) for v in r["values"])
    elif env.command == "fit":
        out.append(f"model {r['model']} ({r['method']}), n={r['n']}, loglik {_fmt(r['loglik'])}, "
                   f"score norm {_fmt(r['score_norm'])}")
        out.append(f"{'param':<8} {'estimate':>12} {'std.err':>12}   {int(round(100 * r['level']))}% interval")
        for k, v in r["estimates"].items():
            lo, hi = r["intervals"][k]
            out.append(f"{k:<8} {_fmt(v):>12} {_fmt(r['std_errors'][k]):>12}   [{_fmt(lo)}, {_fmt(hi)}]")
        if r["criteria"]:
            c = r["criteria"]
            out.append(f"AIC {_fmt(c['aic'])}  BIC {_fmt(c['bic'])}  AICc {_fmt(c['aicc'])}")
    else:
        for k, v in r.items():
            if isinstance(v, list) and v and isinstance(v[0], dict):
                out.append(f"{k}:")
                out.extend(f"  {_fmt(item)}" for item in v)
            else:
                out.append(f"{k}: {_fmt(v)}")
    out.extend(f"warning: {w}" for w in env.warnings)
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--max-iter", type=_positive_int,
                         help="iteration cap (default 500; 50000 for --method em)")
    fitting.add_argument("--grad-tol", type=float, default=1e-8)

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--alpha", type=float, required=True)
    params.add_argument("--theta", type=float, required=True)
    params.add_argument("--p", type=float, required=True)

    parser = _Parser(prog="elg", description="Exponentiated Lindley geometric lifetime model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", parents=[common, fitting], help="maximum likelihood fit")
    p.add_argument("--data", required=True, help="file path or builtin:relief")
    p.add_argument("--model", choices=("elg", "lg", "lindley", "gamma", "weibull"), default="elg")
    p.add_argument("--method", choices=("newton", "em"), default="newton")
    p.add_argument("--level", type=float, default=0.95)

    p = sub.add_parser("compare", parents=[common, fitting], help="ELG, Gamma, Weibull and LG fits side by side")
    p.add_argument("--data", required=True)

    p = sub.add_parser("lrtest", parents=[common, fitting], help="likelihood-ratio test against a submodel")
    p.add_argument("--data")
    p.add_argument("--null", choices=("lg", "lindley"), default="lg")
    p.add_argument("--loglik-full", type=float)
    p.add_argument("--loglik-restricted", type=float)
    p.add_argument("--df", type=_positive_int, default=1)

    p = sub.add_parser("sample", parents=[common, params], help="draw ELG variates")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--output", help="write values here, one per line")

    p = sub.add_parser("eval", parents=[common, params], help="evaluate a curve on a grid")
    p.add_argument("--what", choices=tuple(_EVAL), required=True)
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--grid", type=float, nargs=3, metavar=("START", "STOP", "STEP"))
    p.add_argument("--u", type=float, nargs="+")

    p = sub.add_parser("moments", parents=[common, params], help="raw moments and summary statistics")
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--mgf-t", type=float)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[int, Envelope | None, str]:
    """Execute a command; returns (exit code, envelope, error message)."""
    return execute(build_parser().parse_args(argv))


def execute(args: argparse.Namespace) -> tuple[int, Envelope | None, str]:
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        data, raw = (None, b"")
        if getattr(args, "data", None):
            data, raw = load_data(args.data)
        handler = {
            "fit": lambda: cmd_fit(args, data), "compare": lambda: cmd_compare(args, data),
            "lrtest": lambda: cmd_lrtest(args, data), "sample": lambda: cmd_sample(args),
            "eval": lambda: cmd_eval(args), "moments": lambda: cmd_moments(args),
        }[args.command]
        with np.errstate(all="ignore"):
            results, warnings = handler()
        return EXIT_OK, Envelope(args.command, inputs_digest(args.command, flags, raw),
                                 results, warnings), ""
    except OSError as exc:
        return EXIT_IO, None, f"I/O error: {exc}"
    except (DegenerateDataError, ConvergenceError, SingularInformationError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        return EXIT_NUMERIC, None, f"numerical failure: {exc}"
    except (UsageError, DomainError) as exc:
        return EXIT_USAGE, None, f"error: {exc}"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code, env, message = execute(args)
    if env is None:
        print(message, file=sys.stderr)
        return code
    print(env.to_json() if args.format == "json" else render_table(env))
    return code


if __name__ == "__main__":
    sys.exit(main())
