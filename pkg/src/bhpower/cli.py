"""Command-line front end.

    bhpower exact    --input pair.json --epsilon 0.1,0.5
    bhpower verify   --input pair.json
    bhpower renyi    --input pair.json --r 0.1,0.5,1,2
    bhpower gaussian --input pair.json --n 16,64,256 --epsilon 0.1,0.25,0.5
    bhpower exponent --input pair.json --r 0.02,0.05 --n 64,256 --method both

Exit codes: 0 success, 1 domain error, 2 I/O or parse error, 3 verification
failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

from .core import InputFormatError, cdf, iid_product, llr_spectrum, load_pair, sup_gap
from .errors import AtomExplosion, BHTError
from .gaussian import berry_esseen_gap, gaussian_beta, matched_model, sandwich
from .largedev import E2n, RateModel, measured_deltas
from .np_exact import beta_at_log_epsilon, beta_exact
from .renyi import beta_bound
from .variational import (
    beta_variational_cdf,
    beta_variational_lambda,
    check_lambda_optimality,
    check_R_optimality,
)

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3
VERIFY_TOL = 1e-9

DEFAULTS = {
    "exact": {"epsilon": "0,0.01,0.05,0.1,0.25,0.5,0.75,0.9,1"},
    "verify": {"epsilon": ",".join(str(k / 32) for k in range(33))},
    "renyi": {"r": "0.1,0.5,1,2"},
    "gaussian": {"epsilon": "0.1,0.25,0.5", "n": "16,64,256"},
    "exponent": {"r": "0.02,0.05,0.1", "n": "64,256,1024"},
}

COLUMNS = {
    "exact": ["epsilon", "beta", "log_beta", "lambda", "delta"],
    "verify": ["epsilon", "beta_exact", "beta_lambda", "beta_cdf", "discrepancy",
               "lambda_condition", "R_condition"],
    "renyi": ["r", "bound_nats", "s_star", "exact_log_beta", "dominance"],
    "gaussian": ["n", "epsilon", "exact_beta", "gaussian_beta", "be_gap", "sup_gap_l",
                 "sup_gap_h", "lower", "upper", "contained", "degenerate"],
    "exponent": ["r", "n", "En_exact", "E2n_quadrature", "E2n_laplace", "R_star",
                 "delta_l", "delta_h", "lower", "upper", "sandwich_ok", "status"],
}

# columns carried in nats, rescaled by --bits
NATS = {
    "exact": {"log_beta"},
    "verify": set(),
    "renyi": {"r", "bound_nats", "exact_log_beta"},
    "gaussian": set(),
    "exponent": {"r", "En_exact", "E2n_quadrature", "E2n_laplace", "R_star",
                 "delta_l", "delta_h", "lower", "upper"},
}


@dataclass
class RunConfig:
    subcommand: str
    input: str
    output: str | None = None
    format: str = "csv"
    epsilon: list[float] = field(default_factory=list)
    r: list[float] = field(default_factory=list)
    n: list[int] = field(default_factory=list)
    method: str = "both"
    bits: bool = False


def parse_list(text: str, kind: Callable = float) -> list:
    try:
        values = [kind(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}: {exc}") from exc
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _in_unit(values, name):
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise BHTError(f"{name} value {v!r} outside [0, 1]")


# -- subcommands --------------------------------------------------------------


def cmd_exact(spectrum, cfg: RunConfig) -> list[dict]:
    _in_unit(cfg.epsilon, "epsilon")
    rows = []
    for eps in cfg.epsilon:
        res = beta_exact(spectrum, 1.0 - eps)
        rows.append({"epsilon": eps, "beta": res.beta, "log_beta": res.log_beta,
                     "lambda": res.test.lam, "delta": res.test.delta})
    return rows


ROUTES = {
    "exact": lambda s, eps: beta_exact(s, 1.0 - eps).beta,
    "lambda": lambda s, eps: beta_variational_lambda(s, 1.0 - eps).beta,
    "cdf": lambda s, eps: beta_variational_cdf(s, eps).beta,
}


def cmd_verify(spectrum, cfg: RunConfig, routes: dict | None = None) -> tuple[list[dict], bool]:
    _in_unit(cfg.epsilon, "epsilon")
    routes = ROUTES if routes is None else routes
    rows, ok = [], True
    for eps in cfg.epsilon:
        b_np = routes["exact"](spectrum, eps)
        b_lam = routes["lambda"](spectrum, eps)
        b_cdf = routes["cdf"](spectrum, eps)
        lam = beta_variational_lambda(spectrum, 1.0 - eps).lam
        R = beta_variational_cdf(spectrum, eps).R
        lam_ok = check_lambda_optimality(spectrum, lam, 1.0 - eps)
        R_ok = math.isinf(R) or check_R_optimality(spectrum, R, eps)
        gap = max(abs(b_np - b_lam), abs(b_np - b_cdf))
        ok &= gap <= VERIFY_TOL and lam_ok and R_ok
        rows.append({"epsilon": eps, "beta_exact": b_np, "beta_lambda": b_lam,
                     "beta_cdf": b_cdf, "discrepancy": gap,
                     "lambda_condition": lam_ok, "R_condition": R_ok})
    return rows, ok


def cmd_renyi(spectrum, cfg: RunConfig) -> list[dict]:
    rows = []
    for r in cfg.r:
        if r < 0:
            raise BHTError(f"r value {r!r} must be >= 0")
        bound, s_star = beta_bound(spectrum, r)
        exact = beta_at_log_epsilon(spectrum, -r).log_beta
        rows.append({"r": r, "bound_nats": bound, "s_star": s_star, "exact_log_beta": exact,
                     "dominance": bound >= exact - 1e-9})
    return rows


def cmd_gaussian(spectrum, cfg: RunConfig) -> list[dict]:
    for eps in cfg.epsilon:
        if not 0.0 < eps < 1.0:
            raise BHTError(f"epsilon value {eps!r} outside (0, 1)")
    rows = []
    for n in cfg.n:
        product = iid_product(spectrum, n)
        model = matched_model(spectrum, n)
        d = berry_esseen_gap(spectrum, n)
        d_l, d_h = sup_gap(cdf(product), model)
        for eps in cfg.epsilon:
            sw = sandwich(product, model.with_gaps(d, d), eps)
            rows.append({"n": n, "epsilon": eps, "exact_beta": sw.exact,
                         "gaussian_beta": gaussian_beta(model, eps).beta, "be_gap": d,
                         "sup_gap_l": d_l, "sup_gap_h": d_h, "lower": sw.lower,
                         "upper": sw.upper, "contained": sw.contains(),
                         "degenerate": sw.lower_degenerate or sw.upper_degenerate})
    return rows


def cmd_exponent(spectrum, cfg: RunConfig) -> list[dict]:
    rate = RateModel(spectrum)
    methods = ["quadrature", "laplace"] if cfg.method == "both" else [cfg.method]
    primary = methods[0]
    rows = []
    for r in cfg.r:
        if r < 0:
            raise BHTError(f"r value {r!r} must be >= 0")
        for n in cfg.n:
            row = dict.fromkeys(COLUMNS["exponent"], math.nan)
            row.update(r=r, n=n, status="ok")
            for m in methods:
                res = E2n(rate, r, n, m)
                row[f"E2n_{m}"] = res.E2n
                if m == primary:
                    row["R_star"] = res.R_star
            try:
                product = iid_product(spectrum, n)
            except AtomExplosion:
                row.update(status="atom_explosion", sandwich_ok="")
                rows.append(row)
                continue
            d_l, d_h = measured_deltas(rate, n, product)
            exact = beta_at_log_epsilon(product, -n * r).log_beta
            En = math.inf if exact == -math.inf else -exact / n
            lower = E2n(rate, r + d_h, n, primary).E2n - d_h
            upper = E2n(rate, r - d_l, n, primary).E2n + d_l
            row.update(En_exact=En, delta_l=d_l, delta_h=d_h, lower=lower, upper=upper,
                       sandwich_ok=lower <= En <= upper)
            rows.append(row)
    return rows


# -- output -------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return _fmt(value)
    return value


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        doc = [{c: _json_value(row[c]) for c in columns} for row in rows]
        return json.dumps(doc, indent=2) + "\n"
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    return out.getvalue()


def to_bits(rows: list[dict], columns: set[str]) -> list[dict]:
    scaled = []
    for row in rows:
        row = dict(row)
        for c in columns:
            if isinstance(row.get(c), float):
                row[c] = row[c] / math.log(2.0)
        scaled.append(row)
    return scaled


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bhpower", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COLUMNS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="distribution file (.json or .csv)")
        p.add_argument("--output", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--bits", action="store_true", help="report nats columns in bits")
        defaults = DEFAULTS[name]
        if "epsilon" in defaults:
            p.add_argument("--epsilon", type=parse_list, default=parse_list(defaults["epsilon"]))
        if "r" in defaults:
            p.add_argument("--r", type=parse_list, default=parse_list(defaults["r"]))
        if "n" in defaults:
            p.add_argument("--n", type=lambda s: parse_list(s, int),
                           default=parse_list(defaults["n"], int))
        if name == "exponent":
            p.add_argument("--method", choices=["quadrature", "laplace", "both"], default="both")
    return parser


def run(cfg: RunConfig, routes: dict | None = None) -> tuple[str, int]:
    """Execute one subcommand; returns the rendered table and the exit code."""
    spectrum = llr_spectrum(load_pair(cfg.input))
    code = EXIT_OK
    if cfg.subcommand == "verify":
        rows, ok = cmd_verify(spectrum, cfg, routes)
        code = EXIT_OK if ok else EXIT_VERIFY
    else:
        handler = {"exact": cmd_exact, "renyi": cmd_renyi, "gaussian": cmd_gaussian,
                   "exponent": cmd_exponent}[cfg.subcommand]
        rows = handler(spectrum, cfg)
    if cfg.bits:
        rows = to_bits(rows, NATS[cfg.subcommand])
    return render(rows, COLUMNS[cfg.subcommand], cfg.format), code


def main(argv: list[str] | None = None, routes: dict | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
    try:
        text, code = run(cfg, routes)
    except (OSError, InputFormatError) as exc:
        print(f"bhpower: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BHTError as exc:
        print(f"bhpower: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_VERIFY:
        print("bhpower: verification failed: routes disagree beyond "
              f"{VERIFY_TOL:g} or an optimality condition failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
