"""Command-line front end.

Subcommands: ``fit``, ``test``, ``influence``, ``are``, ``power``,
``simulate``.  Every command writes its reports under ``--output`` (CSV for
tables, JSON for summaries, switchable with ``--format``) and accompanies
each output file with ``<file>.manifest.json`` recording the command, all
resolved options, the seed, the library version, and checksums of any input
files, so a run can be reproduced exactly.

Exit codes: 0 on success, 1 on errors, 3 when at least one requested fit did
not converge (reports are still written, with the failure noted).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import exclude_rows, load_csv, load_dataset
from .estimation import SolverOptions, fit_rp_path
from .exceptions import DegenerateFitError, DomainError
from .inference import LinearHypothesis, wald_composite
from .model import ModelData
from .robustness import (
    IFRequest,
    UNBOUNDED_SENSITIVITY,
    are,
    gross_error_sensitivity,
    if2_simple,
)
from .simulation import (
    ContaminationSpec,
    DesignSpec,
    StudyConfig,
    contiguous_table,
    run_study,
    write_study_csv,
    write_study_json,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONCONVERGED = 3

DEFAULT_ALPHAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def _float_list(text):
    return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")


def _int_list(text):
    return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, payload):
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=str)


def _manifest(out_file: Path, args, inputs=()):
    digest = {}
    for p in inputs:
        h = hashlib.sha256(Path(p).read_bytes()).hexdigest()
        digest[str(p)] = h
    payload = {
        "command": args.command,
        "options": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "library_version": __version__,
        "input_checksums": digest,
    }
    _write_json(Path(str(out_file) + ".manifest.json"), payload)


def _resolve_data(args):
    """Return (ModelData, input paths, default excluded rows)."""
    if args.data in ("brain_weight", "first_word"):
        descriptor = load_dataset(args.data)
        return descriptor.data, [], descriptor.outlier_rows
    path = Path(args.data)
    if not path.exists():
        raise DomainError(f"no such dataset or file: {args.data}")
    if args.response is None or args.covariates is None:
        raise DomainError("user CSV files need --response and --covariates")

    def column(token):
        token = token.strip()
        return int(token) if token.lstrip("-").isdigit() else token

    data = load_csv(
        path,
        response_column=column(args.response),
        covariate_columns=[column(tok) for tok in args.covariates.split(",")],
        header=not args.no_header,
        add_intercept=not args.no_intercept,
        transform=args.transform,
    )
    return data, [path], ()


def _parse_hypothesis(spec: str, dim: int) -> LinearHypothesis:
    """Parse 'beta0=1.98,beta1=0.73' or 'sigma=1' into a linear restriction."""
    indices, values = [], []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if "=" not in token:
            raise DomainError(f"bad hypothesis token {token!r}; use name=value")
        name, _, value = token.partition("=")
        name = name.strip().lower()
        if name == "sigma":
            idx = dim - 1
        elif name.startswith("beta"):
            idx = int(name[4:])
            if idx >= dim - 1:
                raise DomainError(f"{name} out of range for {dim - 1} coefficients")
        else:
            raise DomainError(f"unknown parameter {name!r}")
        indices.append(idx)
        values.append(float(value))
    if not indices:
        raise DomainError("empty hypothesis")
    return LinearHypothesis.coordinates(indices, values, dim)


def _fit_block(data: ModelData, alphas, seed, multistart=0):
    """Continuation from the maximum-likelihood fit defines the reported
    solution; restarts are opt-in because the objective rewards concentrated
    fits at large tuning values."""
    options = SolverOptions(multistart=multistart, multistart_seed=seed)
    return fit_rp_path(data, alphas, options)


def cmd_fit(args) -> int:
    data, inputs, default_outliers = _resolve_data(args)
    exclude = args.exclude if args.exclude is not None else ()
    blocks = [("all_rows", data)]
    if exclude:
        blocks.append(("excluded_" + "_".join(map(str, exclude)), exclude_rows(data, exclude)))
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    rows = []
    for label, block in blocks:
        fits = _fit_block(block, args.alphas, args.seed, args.multistart)
        for a in args.alphas:
            fit = fits[float(a)]
            if not fit.converged:
                status = EXIT_NONCONVERGED
            rows.append(
                [
                    label,
                    a,
                    fit.theta_hat.sigma,
                    *fit.theta_hat.beta.tolist(),
                    fit.objective_value,
                    fit.converged,
                ]
            )
    p = data.n_params
    columns = ["subset", "alpha", "sigma", *[f"beta{i}" for i in range(p)], "objective", "converged"]
    if args.format == "csv":
        out = out_dir / "fit.csv"
        _write_csv(out, columns, rows)
    else:
        out = out_dir / "fit.json"
        _write_json(out, {"columns": columns, "rows": rows})
    _manifest(out, args, inputs)
    print(f"wrote {out}")
    return status


def cmd_test(args) -> int:
    data, inputs, _ = _resolve_data(args)
    exclude = args.exclude if args.exclude is not None else ()
    if exclude:
        data = exclude_rows(data, exclude)
    dim = data.n_params + 1
    hyp = _parse_hypothesis(args.null, dim)
    fits = _fit_block(data, args.alphas, args.seed, args.multistart)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    status = EXIT_OK
    for a in args.alphas:
        fit = fits[float(a)]
        if not fit.converged:
            status = EXIT_NONCONVERGED
        outcome = wald_composite(data, fit, hyp)
        rows.append(
            [a, outcome.statistic, outcome.df, outcome.p_value, outcome.reject_at(args.level), fit.converged]
        )
    columns = ["alpha", "statistic", "df", "p_value", f"reject_at_{args.level}", "converged"]
    if args.format == "csv":
        out = out_dir / "test.csv"
        _write_csv(out, columns, rows)
    else:
        out = out_dir / "test.json"
        _write_json(out, {"null": args.null, "columns": columns, "rows": rows})
    _manifest(out, args, inputs)
    print(f"wrote {out}")
    return status


def cmd_influence(args) -> int:
    data, inputs, _ = _resolve_data(args)
    if args.exclude:
        data = exclude_rows(data, args.exclude)
    fits = _fit_block(data, args.alphas, args.seed)
    if len(args.t_grid) != 3:
        raise DomainError("--t-grid expects lo,hi,count")
    lo, hi, count = args.t_grid
    grid = np.linspace(lo, hi, int(count))
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    summary = {}
    direction = "all" if args.direction < 0 else args.direction
    for a in args.alphas:
        theta = fits[float(a)].theta_hat
        req = IFRequest(
            contamination_points=grid, theta=theta, alpha=float(a), direction=direction
        )
        report = if2_simple(data, req)
        for t, vec, second in zip(grid, report.first_order, report.second_order_simple):
            rows.append([a, t, float(np.linalg.norm(vec)), *vec.tolist(), second])
        if a > 0 and isinstance(direction, int):
            gb, gs = gross_error_sensitivity(data, direction, theta, float(a))
        else:
            gb = gs = UNBOUNDED_SENSITIVITY
        summary[str(a)] = {
            "sup_norm_on_grid": report.sup_norm,
            "gross_error_beta": "unbounded" if math.isinf(gb) else gb,
            "gross_error_sigma": "unbounded" if math.isinf(gs) else gs,
            "bounded": bool(a > 0),
        }
    p = data.n_params
    columns = ["alpha", "t", "if_norm", *[f"if_beta{i}" for i in range(p)], "if_sigma", "if2_simple"]
    out = out_dir / ("influence.csv" if args.format == "csv" else "influence.json")
    if args.format == "csv":
        _write_csv(out, columns, rows)
    else:
        _write_json(out, {"columns": columns, "rows": rows, "summary": summary})
    _write_json(out_dir / "influence_summary.json", summary)
    _manifest(out, args, inputs)
    _manifest(out_dir / "influence_summary.json", args, inputs)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_are(args) -> int:
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for a in args.alphas:
        eb, es = are(float(a))
        rows.append([a, 100.0 * eb, 100.0 * es])
    columns = ["alpha", "are_beta_x100", "are_sigma_x100"]
    out = out_dir / ("are.csv" if args.format == "csv" else "are.json")
    if args.format == "csv":
        _write_csv(out, columns, rows)
    else:
        _write_json(out, {"columns": columns, "rows": rows})
    _manifest(out, args)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_power(args) -> int:
    table = contiguous_table(args.alphas, args.dx, args.sigma, args.level)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [
        [a, d, power]
        for a, row in sorted(table.items())
        for d, power in sorted(row.items())
    ]
    columns = ["alpha", "d_x", "power"]
    out = out_dir / ("power.csv" if args.format == "csv" else "power.json")
    if args.format == "csv":
        _write_csv(out, columns, rows)
    else:
        _write_json(out, {"columns": columns, "rows": rows})
    _manifest(out, args)
    print(f"wrote {out}")
    return EXIT_OK


def _parse_config_file(path, seed_override=None, workers=1) -> StudyConfig:
    """Flat key=value file mapping onto the study configuration."""
    known = {
        "design", "n", "a", "b", "design_seed", "true_beta", "true_sigma",
        "alphas", "replications", "level", "seed", "contamination_fraction",
        "contaminating_beta", "placement", "placement_seed", "sample_sizes",
        "beta1_null", "beta1_alternative", "sigma_null", "sigma_alternative",
    }
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in known:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    design = DesignSpec(
        kind=raw.get("design", "two_point"),
        n=int(raw.get("n", 200)),
        a=float(raw.get("a", 1.0)),
        b=float(raw.get("b", 5.0)),
        seed=int(raw.get("design_seed", 0)),
    )
    contamination = None
    if float(raw.get("contamination_fraction", 0.0)) > 0:
        contamination = ContaminationSpec(
            fraction=float(raw["contamination_fraction"]),
            contaminating_beta=_float_list(raw.get("contaminating_beta", "1.5,2.0")),
            placement=raw.get("placement", "first_block"),
            placement_seed=int(raw.get("placement_seed", 0)),
        )
    hypotheses = (
        ("beta1", 1, float(raw.get("beta1_null", 1.0)),
         float(raw["beta1_alternative"]) if "beta1_alternative" in raw else 0.45),
        ("sigma", 2, float(raw.get("sigma_null", 1.0)),
         float(raw["sigma_alternative"]) if "sigma_alternative" in raw else 0.8),
    )
    return StudyConfig(
        design=design,
        true_beta=_float_list(raw.get("true_beta", "1.0,1.0")),
        true_sigma=float(raw.get("true_sigma", 1.0)),
        alphas=_float_list(raw.get("alphas", "0.0,0.3,0.7,1.0")),
        replications=int(raw.get("replications", 1000)),
        level=float(raw.get("level", 0.05)),
        seed=seed_override if seed_override is not None else int(raw.get("seed", 0)),
        contamination=contamination,
        sample_sizes=_int_list(raw["sample_sizes"]) if "sample_sizes" in raw else None,
        hypotheses=hypotheses,
        n_workers=workers,
    )


def cmd_simulate(args) -> int:
    config = _parse_config_file(args.config, seed_override=args.seed, workers=args.workers)
    result = run_study(config)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_csv = out_dir / "study.csv"
    out_json = out_dir / "study.json"
    write_study_csv(result, out_csv)
    write_study_json(result, out_json)
    _manifest(out_csv, args, [args.config])
    _manifest(out_json, args, [args.config])
    print(f"wrote {out_csv}")
    print(f"wrote {out_json}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renyireg",
        description="Robust linear regression by minimum Renyi pseudodistance.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, data=False):
        p.add_argument("--alphas", type=_float_list, default=DEFAULT_ALPHAS,
                       help="comma-separated tuning values (default 0,0.2,...,1)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        if data:
            p.add_argument("--data", required=True,
                           help="brain_weight, first_word, or a CSV path")
            p.add_argument("--response", default=None, help="response column for CSV input")
            p.add_argument("--covariates", default=None,
                           help="comma-separated covariate columns for CSV input")
            p.add_argument("--transform", choices=("none", "log_log"), default="none")
            p.add_argument("--no-header", action="store_true")
            p.add_argument("--no-intercept", action="store_true")
            p.add_argument("--exclude", type=_int_list, default=None,
                           help="1-based rows to drop for a second fit block")
            p.add_argument("--multistart", type=int, default=0,
                           help="random restarts per tuning value (0 = continuation only)")

    p_fit = sub.add_parser("fit", help="estimate over a grid of tuning values")
    add_common(p_fit, data=True)
    p_fit.set_defaults(func=cmd_fit)

    p_test = sub.add_parser("test", help="Wald-type tests of linear restrictions")
    add_common(p_test, data=True)
    p_test.add_argument("--null", required=True,
                        help="e.g. 'beta1=0.73' or 'beta0=1.98,beta1=0.73' or 'sigma=1'")
    p_test.add_argument("--level", type=float, default=0.05)
    p_test.set_defaults(func=cmd_test)

    p_inf = sub.add_parser("influence", help="influence curves over a contamination grid")
    add_common(p_inf, data=True)
    p_inf.add_argument("--direction", type=int, default=0,
                       help="0-based observation index; -1 for all directions")
    p_inf.add_argument("--t-grid", type=_float_list, default=(-10.0, 10.0, 101),
                       help="lo,hi,count")
    p_inf.set_defaults(func=cmd_influence)

    p_are = sub.add_parser("are", help="asymptotic relative efficiency table")
    add_common(p_are)
    p_are.set_defaults(func=cmd_are)

    p_pow = sub.add_parser("power", help="power against local alternatives")
    add_common(p_pow)
    p_pow.add_argument("--dx", type=_float_list, default=(0, 2, 5, 10, 15, 20, 25, 30),
                       help="design-normalized squared shifts")
    p_pow.add_argument("--sigma", type=float, default=1.0)
    p_pow.add_argument("--level", type=float, default=0.05)
    p_pow.set_defaults(func=cmd_power)

    p_sim = sub.add_parser("simulate", help="run a replicated study from a config file")
    p_sim.add_argument("--config", required=True, help="key = value study configuration")
    p_sim.add_argument("--output", default=".")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the seed in the config file")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, DegenerateFitError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
