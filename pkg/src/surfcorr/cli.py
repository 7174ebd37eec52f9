"""Command line entry point: ``surfcorr <subcommand> ...``.

Exit codes: 0 success, 2 configuration or argument error, 3 engine or I/O
failure. Failures print a JSON error record on standard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import parse_beta_spec, parse_config
from .coupling import FullOhmic, NearestNeighbor, StripedOhmic, build_coupling
from .errors import ConfigError, InvalidParameter, SurfCorrError
from .exact import exact_curve
from .geometry import build_layout
from .loops import MU_SQUARE, enumerate_polygons, estimate_mu
from .montecarlo import McParams, mc_curve
from .runner import exact_csv, mc_csv, predictor_for, read_curve_csv, run
from .threshold import threshold_report

EXIT_CONFIG = 2
EXIT_ENGINE = 3


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("nn", "striped", "ohmic"), default="nn")
    p.add_argument("--J", type=float, default=1.0, help="coupling strength (nn, striped)")
    p.add_argument("--range", type=float, default=None, help="interaction range v*Delta")
    p.add_argument("--imag", action="store_true", help="keep the imaginary Ohmic part")


def _model(args):
    if args.model == "nn":
        return NearestNeighbor(args.J)
    if args.range is None:
        raise InvalidParameter(f"--range is required for --model {args.model}")
    if args.model == "striped":
        return StripedOhmic(args.J, args.range)
    return FullOhmic(args.range, args.imag)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_layout(args):
    _emit(json.dumps(build_layout(args.d).summary(), indent=2) + "\n", args.output)


def cmd_coupling(args):
    coupling = build_coupling(build_layout(args.d), _model(args))
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        csv.writer(out, lineterminator="\n").writerows(coupling.to_csv_rows())
    finally:
        if args.output:
            out.close()


def cmd_exact_scan(args):
    layout = build_layout(args.d)
    sums = exact_curve(layout, build_coupling(layout, _model(args)), parse_beta_spec(args.betas))
    _emit(exact_csv(sums), args.output)


def cmd_mc_scan(args):
    layout = build_layout(args.d)
    model = _model(args)
    params = McParams(sweeps=args.sweeps, burn_in=args.burn_in, seed=args.seed,
                      chains=args.chains, bins=args.bins)
    betas = parse_beta_spec(args.betas)
    ests = mc_curve(layout, build_coupling(layout, model), betas, params)
    _emit(mc_csv(ests), args.output)
    sidecar = {
        "d": args.d,
        "model": model.describe(),
        "betas": betas,
        "mc": {"sweeps": params.sweeps, "burn_in": params.burn_in, "seed": params.seed,
               "chains": params.chains, "bins": params.bins, "rng": "numpy PCG64, chain c seeded with seed+c"},
        "warnings": {str(e.beta): list(e.warnings) for e in ests if e.warnings},
    }
    target = args.sidecar or (str(Path(args.output).with_suffix(".json")) if args.output else None)
    if target:
        Path(target).write_text(json.dumps(sidecar, indent=2) + "\n")


def cmd_polygons(args):
    census = enumerate_polygons(args.max_len)
    lines = ["length,count"] + [f"{ell},{n}" for ell, n in census.rows()]
    _emit("\n".join(lines) + "\n", args.output)
    if args.mu and len(census.counts) >= 3:
        est = estimate_mu(census)
        sys.stderr.write(f"mu_hat={est.mu:.6f} raw={est.raw_mu:.6f}\n")


def cmd_predict(args):
    model = _model(args)
    value, notes = predictor_for(model, args.mu, args.n)
    print(json.dumps({"model": model.describe(), "mu": args.mu, "beta_c": value, "notes": notes}, indent=2))
    if value is None:
        return EXIT_ENGINE


def cmd_crossing(args):
    curves = []
    for item in args.curves:
        d, sep, path = item.partition("=")
        curves.append(read_curve_csv(path, int(d)) if sep else read_curve_csv(item))
    report = threshold_report(curves, args.predictor)
    _emit(json.dumps(report, indent=2) + "\n", args.output)


def cmd_run(args):
    config = parse_config(Path(args.config).read_text())
    if args.output_dir:
        config = replace(config, output_dir=args.output_dir)
    sidecar = run(config)
    print(json.dumps({"output_dir": config.output_dir, "files": sidecar["files"]}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surfcorr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="print a code layout as JSON")
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("coupling", help="coupling matrix as CSV rows r,s,ReJ,ImJ")
    p.add_argument("-d", type=int, required=True)
    _add_model_args(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("exact-scan", help="exact fidelity curve")
    p.add_argument("-d", type=int, required=True)
    _add_model_args(p)
    p.add_argument("--betas", required=True, help="min:max:step or comma list")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_exact_scan)

    p = sub.add_parser("mc-scan", help="Monte Carlo fidelity curve")
    p.add_argument("-d", type=int, required=True)
    _add_model_args(p)
    p.add_argument("--betas", required=True)
    p.add_argument("--sweeps", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("-o", "--output")
    p.add_argument("--sidecar", help="JSON parameter record (default: output path with .json)")
    p.set_defaults(func=cmd_mc_scan)

    p = sub.add_parser("polygons", help="self-avoiding polygon counts")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--mu", action="store_true", help="also print the mu estimate on stderr")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_polygons)

    p = sub.add_parser("predict", help="loop-entropy threshold estimate")
    _add_model_args(p)
    p.add_argument("--mu", type=float, default=MU_SQUARE)
    p.add_argument("--n", type=int, default=None, help="override the striped neighbour count")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("crossing", help="pairwise crossings of curve CSVs")
    p.add_argument("curves", nargs="+", help="curve CSV paths, optionally prefixed with D=")
    p.add_argument("--predictor", type=float, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_crossing)

    p = sub.add_parser("run", help="execute a configuration file")
    p.add_argument("config")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_run)
    return parser


def _fail(kind: str, message: str, code: int, details=None) -> int:
    record = {"error": kind, "message": message}
    if details:
        record["details"] = details
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except ConfigError as exc:
        return _fail(exc.kind, str(exc), EXIT_CONFIG, exc.violations)
    except InvalidParameter as exc:
        return _fail(exc.kind, str(exc), EXIT_CONFIG)
    except SurfCorrError as exc:
        return _fail(exc.kind, str(exc), EXIT_ENGINE)
    except OSError as exc:
        return _fail("io-error", str(exc), EXIT_ENGINE)
    except ValueError as exc:
        return _fail("invalid-input", str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
