"""Command-line entry point.

Usage: ``multidescent <subcommand> --config <path> [--set key=value ...]``
with subcommands ``moments``, ``theory``, ``simulate``, ``sweep`` and
``limit``.  Results go to stdout as JSON (CSV for ``sweep``) with 12-digit
numbers; diagnostics and errors go to stderr, one line per error carrying
the error class name.  Exit codes: 0 success, 2 configuration error,
3 numerical/solver failure, 4 I/O error.  The environment variable
``MULTIDESCENT_THREADS`` caps the worker count of parallel sections.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from enum import IntEnum

import numpy as np

from . import __version__
from .activations import QuadratureDiverged
from .config import (
    ConfigError,
    RootConfig,
    build_empirical_config,
    build_limit_spec,
    build_sweep_spec,
    build_theory_spec,
    parse_config,
)
from .formatting import to_json
from .nu_system import InvalidSpec, NoConvergence, NonPositiveInput, solve_nu
from .risk import (
    DegenerateB,
    DegenerateMoments,
    DegenerateS,
    WrongK,
    asymptotic_risk,
    limit_risk_infinite_width,
)
from .simulator import ShapeMismatch, SolveFailure, run_experiment
from .sweep import EmptyGrid, csv_text, render_svg, run_sweep, write_csv

__all__ = ["ExitStatus", "main", "dispatch"]


class ExitStatus(IntEnum):
    OK = 0
    CONFIG = 2
    SOLVER = 3
    IO = 4


SUBCOMMANDS = ("moments", "theory", "simulate", "sweep", "limit")

_CONFIG_ERRORS = (ConfigError, InvalidSpec, DegenerateMoments, WrongK, EmptyGrid, QuadratureDiverged)
_SOLVER_ERRORS = (
    NoConvergence,
    NonPositiveInput,
    DegenerateB,
    DegenerateS,
    SolveFailure,
    ShapeMismatch,
    np.linalg.LinAlgError,
)


def _diagnose(err: BaseException, stream) -> None:
    print(f"{type(err).__name__}: {err}", file=stream)


def _workers(cfg: RootConfig) -> int:
    requested = 1
    if cfg.empirical is not None and cfg.empirical.workers is not None:
        requested = cfg.empirical.workers
    cap_text = os.environ.get("MULTIDESCENT_THREADS")
    if cap_text:
        try:
            cap = int(cap_text)
        except ValueError:
            raise ConfigError("", f"MULTIDESCENT_THREADS must be an integer, got {cap_text!r}")
        if cap < 1:
            raise ConfigError("", "MULTIDESCENT_THREADS must be >= 1")
        requested = min(requested, cap)
    return requested


def _moments_payload(m) -> dict:
    return {"mu0": m.mu0, "mu1": m.mu1, "mu2_sq": m.mu2_sq}


def _cmd_moments(cfg: RootConfig, err_stream) -> str:
    return to_json({"moments": [_moments_payload(m) for m in cfg.moments]})


def _cmd_theory(cfg: RootConfig, err_stream) -> str:
    spec = build_theory_spec(cfg)
    nu = solve_nu(spec, cfg.solver)
    result = asymptotic_risk(spec, cfg.solver, nu=nu)
    print(
        f"solver: {nu.iterations} iterations, residual {nu.residual:.3e}, "
        f"{len(nu.lambda_path)} continuation stage(s)",
        file=err_stream,
    )
    return to_json(
        {
            "risk": result.risk,
            "bias": result.bias,
            "variance": result.variance,
            "b": [float(x) for x in nu.b],
        }
    )


def _cmd_simulate(cfg: RootConfig, err_stream) -> str:
    ecfg = build_empirical_config(cfg)
    result = run_experiment(ecfg, workers=_workers(cfg))
    return to_json(
        {
            "mean": result.mean,
            "std_error": result.std_error,
            "replications": ecfg.replications,
            "per_replication": [float(x) for x in result.per_replication],
        }
    )


def _cmd_sweep(cfg: RootConfig, err_stream) -> str:
    spec = build_sweep_spec(cfg)
    result = run_sweep(spec, cfg.solver, workers=_workers(cfg))
    failed = [row for row in result.rows if row.error is not None]
    if failed:
        print(
            f"sweep: {len(failed)} of {len(result.rows)} grid points failed "
            f"(first: {failed[0].error})",
            file=err_stream,
        )
    out = cfg.output
    if out.csv_path:
        write_csv(result, out.csv_path)
    if out.svg_path:
        sweep_section = cfg.sweep
        render_svg(result, out.svg_path, log_y=sweep_section.log_y, y_cap=sweep_section.y_cap)
    if out.json_path:
        payload = {
            "rows": [
                {
                    "c": row.c,
                    "psi": list(row.psi),
                    "psi_n": row.psi_n,
                    "lambda": row.lam,
                    "theory_risk": row.theory_risk,
                    "theory_bias": row.theory_bias,
                    "theory_variance": row.theory_variance,
                    "emp_mean": row.emp_mean,
                    "emp_se": row.emp_se,
                    "replications": row.replications,
                    "solver_iterations": row.solver_iterations,
                    "error": row.error,
                }
                for row in result.rows
            ],
            "metadata": {k: v for k, v in result.metadata.items() if k != "created"},
        }
        with open(out.json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(to_json(payload) + "\n")
    return csv_text(result).rstrip("\n")


def _cmd_limit(cfg: RootConfig, err_stream) -> str:
    ls = build_limit_spec(cfg)
    return to_json(
        {"risk": limit_risk_infinite_width(ls), "r": [ls.r1, ls.r2], "psi_n": ls.psi3}
    )


_HANDLERS = {
    "moments": _cmd_moments,
    "theory": _cmd_theory,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "limit": _cmd_limit,
}


def dispatch(command: str, cfg: RootConfig, out_stream=None, err_stream=None) -> ExitStatus:
    """Run one subcommand against a validated config; returns the exit status."""
    out_stream = out_stream if out_stream is not None else sys.stdout
    err_stream = err_stream if err_stream is not None else sys.stderr
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            payload = _HANDLERS[command](cfg, err_stream)
        seen = set()
        for w in caught:
            line = f"{w.category.__name__}: {w.message}"
            if line not in seen:
                seen.add(line)
                print(line, file=err_stream)
    except _CONFIG_ERRORS as err:
        _diagnose(err, err_stream)
        return ExitStatus.CONFIG
    except _SOLVER_ERRORS as err:
        _diagnose(err, err_stream)
        return ExitStatus.SOLVER
    except OSError as err:
        _diagnose(err, err_stream)
        return ExitStatus.IO
    print(payload, file=out_stream)
    return ExitStatus.OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multidescent",
        description="Asymptotic and finite-size excess risk of random feature ridge models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    help_text = {
        "moments": "print the Gaussian moment triple of each configured activation",
        "theory": "solve the asymptotic risk for the configured model",
        "simulate": "run the finite-size Monte Carlo experiment",
        "sweep": "evaluate a complexity grid and emit CSV/SVG",
        "limit": "evaluate the infinite-width risk limit (K=2)",
    }
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=help_text[name])
        sp.add_argument("--config", required=True, help="path to a JSON config (or inline JSON)")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dotted-path override, e.g. model.lambda=1e-3 (value parsed as JSON)",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.overrides)
    except (ConfigError, QuadratureDiverged) as err:
        _diagnose(err, sys.stderr)
        return int(ExitStatus.CONFIG)
    except OSError as err:
        _diagnose(err, sys.stderr)
        return int(ExitStatus.IO)
    return int(dispatch(args.command, cfg, sys.stdout, sys.stderr))


if __name__ == "__main__":
    sys.exit(main())
