"""Command-line front end: ``dcflow check|solve|montecarlo|trace``.

JSON results go to stdout, progress and errors to stderr. Exit codes: 0 success,
1 usage, 2 parse error, 3 validation error, 4 no convergence.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, NoReturn, Sequence

from jinja2 import Environment, PackageLoader, select_autoescape
from pydantic import ValidationError

from dcflow.conditions import analyze, monotone_coefficient
from dcflow.config import AnalysisConfig, McConfig, VoltageBand
from dcflow.exceptions import DCFlowException
from dcflow.files import JsonWriter, TraceWriter
from dcflow.grid import derive, validate
from dcflow.logs import setup_logging
from dcflow.models import Network, load_case
from dcflow.service import MonteCarloService, loading_sweep, solve

logger = logging.getLogger("dcflow.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 4


class ArgumentParser(argparse.ArgumentParser):
    """Parser reporting usage errors with exit code 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _norm_order(value: str) -> Any:
    if value in ("1", "2"):
        return int(value)
    if value in ("inf", "infinity"):
        return "inf"
    raise argparse.ArgumentTypeError(f"norm order must be 1, 2 or inf, got {value!r}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="dcflow",
        description="Convergent DC power-flow solvers and their sufficient conditions.",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="WARNING",
        help="Verbosity of the progress messages on stderr.",
    )
    parser.add_argument("--log-file", type=Path, help="Also append log records to this file.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_case_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("case", type=Path, help="Path of the JSON case file.")
        p.add_argument("--q", type=_norm_order, help="Norm order: 1, 2 or inf.")
        p.add_argument(
            "--band",
            nargs=2,
            type=float,
            metavar=("V_MIN", "V_MAX"),
            help="Voltage band in pu. Defaults to the case band.",
        )
        p.add_argument(
            "--strict-filter",
            action="store_true",
            help="Constrain only buses whose constant current strictly exceeds the boundary current.",
        )

    check = sub.add_parser("check", help="Evaluate every sufficient condition.")
    add_case_options(check)
    check.add_argument("--format", choices=["json", "text"], default="json")

    solve_p = sub.add_parser("solve", help="Solve the power flow.")
    add_case_options(solve_p)
    solve_p.add_argument(
        "--method", choices=["auto", "monotone", "zbus", "energy"], default="auto"
    )
    solve_p.add_argument("--tol", type=float, help="Stopping tolerance.")
    solve_p.add_argument("--max-iter", type=int, help="Iteration limit.")
    solve_p.add_argument("--trace", type=Path, help="Write the convergence trace to this CSV.")
    solve_p.add_argument(
        "--fallback",
        action="store_true",
        help="Try the other methods in flowchart order if the first one fails.",
    )

    mc = sub.add_parser("montecarlo", help="Run a Monte-Carlo loading study.")
    add_case_options(mc)
    mc.add_argument("--trials", type=int, default=1000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--p-range", nargs=2, type=float, metavar=("LO", "HI"), default=None)
    mc.add_argument("--iz-range", nargs=2, type=float, metavar=("LO", "HI"), default=None)
    mc.add_argument("--concurrency", type=int, default=4)
    mc.add_argument("--out", type=Path, help="Write the summary JSON here as well.")
    mc.add_argument("--records", type=Path, help="Write per-trial records (csv or json).")

    trace = sub.add_parser("trace", help="Export convergence traces over a loading sweep.")
    add_case_options(trace)
    trace.add_argument("--method", choices=["monotone", "zbus", "energy"], required=True)
    trace.add_argument("--factors", nargs="+", type=float, default=[1.0])
    trace.add_argument("--out-dir", type=Path, default=Path("."))
    return parser


def _analysis(args: argparse.Namespace, network: Network) -> AnalysisConfig:
    band = VoltageBand(v_min=args.band[0], v_max=args.band[1]) if args.band else network.band
    return AnalysisConfig(
        band=band,
        q=args.q if args.q is not None else network.q,
        strict_current_filter=args.strict_filter,
    )


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2))


def render_report(summary: dict[str, Any], case: str, config: AnalysisConfig) -> str:
    """Render the condition summary as text."""
    env = Environment(
        loader=PackageLoader("dcflow", "templates"),
        autoescape=select_autoescape(["html", "xml"]),
    )
    template = env.get_template("report.txt.j2")
    return template.render(
        case=case,
        config=config,
        coefficient=monotone_coefficient(config.band),
        report=summary,
    )


def cmd_check(args: argparse.Namespace) -> int:
    network = load_case(args.case)
    validate(network)
    config = _analysis(args, network)
    report = analyze(derive(network), config)
    if args.format == "text":
        print(render_report(report.summary(), str(args.case), config))
    else:
        _emit(report.summary())
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    network = load_case(args.case)
    config = _analysis(args, network)
    result, report = solve(
        network,
        args.method,
        config=config,
        tol=args.tol,
        max_iter=args.max_iter,
        record_trace=args.trace is not None,
        fallback=args.fallback,
    )
    if args.trace is not None:
        TraceWriter(args.trace).write_result(result)
    payload = result.model_dump(
        mode="json", exclude={"trace", "energy_trace", "diagnostics"}
    )
    if result.diagnostics is not None:
        payload["diagnostics"] = result.diagnostics.model_dump(
            mode="json", exclude={"ratios", "distances"}
        )
    payload["recommended"] = report.recommended.method if report.recommended else None
    _emit(payload)
    if not result.converged:
        logger.error(f"{result.method} did not converge: {result.status} ({result.message})")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_montecarlo(args: argparse.Namespace) -> int:
    network = load_case(args.case)
    config = _analysis(args, network)
    overrides: dict[str, Any] = {}
    if args.p_range is not None:
        overrides["p_scale_range"] = tuple(args.p_range)
    if args.iz_range is not None:
        overrides["iz_scale_range"] = tuple(args.iz_range)
    mc_config = McConfig(
        trials=args.trials, seed=args.seed, max_concurrency=args.concurrency, **overrides
    )
    service = MonteCarloService(network, mc_config, config)
    summary = service.run()
    if args.out is not None:
        JsonWriter(args.out).write(summary)
    if args.records is not None:
        service.write(args.records)
    _emit(summary.model_dump(mode="json"))
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    network = load_case(args.case)
    config = _analysis(args, network)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for factor, result in loading_sweep(network, args.factors, args.method, config):
        path = args.out_dir / f"{args.case.stem}_{args.method}_x{factor:g}.csv"
        TraceWriter(path).write_result(result)
        rows.append(
            {
                "factor": factor,
                "status": str(result.status),
                "iterations": result.iterations,
                "trace": str(path),
            }
        )
    _emit(rows)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "montecarlo": cmd_montecarlo,
    "trace": cmd_trace,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level=args.log_level, log_file=args.log_file)
    try:
        return COMMANDS[args.command](args)
    except DCFlowException as e:
        logger.error(str(e))
        return e.exit_code if e.exit_code is not None else EXIT_USAGE
    except ValidationError as e:
        logger.error(f"Invalid option: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
