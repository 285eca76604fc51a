"""``reserveflow`` command line.

Exit codes: 0 success, 1 usage, 2 infeasible or unbounded market, 3 a
verification check failed, 4 case or file problems.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from .calibration import calibrate_twobus
from .clearing import cost_breakdown, solve_clearing
from .config import default_config
from .exceptions import (
    CalibrationFailedError,
    CaseError,
    IslandedNetworkError,
    MarketError,
    NumericalFailureError,
)
from .fixtures import emit_fixtures, fixture_ieee118, fixture_twobus
from .lp import solve, write_lp
from .oracle import random_lp, vertex_oracle
from .pricing import compute_prices
from .reports import (
    comparison_table,
    dispatch_table,
    load_table,
    render,
    solver_table,
    verification_table,
)
from .serializers import parse_case
from .settlement import resource_statements, revenue_adequacy, settle
from .sweep import parse_range, plot_sweep, sweep
from .verify import CheckStatus, compare_traditional, run_all

if TYPE_CHECKING:
    from typing import Any, Callable, Mapping, Optional, Sequence

    from .model import MarketCase
    from .types import SolverConfig


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MARKET = 2
EXIT_VERIFICATION = 3
EXIT_IO = 4

BUILTIN_CASES: dict[str, Callable[[], MarketCase]] = {
    "twobus": fixture_twobus,
    "ieee118": fixture_ieee118,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def load_case(name: str) -> MarketCase:
    """A built-in case by name, otherwise a case file."""
    if name in BUILTIN_CASES:
        return BUILTIN_CASES[name]()
    return parse_case(Path(name))


def _emit(args: argparse.Namespace, frame: pd.DataFrame, title: str) -> None:
    sys.stdout.write(render(frame, args.format, title))
    if args.format == "md":
        sys.stdout.write("\n")


def _config(args: argparse.Namespace) -> SolverConfig:
    if args.tolerance is None:
        return default_config()
    return default_config(identity_tolerance=args.tolerance)


def _verify(args: argparse.Namespace, case: MarketCase, config: SolverConfig) -> int:
    solution = solve_clearing(case, config)
    prices = compute_prices(solution, case)
    ledger = settle(solution, prices, case)
    _emit(args, solver_table(solution), "Solver")
    reports = run_all(case, solution, prices, ledger, config)
    _emit(args, verification_table(reports), "Verification")
    failed = [report.check for report in reports if report.status is CheckStatus.FAIL]
    if failed:
        logger.warning(f"Failed checks: {', '.join(failed)}")
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    case, config = load_case(args.case), _config(args)
    solution = solve_clearing(case, config)
    prices = compute_prices(solution, case)
    ledger = settle(solution, prices, case)
    if args.write_lp:
        write_lp(solution.problem, args.write_lp)

    _emit(args, solver_table(solution), "Solver")
    _emit(args, dispatch_table(case, solution, prices), "Generators")
    _emit(args, load_table(case, prices, ledger), "Loads")
    costs = cost_breakdown(case, solution)
    costs["expected_total_cost"] = solution.expected_total_cost
    _emit(args, _series(costs, "cost"), "Expected cost")
    if solution.degenerate:
        logger.warning(f"{len(solution.degenerate)} weakly complementary rows; prices may not be unique")

    if args.no_verify:
        return EXIT_OK
    reports = run_all(case, solution, prices, ledger, config)
    _emit(args, verification_table(reports), "Verification")
    return EXIT_VERIFICATION if any(r.status is CheckStatus.FAIL for r in reports) else EXIT_OK


def _series(values: Mapping[str, Any], name: str) -> pd.DataFrame:
    frame = pd.DataFrame({"value": values})
    frame.index.name = name
    return frame


def cmd_price(args: argparse.Namespace) -> int:
    case, config = load_case(args.case), _config(args)
    solution = solve_clearing(case, config)
    prices = compute_prices(solution, case)
    _emit(args, prices.bus_table(case), "Nodal energy prices")
    _emit(args, prices.generator_table(case), "Generator prices")
    _emit(args, prices.load_table(case), "Load prices")
    return EXIT_OK


def cmd_settle(args: argparse.Namespace) -> int:
    case, config = load_case(args.case), _config(args)
    solution = solve_clearing(case, config)
    prices = compute_prices(solution, case)
    realized = args.realized
    if realized is not None and realized.isdigit():
        realized = int(realized)
    ledger = settle(solution, prices, case, realized)

    _emit(args, ledger.to_frame(labels=args.format == "md"), "Settlement")
    adequacy = revenue_adequacy(ledger, config["identity_tolerance"])
    _emit(
        args,
        _series(dict(zip(adequacy.columns, adequacy.unexplained)), "column"),
        "Unexplained residual",
    )
    _emit(args, resource_statements(ledger), "Participants")
    return EXIT_OK if adequacy.passed else EXIT_VERIFICATION


def cmd_verify(args: argparse.Namespace) -> int:
    return _verify(args, load_case(args.case), _config(args))


def cmd_compare(args: argparse.Namespace) -> int:
    case, config = load_case(args.case), _config(args)
    solution = solve_clearing(case, config)
    prices = compute_prices(solution, case)
    report = compare_traditional(case, solution, prices, args.ru, args.rd, config)
    _emit(args, comparison_table(report), "Traditional clearing")
    verdict = report.report(config["identity_tolerance"])
    return EXIT_VERIFICATION if verdict.status is CheckStatus.FAIL else EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    case, config = load_case(args.case), _config(args)
    try:
        values = parse_range(args.range)
        frame = sweep(case, args.param, values, config, args.workers)
    except ValueError as error:
        raise UsageError(str(error)) from error

    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.output, index=False)
    else:
        sys.stdout.write(frame.to_csv(index=False))
    if args.plot:
        columns = args.columns or [c for c in frame.columns if c.startswith("Pi_d[")]
        plot_sweep(frame, columns, args.plot, title=f"{case.name} {args.param}")
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace) -> int:
    for path in emit_fixtures(args.emit):
        sys.stdout.write(f"{path}\n")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    try:
        record = calibrate_twobus(output=args.output, config=_config(args))
    except CalibrationFailedError as error:
        logger.warning(str(error))
        if isinstance(error.result, dict):
            _emit(args, _series(dict(error.result), "parameter"), "Calibration")
        return EXIT_VERIFICATION
    _emit(args, _series(dict(record), "parameter"), "Calibration")
    return EXIT_OK


def cmd_lpcheck(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    config = default_config()
    mismatches = 0
    for i in range(args.count):
        problem = random_lp(rng)
        ours, reference = solve(problem, config), vertex_oracle(problem)
        agree = ours.status is reference.status and (
            not ours.optimal
            or abs(ours.objective_value - reference.objective_value)
            <= 1e-8 * (1 + abs(reference.objective_value))
        )
        if not agree:
            mismatches += 1
            logger.warning(
                f"LP {i}: {ours.status.value} {ours.objective_value} vs "
                f"{reference.status.value} {reference.objective_value}"
            )
    sys.stdout.write(f"{args.count - mismatches}/{args.count} random LPs agree with enumeration\n")
    return EXIT_VERIFICATION if mismatches else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reserveflow", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--format", choices=("csv", "md"), default="md")
    parser.add_argument("--tolerance", type=float, default=None, help="economic identity tolerance")
    parser.add_argument("--no-verify", action="store_true", help="skip checks after solve")
    parser.add_argument("--seed", type=int, default=0, help="seed for random test LPs")
    parser.add_argument("--log-level", default="WARNING")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, handler: Callable[[argparse.Namespace], int], summary: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=summary)
        sub.set_defaults(handler=handler)
        return sub

    solve_cmd = command("solve", cmd_solve, "clear the scenario-oriented market")
    solve_cmd.add_argument("case")
    solve_cmd.add_argument("--write-lp", type=Path, default=None, help="dump the LP in CPLEX LP format")

    command("price", cmd_price, "energy and reserve prices").add_argument("case")

    settle_cmd = command("settle", cmd_settle, "two-stage settlement ledger")
    settle_cmd.add_argument("case")
    settle_cmd.add_argument("--realized", default=None, help="scenario id or label, or 'base'")

    command("verify", cmd_verify, "run every pricing and settlement check").add_argument("case")

    compare_cmd = command("compare", cmd_compare, "traditional clearing against the scenario model")
    compare_cmd.add_argument("case")
    compare_cmd.add_argument("--ru", type=float, default=None)
    compare_cmd.add_argument("--rd", type=float, default=None)

    sweep_cmd = command("sweep", cmd_sweep, "clear the case over a parameter range")
    sweep_cmd.add_argument("case")
    sweep_cmd.add_argument("--param", required=True)
    sweep_cmd.add_argument("--range", required=True, help="a:b:n")
    sweep_cmd.add_argument("--output", type=Path, default=None)
    sweep_cmd.add_argument("--plot", type=Path, default=None)
    sweep_cmd.add_argument("--columns", nargs="*", default=None)
    sweep_cmd.add_argument("--workers", type=int, default=None)

    command("fixtures", cmd_fixtures, "write the built-in cases").add_argument("--emit", type=Path, required=True)

    command("calibrate", cmd_calibrate, "recover the unpublished two-bus parameters").add_argument(
        "--output", type=Path, default=Path("twobus_calibration.yaml")
    )

    command("lpcheck", cmd_lpcheck, "compare the LP solver with basis enumeration").add_argument(
        "--count", type=int, default=200
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.handler(args)
    except UsageError as error:
        sys.stderr.write(f"reserveflow: error: {error}\n")
        return EXIT_USAGE
    except (MarketError, NumericalFailureError) as error:
        sys.stderr.write(f"reserveflow: {error}\n")
        return EXIT_MARKET
    except (CaseError, IslandedNetworkError, OSError) as error:
        sys.stderr.write(f"reserveflow: {error}\n")
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
