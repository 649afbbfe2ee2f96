"""Command-line interface entry point for mimo-power."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from rich.console import Console

from mimo_power import __version__
from mimo_power.application.services.centralized_service import CentralizedPowerControlService
from mimo_power.application.services.dual_decomposition_service import (
    DualDecompositionOptions,
    DualDecompositionService,
    StepSchedule,
    StoppingRule,
)
from mimo_power.application.services.experiment_service import ExperimentMode, ExperimentService
from mimo_power.application.services.signaling_service import signaling_table
from mimo_power.application.use_cases.generate_scenario import GenerateScenarioUseCase
from mimo_power.application.use_cases.run_experiment import RunExperimentUseCase
from mimo_power.application.use_cases.solve_power_control import SolvePowerControlUseCase
from mimo_power.application.use_cases.validate_closed_form import ValidateClosedFormUseCase
from mimo_power.domain.entities.drop_config import DropConfig
from mimo_power.domain.entities.scenario import PrecodingScheme
from mimo_power.domain.entities.signaling import Strategy
from mimo_power.domain.errors import MimoPowerError
from mimo_power.domain.system_model import compute_effective_gains, qos_to_sinr_target
from mimo_power.infrastructure.scenario.drop_generator import WrapAroundDropGenerator, drop_seed
from mimo_power.infrastructure.scenario.scenario_io import read_key_values, read_scenario
from mimo_power.presentation.console import (
    configure_logging,
    print_solve_report,
    signaling_ledger_table,
    summary_table,
)


def _scheme(value: str) -> PrecodingScheme:
    return PrecodingScheme(value.upper())


def _drop_config(args: argparse.Namespace) -> DropConfig:
    """Drop configuration from an optional file plus command-line overrides."""
    values = read_key_values(args.config) if args.config else {}
    cfg = DropConfig.from_mapping(values)
    if getattr(args, "full_scale", False):
        # file values take precedence over the full-scale defaults
        cfg = DropConfig.full_scale(**{key: getattr(cfg, key) for key in values})
    return cfg.with_overrides(
        master_seed=args.seed,
        num_drops=getattr(args, "drops", None),
        users_per_cell=args.users,
        antennas=args.antennas,
        scheme=args.scheme,
    )


def _dual_options(args: argparse.Namespace, reference: Optional[float] = None) -> DualDecompositionOptions:
    return DualDecompositionOptions(
        step_size=args.step,
        schedule=StepSchedule(args.schedule),
        max_iterations=args.max_iterations,
        stopping_rule=StoppingRule(getattr(args, "stopping", StoppingRule.CONSISTENCY.value)),
        reference_total_power=reference,
        workers=args.threads,
    )


def _add_drop_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="Drop configuration file (key = value)")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--users", type=int, help="Users per cell K")
    parser.add_argument("--antennas", type=int, help="Antennas per BS M")
    parser.add_argument("--scheme", type=_scheme, help="Precoding scheme (MR or ZF)")


def _add_dual_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--step", type=float, default=0.01, help="Subgradient step size")
    parser.add_argument(
        "--schedule", choices=[s.value for s in StepSchedule], default=StepSchedule.CONSTANT.value
    )
    parser.add_argument("--max-iterations", type=int, default=400)
    parser.add_argument("--threads", type=int, default=1, help="Threads for the per-BS subproblems")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the mimo-power command."""
    parser = argparse.ArgumentParser(
        prog="mimo-power",
        description="Downlink power minimization in multi-cell Massive MIMO",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Draw a network scenario")
    _add_drop_arguments(generate)
    generate.add_argument("--drop", type=int, default=0, help="Drop index under the master seed")
    generate.add_argument("--output", type=Path, required=True, help="Scenario file to write")
    generate.add_argument("--tensors", type=Path, help="Directory for beta.csv and gamma.csv")

    solve = commands.add_parser("solve", help="Solve the power minimization problem")
    solve.add_argument("scenario", type=Path, help="Scenario file")
    solve.add_argument("--mode", choices=[s.value for s in Strategy], default=Strategy.CENTRALIZED.value)
    solve.add_argument("--scheme", type=_scheme, default=PrecodingScheme.ZF)
    solve.add_argument(
        "--stopping", choices=[r.value for r in StoppingRule], default=StoppingRule.CONSISTENCY.value
    )
    _add_dual_arguments(solve)
    solve.add_argument("--output", type=Path, help="Allocation CSV")
    solve.add_argument("--trace", type=Path, help="Trace CSV (dual mode)")
    solve.add_argument("--summary", action="store_true", help="Skip the per-user table")

    experiment = commands.add_parser("experiment", help="Run a Monte-Carlo experiment")
    experiment.add_argument("--mode", choices=ExperimentMode.choices(), required=True)
    _add_drop_arguments(experiment)
    experiment.add_argument("--drops", type=int, help="Number of drops")
    experiment.add_argument("--full-scale", action="store_true", help="M=500 and 1000 drops")
    experiment.add_argument("--workers", type=int, default=1, help="Worker processes")
    _add_dual_arguments(experiment)
    experiment.add_argument("--output", type=Path, help="Result CSV")

    validate = commands.add_parser("validate", help="Check the closed-form SINR by simulation")
    validate.add_argument("--scenario", type=Path, help="Scenario file; default draws one drop")
    _add_drop_arguments(validate)
    validate.add_argument("--draws", type=int, help="Channel realizations")
    validate.add_argument("--output", type=Path, help="Report CSV")

    return parser


def _run_generate(args: argparse.Namespace, console: Console) -> None:
    cfg = _drop_config(args)
    scenario = GenerateScenarioUseCase(WrapAroundDropGenerator(cfg)).execute(
        drop_seed(cfg, args.drop), args.output, args.tensors
    )
    console.print(f"Wrote scenario L={scenario.L} K={scenario.K} M={scenario.config.M} to {args.output}")


def _run_solve(args: argparse.Namespace, console: Console) -> None:
    scenario = read_scenario(args.scenario)
    centralized = CentralizedPowerControlService()
    reference = None
    if args.mode == Strategy.DUAL_DECOMPOSITION.value and args.stopping == StoppingRule.BENCHMARK.value:
        gains = compute_effective_gains(scenario, args.scheme)
        optimum = centralized.solve(scenario, gains, qos_to_sinr_target(scenario))
        if not optimum.feasible:
            raise ValueError(f"Benchmark stopping needs a feasible problem, got {optimum.status.value}")
        reference = optimum.total_power
    use_case = SolvePowerControlUseCase(centralized, DualDecompositionService())
    report = use_case.execute(
        scenario,
        Strategy(args.mode),
        args.scheme,
        _dual_options(args, reference),
        allocation_csv=args.output,
        trace_csv=args.trace,
    )
    print_solve_report(console, report, show_users=not args.summary)


def _run_experiment(args: argparse.Namespace, console: Console) -> None:
    cfg = _drop_config(args)
    service = ExperimentService(cfg, _dual_options(args), workers=args.workers)
    result = RunExperimentUseCase(service).execute(ExperimentMode(args.mode), args.output)
    if result.mode is ExperimentMode.SIGNALING_TABLE:
        N = int(result.summary["measured_iterations"])
        console.print(signaling_ledger_table(signaling_table(cfg.num_cells, cfg.users_per_cell, N)))
    console.print(summary_table(result.mode.value, result.summary))
    if args.output is not None:
        console.print(f"Wrote {len(result.table)} rows to {args.output}")


def _run_validate(args: argparse.Namespace, console: Console) -> None:
    cfg = _drop_config(args)
    if args.scenario is not None:
        scenario = read_scenario(args.scenario)
    else:
        cfg = cfg.with_overrides(antennas=args.antennas or cfg.validation_antennas)
        scenario = WrapAroundDropGenerator(cfg).generate(drop_seed(cfg, 0))
    draws = args.draws or cfg.validation_draws
    report = ValidateClosedFormUseCase().execute(
        scenario, cfg.scheme, draws, cfg.master_seed, output=args.output
    )
    frame = report.to_frame()
    console.print(summary_table("closed-form validation", {
        "draws": draws,
        "terms": len(frame),
        "max_abs_z": report.max_abs_z,
        "within_3_se_fraction": float((frame["z_score"].abs() <= 3.0).mean()),
        "max_se_relative_error": float(report.terms.se_relative_error.max()),
        "singular_draws": report.terms.singular_draws,
    }))


_COMMANDS = {
    "generate": _run_generate,
    "solve": _run_solve,
    "experiment": _run_experiment,
    "validate": _run_validate,
}


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point for the mimo-power command."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    console = Console()
    try:
        _COMMANDS[args.command](args, console)
    except (ValueError, MimoPowerError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nExiting...", file=sys.stderr)
        sys.exit(130)
