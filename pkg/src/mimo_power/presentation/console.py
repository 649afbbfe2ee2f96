"""Rich console output and logging setup for the command line."""

import logging
from typing import Dict, Iterable, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from mimo_power.application.use_cases.solve_power_control import SolveReport
from mimo_power.domain.entities.signaling import SignalingLedger

LOGGER_NAME = "mimo_power"


def configure_logging(verbosity: int = 0, console: Optional[Console] = None) -> logging.Logger:
    """Route package logs through a RichHandler on stderr.

    Args:
        verbosity: 0 for warnings, 1 for info, 2 or more for debug
        console: Console to log to; defaults to a stderr console

    Returns:
        The package logger
    """
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger


def solve_table(report: SolveReport) -> Table:
    """Per-user powers, SINR and SE of a solve."""
    table = Table(title=f"{report.strategy.value} solve: {report.status}")
    for column in ("l", "k", "rho [W]", "SINR", "SE [b/s/Hz]"):
        table.add_column(column, justify="right")
    if report.allocation is None:
        return table
    L, K = report.allocation.rho.shape
    for l in range(L):
        for k in range(K):
            table.add_row(
                str(l),
                str(k),
                f"{report.allocation.rho[l, k]:.4e}",
                f"{report.sinr[l, k]:.4f}",
                f"{report.se[l, k]:.4f}",
            )
    return table


def signaling_ledger_table(ledgers: Iterable[SignalingLedger]) -> Table:
    """Optimization-variable and exchanged-parameter counts per strategy."""
    table = Table(title="Signaling")
    table.add_column("strategy")
    table.add_column("executed at")
    for column in ("L", "K", "N", "variables", "exchanged"):
        table.add_column(column, justify="right")
    for ledger in ledgers:
        table.add_row(
            ledger.strategy.value,
            ledger.execution_place.value,
            str(ledger.L),
            str(ledger.K),
            str(ledger.iterations),
            str(ledger.optimization_variables),
            str(ledger.exchanged_parameters),
        )
    return table


def summary_table(title: str, summary: Dict[str, float]) -> Table:
    """Two-column table of scalar statistics."""
    table = Table(title=title)
    table.add_column("statistic")
    table.add_column("value", justify="right")
    for key, value in summary.items():
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        table.add_row(key, text)
    return table


def print_solve_report(console: Console, report: SolveReport, show_users: bool = True) -> None:
    """Print a solve report."""
    if show_users:
        console.print(solve_table(report))
    if report.feasible:
        console.print(f"Total power: {report.total_power:.6e} W")
    else:
        console.print(f"[bold red]Problem {report.status}[/bold red]: QoS targets cannot be met")
    console.print(signaling_ledger_table([report.ledger]))
