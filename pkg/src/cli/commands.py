"""
Command-line interface: run, sweep and analyze
"""

from typing import List, Optional

import click
from rich.console import Console
from rich.table import Table

from ..models.schemas import RunSummary, SweepParameter
from ..utils.config import get_settings
from ..utils.error_handler import EXIT_CONFIG_ERROR, EXIT_OK, ConfigError, cli_error_handler
from ..utils.logger import configure_logging
from .config_parser import load_config
from .runner import ExperimentRunner, SweepResult

console = Console()


def parse_values(text: str) -> List[float]:
    """Comma-separated floats, e.g. ``0.1,0.5,1.1``"""
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"--values must be comma-separated numbers: {e}", key="values") from e
    if not values:
        raise ConfigError("--values is empty", key="values")
    return values


def _fmt(value) -> str:
    if value is None or value == "":
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def sweep_table(result: SweepResult) -> Table:
    """Rich table of the sweep rows"""
    table = Table(title=f"Sweep over {result.parameter.value}")
    columns = [result.parameter.value, "status", "convergence", "nondegenerate", "h1", "h2", "corners"]
    for column in columns:
        table.add_column(column, justify="right" if column in (result.parameter.value, "corners") else "left")
    for row in result.rows:
        table.add_row(*(_fmt(row.get(column)) for column in columns))
    return table


def _finish(summary: RunSummary) -> int:
    click.echo(summary.verdict_line())
    if summary.error:
        click.echo(f"error: {summary.error}", err=True)
    return summary.exit_code


@click.group()
@click.option("--log-level", default=None, help="Override PMEWAVE_LOG_LEVEL")
@click.option("--debug", is_flag=True, help="Log tracebacks of failures")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], debug: bool):
    """Traveling-wave solver for the porous medium equation with a shear flow"""
    settings = get_settings()
    configure_logging((log_level or settings.log_level).upper(), settings.log_file, settings.json_logs)
    ctx.obj = {"debug": debug or settings.debug}


@cli.command("run")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--output-dir", default=None, help="Directory for the run artifacts")
@click.pass_context
def run_command(ctx: click.Context, config: str, output_dir: Optional[str]):
    """Solve, analyse and write the artifacts of CONFIG"""

    @cli_error_handler(ctx.obj["debug"])
    def execute() -> int:
        cfg = load_config(config)
        return _finish(ExperimentRunner(output_dir=output_dir).run_experiment(cfg))

    ctx.exit(execute())


@cli.command("sweep")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--param", "parameter", type=click.Choice([p.value for p in SweepParameter]), required=True,
              help="Parameter to vary")
@click.option("--values", "values_text", required=True, help="Comma-separated values, e.g. 0.1,0.5,1.1")
@click.option("--output-dir", default=None, help="Directory for the run artifacts")
@click.pass_context
def sweep_command(ctx: click.Context, config: str, parameter: str, values_text: str, output_dir: Optional[str]):
    """Run CONFIG once per value of one parameter"""

    @cli_error_handler(ctx.obj["debug"])
    def execute() -> int:
        cfg = load_config(config)
        result = ExperimentRunner(output_dir=output_dir).sweep(cfg, parameter, parse_values(values_text))
        console.print(sweep_table(result))
        if result.transition:
            console.print(f"corner transition in m ∈ [{result.transition[0]:g}, {result.transition[1]:g}]")
        click.echo(f"sweep table: {result.table_path}")
        if any(row["status"] == "failed" for row in result.rows):
            return max(row["exit_code"] for row in result.rows)
        if all(row["status"] == "rejected" for row in result.rows):
            return EXIT_CONFIG_ERROR
        return EXIT_OK

    ctx.exit(execute())


@cli.command("analyze")
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--output-dir", default=None, help="Directory for the analysis artifacts")
@click.pass_context
def analyze_command(ctx: click.Context, snapshot: str, config: str, output_dir: Optional[str]):
    """Re-run the free-boundary analyses on SNAPSHOT"""

    @cli_error_handler(ctx.obj["debug"])
    def execute() -> int:
        cfg = load_config(config)
        return _finish(ExperimentRunner(output_dir=output_dir).analyze(snapshot, cfg))

    ctx.exit(execute())


def main():
    cli()
