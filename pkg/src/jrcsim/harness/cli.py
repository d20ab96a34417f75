"""Command line entry point: ``jrcsim run | validate | report``."""

from __future__ import annotations

import logging
import math
import sys
from pathlib import Path

import click

from ..channel import ConfigError
from .config import EXPERIMENTS, RunConfig, default_config, load_config
from .experiments import ExperimentError, ExperimentSpec, run_experiment
from .tables import emit, load

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_INFEASIBLE = 0, 1, 2, 3

log = logging.getLogger("jrcsim")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _effective_config(config_path, experiment, seeds, out, fmt, mode, c3) -> RunConfig:
    cfg = load_config(config_path) if config_path else default_config()
    exp, game = {}, {}
    if experiment:
        exp["id"] = experiment
    if seeds:
        exp["seeds"] = list(seeds)
    if out:
        exp["output"] = out
    if fmt:
        exp["format"] = fmt
    if mode:
        game["capacity_mode"] = mode
    if c3:
        game["apply_c3_filter"] = c3 == "on"
    return cfg.with_overrides(experiment=exp, game=game)


_config_opt = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                           help="JSON configuration file (defaults apply when omitted).")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Joint radar/communication time-allocation simulator."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_config_opt
@click.option("--experiment", type=click.Choice(EXPERIMENTS), help="Preset to run.")
@click.option("--seed", "seeds", type=int, multiple=True, help="Seed; repeat for several.")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), help="Table format.")
@click.option("--mode", type=click.Choice(["literal", "consistent"]), help="Capacity formula.")
@click.option("--c3", type=click.Choice(["on", "off"]), help="Restrict ratios to the AoI-feasible set.")
def run(config_path, experiment, seeds, out, fmt, mode, c3):
    """Execute a preset and write its tables plus the effective config."""
    try:
        cfg = _effective_config(config_path, experiment, seeds, out, fmt, mode, c3)
        spec = ExperimentSpec.from_config(cfg)
        result = run_experiment(spec)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except ExperimentError as exc:
        _fail(EXIT_RUNTIME, str(exc))

    out_dir = Path(cfg["experiment"]["output"])
    ext = cfg["experiment"]["format"]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.json").write_text(cfg.dumps(), encoding="ascii", newline="\n")
        for table in result.tables:
            path = emit(table, out_dir / f"{table.name}.{ext}", ext)
            click.echo(f"wrote {path} ({len(table.rows)} rows)")
    except OSError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    log.info("%s finished in %.2f s", spec.experiment_id, result.runtime_s)
    if result.infeasible_runs:
        click.echo(f"warning: {result.infeasible_runs} CTRA run(s) ended on an infeasible profile", err=True)
        sys.exit(EXIT_INFEASIBLE)


@main.command()
@_config_opt
@click.option("--dump", is_flag=True, help="Print the effective configuration.")
def validate(config_path, dump):
    """Check a configuration file."""
    try:
        cfg = load_config(config_path) if config_path else default_config()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    if dump:
        click.echo(cfg.dumps(), nl=False)
    else:
        click.echo(f"ok {cfg.digest()} experiment={cfg.experiment_id} seeds={cfg.seeds}")


@main.command()
@click.argument("table_path", type=click.Path(exists=True, dir_okay=False))
def report(table_path):
    """Summarise a result table: row count, metadata and numeric column stats."""
    try:
        table = load(table_path)
    except (ValueError, KeyError) as exc:
        _fail(EXIT_CONFIG, f"{table_path}: {exc}")
    click.echo(f"table {table.name}: {len(table.rows)} rows")
    for key, value in sorted(table.metadata.items()):
        click.echo(f"  {key} = {value}")
    for col in table.columns:
        values = table.column(col.name)
        if col.type in ("int", "float") and values:
            finite = [v for v in values if math.isfinite(v)]
            if finite:
                click.echo(f"  {col.name} [{col.unit}]: min {min(finite):.6g} "
                           f"mean {sum(finite) / len(finite):.6g} max {max(finite):.6g}")
        elif col.type == "bool" and values:
            click.echo(f"  {col.name}: {sum(values)}/{len(values)} true")
        elif col.type == "str":
            click.echo(f"  {col.name}: {len(set(values))} distinct")


if __name__ == "__main__":
    main()
