"""Command-line entry point.

Exit codes: 0 ok, 2 parse/usage error, 3 numeric diagnostic, 4 divergence.
Failures print exactly one line to stderr: ``error: <code>: <message>``.
"""
import json
import sys

import click

from .errors import DivergenceError, FormationError, NumericError, ScenarioError
from .scenario import cmd_analyze, cmd_predict, cmd_simulate, parse_scenario

EXIT_PARSE, EXIT_NUMERIC, EXIT_DIVERGENCE = 2, 3, 4


def _emit(record):
    click.echo(json.dumps(record, indent=2))


@click.group()
def cli():
    """Dihedral-symmetry formation control: analyze, simulate, predict."""


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
def analyze(scenario_file):
    """Spectrum, chained transforms and mirror lines of a scenario."""
    _emit(cmd_analyze(parse_scenario(scenario_file)))


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory (default $DF_OUT_DIR/<name>).")
@click.option("--dt", type=float, help="Integration step.")
@click.option("--horizon", type=float, help="Simulated time span.")
def simulate(scenario_file, out_dir, dt, horizon):
    """Integrate the closed loop and write trajectory, residual and summary files."""
    _emit(cmd_simulate(parse_scenario(scenario_file), out_dir, dt, horizon))


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
def predict(scenario_file):
    """Closed-form steady state without simulating."""
    _emit(cmd_predict(parse_scenario(scenario_file)))


def _fail(code, message, status):
    click.echo(f"error: {code}: {' '.join(str(message).split())}", err=True)
    return status


def run(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="dihedral-formation", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return _fail("aborted", "interrupted", 1)
    except click.UsageError as exc:
        return _fail("usage", exc.format_message(), EXIT_PARSE)
    except ScenarioError as exc:
        return _fail(exc.code, exc, EXIT_PARSE)
    except NumericError as exc:
        return _fail(exc.code, exc, EXIT_NUMERIC)
    except DivergenceError as exc:
        return _fail(exc.code, exc, EXIT_DIVERGENCE)
    except ArithmeticError as exc:
        return _fail("numeric", exc, EXIT_NUMERIC)
    except FormationError as exc:
        return _fail(exc.code, exc, EXIT_PARSE)
    return 0


def main():
    sys.exit(run())
