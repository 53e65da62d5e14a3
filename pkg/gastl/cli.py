# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Command line interface for the GASTL application.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, Optional

import click
import ujson
from loguru import logger
from pydantic import ValidationError

from .__version__ import __version__
from .configuration import Configuration
from .dataset import export_synthetic, synthetic_bundle
from .exceptions.dataerror import DataError
from .exceptions.invalidinputerror import InvalidInputError
from .exceptions.numericalerror import NumericalError
from .logmanager import LogManager
from .pipeline import (
    VARIANTS,
    compare_schemes,
    gamma_ablation,
    grid_search,
    run_experiment,
    selection_ablation,
    sensitivity,
)
from .procname import ProcName
from .report import write_document
from .settings.data import SyntheticData
from .settings.grid import GridSpec
from .settings.settings import Settings


# Logging context for the module
log = logger.bind(subsystem="cli")

# Exit codes
EXIT_INVALID_CONFIG = 1
EXIT_DATA_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

# Pydantic error types caused by missing data files
MISSING_FILE_ERRORS = ("path_not_file", "path_not_directory")


@contextmanager
def _exit_codes() -> Iterator[None]:
    """
    Turn configuration, data and numerical failures into the matching exit codes
    """
    try:
        yield
    except ValidationError as exc:
        if any(error["type"] in MISSING_FILE_ERRORS for error in exc.errors()):
            raise SystemExit(EXIT_DATA_ERROR) from exc
        raise SystemExit(EXIT_INVALID_CONFIG) from exc
    except (DataError, FileNotFoundError) as exc:
        log.bind(event="error").critical("Data error: {exc}", exc=exc)
        raise SystemExit(EXIT_DATA_ERROR) from exc
    except NumericalError as exc:
        log.bind(event="error").critical("Numerical failure: {exc}", exc=exc)
        raise SystemExit(EXIT_NUMERICAL_FAILURE) from exc
    except InvalidInputError as exc:
        log.bind(event="error").critical("Invalid input: {exc}", exc=exc)
        raise SystemExit(EXIT_INVALID_CONFIG) from exc


def _selection_count(_ctx: click.Context, _param: click.Parameter, value: Optional[str]) -> Any:
    """
    Convert a --p value into a count, 'all' or 'none'
    """
    if value is None or value in ("all", "none"):
        return value
    try:
        count = int(value)
    except ValueError as exc:
        raise click.BadParameter(f"expected a count, 'all' or 'none'; got '{value}'") from exc
    if count < 0:
        raise click.BadParameter(f"the count must not be negative; got {count}")
    return count


# Options shared by every experiment subcommand
EXPERIMENT_OPTIONS = (
    click.option(
        "-f",
        "--file",
        "file",
        help="The configuration file to load from",
        type=click.Path(exists=True, dir_okay=False, readable=True, path_type=Path),
        envvar="GASTL_CONFIG",
        default=None,
    ),
    click.option(
        "-v",
        "--verbose",
        "verbosity",
        help="Set output verbosity level - specify multiple times for further debugging",
        envvar="GASTL_VERBOSITY",
        count=True,
        default=1,
    ),
    click.option("--source", type=click.Path(path_type=Path), help="CSV file of unlabeled source samples"),
    click.option("--target-train", type=click.Path(path_type=Path), help="CSV file of labeled target training samples"),
    click.option("--target-test", type=click.Path(path_type=Path), help="CSV file of labeled target test samples"),
    click.option("--label-column", type=str, help="Header name of the label column in the target files"),
    click.option("--synthetic", is_flag=True, default=False, help="Use the default synthetic bundle"),
    click.option("--hidden-size", type=click.IntRange(min=1), help="Number of hidden units m"),
    click.option("--mu", type=float, help="Weight of the cross-domain loss"),
    click.option("--lambda", "lam", type=float, help="Weight of the l2,1-norm of the transformation matrix"),
    click.option("--gamma", type=float, help="Weight of the graph term"),
    click.option("--knn", type=click.IntRange(min=1), help="Number of nearest neighbors of the similarity graph"),
    click.option("--sigma2", type=float, help="Variance of the scheme B density"),
    click.option("--epsilon", type=float, help="Reweighting constant of the l2,1-norm"),
    click.option("--p", "p", type=str, callback=_selection_count, help="Selected source samples: N, 'all' or 'none'"),
    click.option("--scheme", type=click.Choice(["A", "B"]), help="Transferability scheme"),
    click.option("--mode", type=click.Choice(["soft", "hard"]), help="Pseudo-label mode"),
    click.option("--max-outer", type=click.IntRange(min=1), help="Maximum number of alternations"),
    click.option("--lbfgs-iters", type=click.IntRange(min=1), help="L-BFGS iterations [config default: 400]"),
    click.option("--lbfgs-memory", type=click.IntRange(min=1), help="L-BFGS curvature pairs [config default: 100]"),
    click.option("--seed", type=click.IntRange(min=0), help="Base seed"),
    click.option("--out", "out", type=click.Path(dir_okay=False, path_type=Path), help="Path of the JSON report"),
)

# Options of the grid based subcommands
GRID_OPTIONS = (
    click.option("--workers", type=click.IntRange(min=1), help="Number of worker processes running grid cells"),
    click.option(
        "--timeout",
        type=click.FloatRange(min=0, min_open=True),
        help="Seconds a grid cell may run before it is terminated and marked failed",
    ),
    click.option(
        "--table",
        type=click.Path(dir_okay=False, path_type=Path),
        help="Path of the grid CSV table [default: the report path with a .csv suffix]",
    ),
)


def _apply(options: tuple[Callable, ...]) -> Callable:
    """
    Return a decorator applying the given click options in order
    """

    def decorator(func: Callable) -> Callable:
        for option in reversed(options):
            func = option(func)
        return func

    return decorator


def _overrides(options: dict[str, Any]) -> dict[str, Any]:
    """
    Build the configuration overrides from the command line flags; unset flags are None
    """
    data: Optional[dict[str, Any]] = None
    file_flags = ("source", "target_train", "target_test", "label_column")
    if options.get("synthetic"):
        if any(options.get(flag) is not None for flag in file_flags):
            raise click.UsageError("--synthetic cannot be combined with data file options")
        data = {"origin": "synthetic"}
    elif any(options.get(flag) is not None for flag in file_flags):
        data = {"origin": "files"} | {flag: options.get(flag) for flag in file_flags}

    lbfgs = {"max_iterations": options.get("lbfgs_iters"), "memory": options.get("lbfgs_memory")}

    experiment = {
        "data": data,
        "transfer": {
            "hidden_size": options.get("hidden_size"),
            "mu": options.get("mu"),
            "lambda": options.get("lam"),
            "gamma": options.get("gamma"),
            "knn": options.get("knn"),
            "epsilon": options.get("epsilon"),
            "max_outer": options.get("max_outer"),
            "lbfgs": lbfgs,
        },
        "classifier": {"lbfgs": lbfgs},
        "p": options.get("p"),
        "scheme": options.get("scheme"),
        "mode": options.get("mode"),
        "sigma2": options.get("sigma2"),
        "seed": options.get("seed"),
        "output": str(options["out"]) if options.get("out") is not None else None,
    }
    grid = {"workers": options.get("workers"), "timeout": options.get("timeout")}
    return {
        "experiment": experiment,
        "grid": grid if any(value is not None for value in grid.values()) else None,
    }


def _load_settings(file: Optional[Path], verbosity: int, overrides: dict[str, Any]) -> Settings:
    """
    Set up logging, load the configuration with the command line overrides applied and add file loggers
    """
    logmanager = LogManager(verbosity=verbosity)

    log.bind(event="info").info("Loading configuration{source}", source=f" from '{file}'" if file else "")
    configuration = Configuration(
        log_context=log,
        file=file,
        configuration=None if file is not None else {},
        overrides=overrides,
    )

    # Configure additional logging if required
    if configuration.settings.logging:
        logmanager.setup(loggers=configuration.settings.logging)

    return configuration.settings


def _table_path(table: Optional[Path], output: Optional[Path]) -> Optional[Path]:
    """
    Return the grid CSV path; the report path with a .csv suffix unless given
    """
    if table is not None:
        return table
    return output.with_suffix(".csv") if output is not None else None


def _emit(document: dict[str, Any], output: Optional[Path], text: Optional[str] = None) -> None:
    """
    Write the JSON document to the output path, or to STDOUT when there is none; print the text table
    """
    if text is not None:
        click.echo(text)
    if output is not None:
        write_document(output, document)
    elif text is None:
        click.echo(ujson.dumps(document, indent=2))


@click.group()
@click.help_option("-h", "--help")
@click.version_option(
    version=__version__,
    prog_name="GASTL Command Line Interface",
)
def cli() -> None:
    """
    GASTL - Source Sample Selection for Self-Taught Learning

    Weight unlabeled source samples by their relevance to a labeled target task, select the most
    relevant ones and train a target classifier on them.
    """


@cli.command()
@click.help_option("-h", "--help")
@_apply(EXPERIMENT_OPTIONS)
@click.option("--model", "model_output", type=click.Path(dir_okay=False, path_type=Path), help="Path of the model JSON")
@click.option(
    "--relevance",
    "relevance_output",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Path of the per-source relevance CSV",
)
def run(
    file: Optional[Path],
    verbosity: int,
    model_output: Optional[Path],
    relevance_output: Optional[Path],
    **options: Any,
) -> None:
    """
    Run a single experiment
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, _overrides(options))
        cfg = settings.experiment
        ProcName(role="run", log_context=log).update(f"{cfg.variant} with p={cfg.p}")

        report = run_experiment(cfg, model_output=model_output, relevance_output=relevance_output)
        _emit(report.document(), cfg.output)


@cli.command()
@click.help_option("-h", "--help")
@_apply(EXPERIMENT_OPTIONS + GRID_OPTIONS)
def grid(file: Optional[Path], verbosity: int, table: Optional[Path], **options: Any) -> None:
    """
    Run a grid search over (m, lambda, gamma, p) and report the best cell
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, _overrides(options))
        cfg = settings.experiment
        ProcName(role="grid", log_context=log).update("Running grid search")

        result = grid_search(cfg, settings.grid or GridSpec())
        table = _table_path(table, cfg.output)
        if table is not None:
            result.write_csv(table)
        _emit(result.document(), cfg.output, result.table())


@cli.command("ablate-gamma")
@click.help_option("-h", "--help")
@_apply(EXPERIMENT_OPTIONS + GRID_OPTIONS)
def ablate_gamma(file: Optional[Path], verbosity: int, table: Optional[Path], **options: Any) -> None:
    """
    Compare the best cell without the graph term against the best cell over every gamma
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, _overrides(options))
        cfg = settings.experiment
        ProcName(role="ablate-gamma", log_context=log).update("Running graph ablation")

        result = gamma_ablation(cfg, settings.grid or GridSpec())
        table = _table_path(table, cfg.output)
        if table is not None:
            result.grid.write_csv(table)
        _emit(result.document(), cfg.output, result.table())


@cli.command("ablate-selection")
@click.help_option("-h", "--help")
@_apply(EXPERIMENT_OPTIONS + GRID_OPTIONS)
def ablate_selection(file: Optional[Path], verbosity: int, table: Optional[Path], **options: Any) -> None:
    """
    Compare no transfer, transfer from every source sample and the best selection
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, _overrides(options))
        cfg = settings.experiment
        ProcName(role="ablate-selection", log_context=log).update("Running selection ablation")

        result = selection_ablation(cfg, settings.grid or GridSpec())
        table = _table_path(table, cfg.output)
        if table is not None:
            result.grid.write_csv(table)
        _emit(result.document(), cfg.output, result.table())


@cli.command("sensitivity")
@click.help_option("-h", "--help")
@_apply(EXPERIMENT_OPTIONS + GRID_OPTIONS)
@click.option(
    "--variant",
    "variant_names",
    type=click.Choice([f"{mode.capitalize()}{scheme}" for scheme, mode in VARIANTS]),
    multiple=True,
    help="Classifier variant to study; repeat for several [default: all four]",
)
@click.option(
    "--stability-m",
    type=click.IntRange(min=1),
    default=None,
    help="Hidden size of the balance stability [default: the smallest grid hidden size]",
)
# pylint: disable=too-many-arguments
def sensitivity_study(
    file: Optional[Path],
    verbosity: int,
    table: Optional[Path],
    variant_names: tuple[str, ...],
    stability_m: Optional[int],
    **options: Any,
) -> None:
    """
    Report the best accuracy per hidden size and the accuracy spread over lambda and gamma per variant
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, _overrides(options))
        cfg = settings.experiment
        ProcName(role="sensitivity", log_context=log).update("Running sensitivity study")

        variants = [
            (scheme, mode)
            for scheme, mode in VARIANTS
            if not variant_names or f"{mode.capitalize()}{scheme}" in variant_names
        ]
        result = sensitivity(cfg, settings.grid or GridSpec(), variants=variants, m=stability_m)
        table = _table_path(table, cfg.output)
        if table is not None:
            for variant, variant_grid in result.grids.items():
                variant_grid.write_csv(table.with_name(f"{table.stem}-{variant}{table.suffix}"))
        _emit(result.document(), cfg.output, result.table())


@cli.command("compare-schemes")
@click.help_option("-h", "--help")
@_apply(EXPERIMENT_OPTIONS)
def compare(file: Optional[Path], verbosity: int, **options: Any) -> None:
    """
    Evaluate the SoftA, HardA, SoftB and HardB classifiers on one fitted transfer model
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, _overrides(options))
        cfg = settings.experiment
        ProcName(role="compare-schemes", log_context=log).update("Comparing transferability schemes")

        result = compare_schemes(cfg)
        _emit(result.document(), cfg.output, result.table())


# pylint: disable=too-many-arguments
@cli.command()
@click.help_option("-h", "--help")
@click.option("--features", type=click.IntRange(min=1), default=10, show_default=True, help="Feature dimension")
@click.option("--clusters", type=click.IntRange(min=1), default=3, show_default=True, help="Number of clusters")
@click.option(
    "--source-per-cluster",
    type=click.IntRange(min=1),
    default=20,
    show_default=True,
    help="Source samples per cluster",
)
@click.option(
    "--target-per-class",
    type=click.IntRange(min=1),
    default=5,
    show_default=True,
    help="Target training samples per class",
)
@click.option("--test-per-class", type=click.IntRange(min=1), default=None, help="Target test samples per class")
@click.option(
    "--relevant-clusters",
    type=click.IntRange(min=1),
    default=2,
    show_default=True,
    help="Clusters shared with the target task",
)
@click.option("--noise", type=click.FloatRange(min=0), default=0.1, show_default=True, help="Noise standard deviation")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Generator seed")
@click.option("--label-column", type=str, default="y", show_default=True, help="Header name of the label column")
@click.option(
    "--out",
    "out",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Directory the CSV files are written to",
)
@click.option(
    "-v",
    "--verbose",
    "verbosity",
    help="Set output verbosity level - specify multiple times for further debugging",
    envvar="GASTL_VERBOSITY",
    count=True,
    default=1,
)
def synth(out: Path, label_column: str, verbosity: int, **options: Any) -> None:
    """
    Write a synthetic bundle with known source relevance as CSV files
    """
    LogManager(verbosity=verbosity)
    with _exit_codes():
        try:
            data = SyntheticData(**options)
        except ValidationError as exc:
            for error in exc.errors():
                log.bind(event="error").error(
                    "{location}: {error}",
                    location=".".join(str(part) for part in error["loc"]),
                    error=error["msg"],
                )
            raise

        paths = export_synthetic(synthetic_bundle(data), out, label_column)
        for name, path in paths.items():
            click.echo(f"{name}: {path}")


@cli.command()
@click.help_option("-h", "--help")
def schema() -> None:
    """
    Dump JSON schema for GASTL configuration file to STDOUT
    """
    # Dump schema
    click.echo(ujson.dumps(Settings.model_json_schema(by_alias=True), indent=4))


@cli.command()
@click.help_option("-h", "--help")
@click.option(
    "-f",
    "--file",
    "file",
    help="The configuration file to load from",
    type=click.Path(exists=True, dir_okay=False, readable=True, path_type=Path),
    required=True,
    envvar="GASTL_CONFIG",
)
@click.option(
    "-v",
    "--verbose",
    "verbosity",
    help="Set output verbosity level - specify multiple times for further debugging",
    envvar="GASTL_VERBOSITY",
    count=True,
    default=3,
)
def check(file: Path, verbosity: int) -> None:
    """
    Test GASTL configuration file
    """
    with _exit_codes():
        settings = _load_settings(file, verbosity, {})

    # Log configuration is valid
    log.bind(event="info").info("Configuration test only; configuration is valid")
    click.echo(f"Configuration '{file}' is valid ({settings.experiment.variant})")


if __name__ == "__main__":
    cli(obj={})  # pylint: disable=no-value-for-parameter
