"""Command-line interface for wqed-ladder.

Every subcommand writes versioned CSV tables and a ``manifest.json`` to the
output directory. ``rerun MANIFEST`` replays a manifest bit-identically.

Exit codes:
    0: success
    1: usage or configuration error
    2: numerical failure (singular system, pole, sampling, realization)
    3: validation failure
"""

import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, cast

import click

from . import __version__, _setup_file_logging
from .config import SimulationConfig
from .ddi import ddi_at_distance
from .disorder import mean_ddi_curve
from .ensemble import (
    DEFAULT_DELTA_PER_N,
    efficiency_map,
    localization_sweep,
    mean_pmax,
    run_ensemble,
)
from .exceptions import (
    ConfigurationError,
    DomainError,
    EnsembleError,
    NumericalError,
    SamplingError,
    UndefinedEfficiencyError,
    ValidationFailure,
    WaveguideRoutingError,
)
from .models import ResultTable, RunManifest, Spectrum
from .observables import pmax_scan, spectrum
from .profiler import RunProfiler
from .validation import run_validation
from .writers import get_writer
from .writers.json_writer import JsonWriter

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest"
PROFILE_NAME = "profile.html"
TABLE_SCHEMA = "wqed-ladder/table/v1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3


@dataclass
class CommandOutput:
    """What a subcommand produced, before anything is written."""

    tables: List[ResultTable] = field(default_factory=list)
    documents: Dict[str, Any] = field(default_factory=dict)
    summary: List[str] = field(default_factory=list)
    failure: Optional[str] = None


@dataclass
class RunContext:
    """State shared by the group and its subcommands."""

    config: SimulationConfig
    profile: bool = False
    plot: bool = False
    overrides: Dict[str, Any] = field(default_factory=dict)


def _metadata(config: SimulationConfig, table: str, **extra: Any) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "schema": f"{TABLE_SCHEMA}/{table}",
        "version": __version__,
        "master_seed": config.master_seed,
    }
    data.update(extra)
    return data


def _spectrum_table(
    name: str, result: Spectrum, config: SimulationConfig, **extra: Any
) -> ResultTable:
    table = ResultTable(
        name=name,
        columns=["delta", "P2", "P4", "xi", "P2_stderr", "P4_stderr", "xi_stderr"],
        metadata=_metadata(config, "spectrum", **extra),
        plot_columns=["P2", "P4"],
    )
    p2_err = result.error_of("t_bottom")
    p4_err = result.error_of("t_top")
    xi_err = result.error_of("xi")
    for i, delta in enumerate(result.delta_grid):
        table.add_row(
            float(delta),
            float(result.t_bottom[i]),
            float(result.t_top[i]),
            float(result.xi[i]),
            float(p2_err[i]),
            float(p4_err[i]),
            float(xi_err[i]),
        )
    return table


def _peak_line(label: str, result: Spectrum) -> str:
    index = int(result.t_top.argmax())
    return (
        f"{label}: max P4 = {float(result.t_top[index]):.4f} "
        f"at delta = {float(result.delta_grid[index]):.2f} Gamma0"
    )


def run_ddi_curve(
    config: SimulationConfig, sigma_fraction: float, n_realizations: int
) -> CommandOutput:
    """J(L) for periodic and disordered pairs."""
    units = config.unit_system()
    grid = config.ddi_l_grid()
    spec = config.disorder_spec(mu_nm=float(grid[0]), sigma_fraction=sigma_fraction)
    curve = mean_ddi_curve(spec, grid, n_realizations, units, config.theta_dipole)

    table = ResultTable(
        name="ddi_curve",
        columns=["L_nm", "kL_over_pi", "J_periodic", "J_disordered_mean", "J_stderr"],
        metadata=_metadata(
            config, "ddi_curve", n_realizations=n_realizations, sigma_over_mu=sigma_fraction
        ),
        plot_columns=["J_periodic", "J_disordered_mean"],
    )
    for i, l_nm in enumerate(grid):
        table.add_row(
            float(l_nm),
            2.0 * float(l_nm) / units.lambda_e_nm,
            ddi_at_distance(float(l_nm), units, config.theta_dipole),
            float(curve.mean[i]),
            float(curve.stderr[i]),
        )
    return CommandOutput(tables=[table])


def run_spectrum(
    config: SimulationConfig,
    n_values: Sequence[int],
    periodic: bool,
    disordered: bool,
    n_realizations: int,
) -> CommandOutput:
    """Port-2/Port-4 spectra per chain length."""
    template = config.scatter_template()
    grid = config.delta_grid()
    output = CommandOutput()
    for n in n_values:
        if periodic:
            result = spectrum(template.bind(config.periodic_chain(n)), grid)
            output.tables.append(
                _spectrum_table(f"spectrum_periodic_N{n}", result, config, n=n, n_realizations=1)
            )
            output.summary.append(_peak_line(f"N={n} periodic", result))
        if disordered:
            stats = run_ensemble(
                config.disorder_spec(),
                template,
                n,
                grid,
                n_realizations,
                config.n_jobs,
                config.backend,
            )
            result = stats.to_spectrum({"n": n})
            output.tables.append(
                _spectrum_table(
                    f"spectrum_disordered_N{n}",
                    result,
                    config,
                    n=n,
                    n_realizations=n_realizations,
                    sigma_over_mu=config.sigma_fraction,
                )
            )
            output.summary.append(_peak_line(f"N={n} disordered", result))
    return output


def _pmax_table(name: str, config: SimulationConfig, **extra: Any) -> ResultTable:
    return ResultTable(
        name=name,
        columns=["N", "p_max", "delta_max", "boundary_flag"],
        metadata=_metadata(config, "pmax", **extra),
        plot_columns=["p_max"],
    )


def run_pmax(
    config: SimulationConfig, n_max: int, disordered: bool, n_realizations: int
) -> CommandOutput:
    """P_max(N) and Δ_max(N) for N = 1..n_max."""
    template = config.scatter_template()
    n_values = list(range(1, n_max + 1))
    output = CommandOutput()

    table = _pmax_table("pmax_periodic", config, n_realizations=1)
    for result in pmax_scan(
        n_values,
        template,
        config.lattice_spacing_nm,
        (config.delta_min, config.delta_max),
        config.delta_step,
    ):
        table.add_row(result.n, result.p_max, result.delta_max, result.boundary_flag)
        output.summary.append(
            f"N={result.n}: P_max = {result.p_max:.4f} at delta = {result.delta_max:.3f}"
        )
    output.tables.append(table)

    if disordered:
        table = _pmax_table(
            "pmax_disordered",
            config,
            n_realizations=n_realizations,
            sigma_over_mu=config.sigma_fraction,
        )
        grid = config.delta_grid()
        for n in n_values:
            result = mean_pmax(
                config.disorder_spec(),
                template,
                n,
                grid,
                n_realizations,
                config.n_jobs,
                config.backend,
            )
            table.add_row(result.n, result.p_max, result.delta_max, result.boundary_flag)
        output.tables.append(table)
    return output


def run_efficiency_map(
    config: SimulationConfig, n: int, disordered: bool, n_realizations: int
) -> CommandOutput:
    """ξ_N over the (Δ, L/λ_e) grid in long format."""
    template = config.scatter_template()
    result = efficiency_map(
        n,
        config.map_l_grid(),
        config.map_delta_grid(),
        template,
        disorder=config.disorder_spec() if disordered else None,
        n_realizations=n_realizations,
        n_jobs=config.n_jobs,
        backend=config.backend,
    )
    kind = "disordered" if disordered else "periodic"
    table = ResultTable(
        name=f"efficiency_map_{kind}_N{n}",
        columns=["delta", "L_over_lambda", "xi_mean", "xi_stderr"],
        metadata=_metadata(
            config,
            "efficiency_map",
            n=n,
            n_realizations=result.n_realizations,
            undefined_points=result.undefined_count,
        ),
    )
    for row, l_ratio in enumerate(result.l_over_lambda):
        for col, delta in enumerate(result.delta_grid):
            table.add_row(
                float(delta),
                float(l_ratio),
                float(result.xi_mean[row, col]),
                float(result.xi_stderr[row, col]),
            )
    output = CommandOutput(tables=[table])
    if result.undefined_count:
        output.summary.append(
            f"warning: routing efficiency undefined at {result.undefined_count} points"
        )
    return output


def run_localization(
    config: SimulationConfig,
    n_values: Sequence[int],
    sigma_values: Sequence[float],
    n_realizations: int,
    conventional: bool,
) -> CommandOutput:
    """Localization length versus disorder strength per chain length."""
    points = localization_sweep(
        config.disorder_spec(),
        config.scatter_template(),
        sigma_values,
        n_values,
        n_realizations,
        DEFAULT_DELTA_PER_N,
        config.n_jobs,
        config.backend,
    )
    columns = ["N", "sigma_over_mu", "delta", "mean_T_top", "T_top_stderr", "L", "L_error"]
    if conventional:
        columns.extend(["L_conventional", "L_conventional_error"])
    table = ResultTable(
        name="localization",
        columns=columns,
        metadata=_metadata(config, "localization", n_realizations=n_realizations),
    )
    for p in points:
        row = [
            p.n, p.sigma_fraction, p.delta, p.mean_t_top, p.t_top_stderr, p.length, p.length_error
        ]
        if conventional:
            row.extend([p.conventional_length, p.conventional_length_error])
        table.add_row(*row)
    return CommandOutput(tables=[table])


def run_validate(config: SimulationConfig, cases: int) -> CommandOutput:
    """Property suites against the production solver."""
    report = run_validation(seed=config.master_seed, cases=cases)
    table = ResultTable(
        name="validation",
        columns=["suite", "cases", "failures", "max_error", "tolerance", "passed"],
        metadata=_metadata(config, "validation"),
    )
    for suite in report.suites:
        table.add_row(
            suite.name, suite.cases, suite.failures, suite.max_error, suite.tolerance, suite.passed
        )
    return CommandOutput(
        tables=[table],
        documents={"validation": report.to_dict()},
        summary=report.format_text().splitlines(),
        failure=None if report.passed else "one or more validation suites failed",
    )


_COMMANDS: Dict[str, Callable[..., CommandOutput]] = {
    "ddi-curve": run_ddi_curve,
    "spectrum": run_spectrum,
    "pmax": run_pmax,
    "efficiency-map": run_efficiency_map,
    "localization": run_localization,
    "validate": run_validate,
}


def execute(run: RunContext, command: str, arguments: Dict[str, Any]) -> RunManifest:
    """Run one subcommand, write its outputs and manifest.

    Raises:
        ValidationFailure: If the command reports a failed property.
    """
    config = run.config
    output_dir = Path(config.output_dir)
    _setup_file_logging(str(output_dir), getattr(logging, config.log_level.upper()))
    logger.info(f"Starting {command} with {arguments}")

    started = time.perf_counter()
    profiler = RunProfiler() if run.profile else None
    if profiler is not None:
        profiler.start()
    try:
        result = _COMMANDS[command](config, **arguments)
    finally:
        if profiler is not None and profiler.is_running:
            profiler.stop()
    duration = time.perf_counter() - started

    outputs: List[str] = []
    for table in result.tables:
        outputs.append(get_writer("csv").write(table, output_dir).name)
        if run.plot and table.plot_columns:
            outputs.append(get_writer("svg", title=table.name).write(table, output_dir).name)
    json_writer = cast(JsonWriter, get_writer("json"))
    for name, document in result.documents.items():
        outputs.append(json_writer.write_document(name, document, output_dir).name)
    if profiler is not None:
        outputs.append(profiler.write_html(output_dir / PROFILE_NAME).name)

    manifest = RunManifest(
        command=command,
        arguments=arguments,
        config=config.to_dict(),
        master_seed=config.master_seed,
        outputs=outputs,
        version=__version__,
        duration_seconds=duration,
    )
    json_writer.write_document(MANIFEST_NAME, manifest.to_dict(), output_dir)
    logger.info(f"Finished {command} in {duration:.2f}s; wrote {len(outputs)} files")

    for line in result.summary:
        click.echo(line)
    for name in outputs:
        click.echo(f"wrote {output_dir / name}")

    if result.failure:
        raise ValidationFailure(result.failure)
    return manifest


def _realizations(run: RunContext, value: Optional[int]) -> int:
    return run.config.n_realizations if value is None else value


@click.group()
@click.version_option(__version__, prog_name="wqed-ladder")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="TOML or JSON configuration file (defaults: WQED_* environment variables).",
)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed.")
@click.option("--threads", type=int, default=None, help="Parallel workers (-1: all cores).")
@click.option(
    "--backend",
    type=click.Choice(["loky", "threading", "multiprocessing", "sequential"]),
    default=None,
)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
)
@click.option("--profile", is_flag=True, help="Write a pyinstrument profile.html.")
@click.option("--plot", is_flag=True, help="Also render SVG plots (needs matplotlib).")
@click.pass_context
def cli(
    ctx: click.Context,
    config_path: Optional[str],
    output_dir: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
    backend: Optional[str],
    log_level: Optional[str],
    profile: bool,
    plot: bool,
) -> None:
    """Single-photon routing in a chiral two-waveguide emitter ladder."""
    base = SimulationConfig.from_file(config_path) if config_path else SimulationConfig.from_env()
    # Parallelism and output flags also apply to ``rerun``; the seed does not.
    overrides = {
        "output_dir": output_dir,
        "n_jobs": threads,
        "backend": backend,
        "log_level": log_level.upper() if log_level else None,
    }
    config = base.merge(master_seed=seed, **overrides)
    ctx.obj = RunContext(config=config, profile=profile, plot=plot, overrides=overrides)


@cli.command("ddi-curve")
@click.option(
    "--sigma", type=click.FloatRange(min=0.0), default=None, help="σ/μ of the disordered curve."
)
@click.option("--realizations", type=click.IntRange(min=1), default=None)
@click.pass_obj
def ddi_curve_command(
    run: RunContext, sigma: Optional[float], realizations: Optional[int]
) -> None:
    """Dipole-dipole coupling J versus separation."""
    execute(
        run,
        "ddi-curve",
        {
            "sigma_fraction": run.config.ddi_sigma_fraction if sigma is None else sigma,
            "n_realizations": _realizations(run, realizations),
        },
    )


@cli.command("spectrum")
@click.option(
    "--n", "n_values", type=click.IntRange(min=1), multiple=True, help="Chain length (repeatable)."
)
@click.option("--periodic/--no-periodic", default=True)
@click.option("--disordered/--no-disordered", default=False)
@click.option("--realizations", type=click.IntRange(min=1), default=None)
@click.pass_obj
def spectrum_command(
    run: RunContext,
    n_values: Sequence[int],
    periodic: bool,
    disordered: bool,
    realizations: Optional[int],
) -> None:
    """Port-2 and Port-4 detection probability versus detuning."""
    if not (periodic or disordered):
        raise click.UsageError("nothing to compute: enable --periodic or --disordered")
    execute(
        run,
        "spectrum",
        {
            "n_values": list(n_values) or list(run.config.n_values),
            "periodic": periodic,
            "disordered": disordered,
            "n_realizations": _realizations(run, realizations),
        },
    )


@cli.command("pmax")
@click.option("--n-max", type=click.IntRange(min=1), default=None)
@click.option("--disordered/--no-disordered", default=False)
@click.option("--realizations", type=click.IntRange(min=1), default=None)
@click.pass_obj
def pmax_command(
    run: RunContext, n_max: Optional[int], disordered: bool, realizations: Optional[int]
) -> None:
    """Maximum Port-4 probability versus chain length."""
    execute(
        run,
        "pmax",
        {
            "n_max": run.config.pmax_n_max if n_max is None else n_max,
            "disordered": disordered,
            "n_realizations": _realizations(run, realizations),
        },
    )


@cli.command("efficiency-map")
@click.option("--n", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--disordered/--no-disordered", default=False)
@click.option("--realizations", type=click.IntRange(min=1), default=None)
@click.pass_obj
def efficiency_map_command(
    run: RunContext, n: int, disordered: bool, realizations: Optional[int]
) -> None:
    """Routing efficiency over detuning and mean separation."""
    execute(
        run,
        "efficiency-map",
        {"n": n, "disordered": disordered, "n_realizations": _realizations(run, realizations)},
    )


@cli.command("localization")
@click.option("--n", "n_values", type=click.IntRange(min=1), multiple=True)
@click.option("--sigma", "sigma_values", type=click.FloatRange(0.0, 0.25), multiple=True)
@click.option("--realizations", type=click.IntRange(min=1), default=None)
@click.option("--conventional", is_flag=True, help="Add the -2N/<ln T> estimator column.")
@click.pass_obj
def localization_command(
    run: RunContext,
    n_values: Sequence[int],
    sigma_values: Sequence[float],
    realizations: Optional[int],
    conventional: bool,
) -> None:
    """Localization length versus disorder strength."""
    execute(
        run,
        "localization",
        {
            "n_values": list(n_values) or list(run.config.n_values),
            "sigma_values": list(sigma_values) or list(run.config.sigma_grid),
            "n_realizations": _realizations(run, realizations),
            "conventional": conventional,
        },
    )


@cli.command("validate")
@click.option("--cases", type=click.IntRange(min=1), default=200, show_default=True)
@click.pass_obj
def validate_command(run: RunContext, cases: int) -> None:
    """Run the solver property suites; exit 3 if any fails."""
    execute(run, "validate", {"cases": cases})


@cli.command("rerun")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def rerun_command(run: RunContext, manifest_path: str) -> None:
    """Replay the run recorded in MANIFEST_PATH."""
    try:
        data = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    except ValueError as e:
        raise ConfigurationError(f"Malformed manifest {manifest_path}", cause=e) from e
    manifest = RunManifest.from_dict(data)
    if manifest.command not in _COMMANDS:
        raise ConfigurationError(f"Manifest names unknown command {manifest.command!r}")
    config = SimulationConfig.from_dict(manifest.config).merge(**run.overrides)
    replay = RunContext(config=config, profile=run.profile, plot=run.plot)
    execute(replay, manifest.command, manifest.arguments)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Invoke the command line and map failures to exit codes."""
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="wqed-ladder",
            standalone_mode=False,
        )
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except (ConfigurationError, DomainError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    except ValidationFailure as e:
        click.echo(f"Validation failed: {e}", err=True)
        return EXIT_VALIDATION
    except (NumericalError, SamplingError, EnsembleError, UndefinedEfficiencyError) as e:
        click.echo(f"Numerical failure: {e}", err=True)
        return EXIT_NUMERICAL
    except WaveguideRoutingError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_NUMERICAL
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    """Console script entry point."""
    sys.exit(run_cli())
