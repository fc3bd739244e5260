"""wQED ladder - single-photon routing through chirally coupled emitter chains.

This package simulates a single photon entering the bottom of two parallel
waveguides that share a chain of quantum emitters. It solves the transport
equations with dipole-dipole interaction and Gaussian position disorder,
and derives port spectra, routing efficiency, peak scans and localization
lengths.

Quick Start:
    from wqed_ladder import SimulationConfig, solve_transport

    config = SimulationConfig()
    problem = config.scatter_template().bind(config.periodic_chain(2), delta=25.3)
    solution = solve_transport(problem)
    print(solution.probabilities.t_top)

Disorder averaging:
    from wqed_ladder import SimulationConfig, run_ensemble

    config = SimulationConfig(sigma_fraction=0.1)
    stats = run_ensemble(
        config.disorder_spec(),
        config.scatter_template(),
        n=10,
        delta_grid=config.delta_grid(),
        n_realizations=1000,
        n_jobs=-1,
    )

Command line:
    wqed-ladder --output-dir results spectrum --n 2 --n 5
    wqed-ladder validate
"""

__version__ = "1.0.0"

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

from .closedform import (
    TwoEmitterParams,
    t_b2_closed,
    t_single_closed,
    t_t2_closed,
    xi2_closed,
    xi2_probability_closed,
)
from .config import SimulationConfig
from .ddi import DdiMatrix, ddi_at_distance, ddi_coupling, ddi_matrix
from .disorder import DisorderSpec, mean_ddi_curve, sample_chain
from .ensemble import efficiency_map, localization_sweep, mean_pmax, run_ensemble
from .exceptions import (
    ConfigurationError,
    DomainError,
    EnsembleError,
    NumericalError,
    PoleError,
    SamplingError,
    SingularSystemError,
    UndefinedEfficiencyError,
    ValidationFailure,
    WaveguideRoutingError,
)
from .models import EnsembleStats, LocalizationPoint, PmaxResult, RunManifest, Spectrum
from .observables import (
    localization_length,
    pmax_scan,
    routing_efficiency,
    spectrum,
)
from .params import (
    ChiralityMode,
    EmitterChain,
    EmitterParams,
    UnitSystem,
    build_periodic_chain,
)
from .scatter import (
    ScatterProblem,
    ScatterTemplate,
    TransportSolution,
    field_profile,
    solve_spectrum,
    solve_transport,
)
from .validation import run_validation

logger = logging.getLogger(__name__)

LOG_FILE_NAME = "wqed-ladder.log"

# Track if file logging has been set up
_file_handler_initialized = False


def _setup_file_logging(log_path: str, log_level: int = logging.INFO) -> None:
    """Set up file logging for the wqed_ladder package.

    Creates a rotating log file in the specified directory. Only the first
    call installs a handler; failures are logged and never raised.

    Args:
        log_path: Directory path for log files.
        log_level: Logging level (default: INFO).
    """
    global _file_handler_initialized

    if _file_handler_initialized:
        return

    try:
        log_dir = Path(log_path)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / LOG_FILE_NAME

        # 10MB per file, keep 5 backups
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8",
        )
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(log_level)

        package_logger = logging.getLogger("wqed_ladder")
        package_logger.addHandler(file_handler)
        if package_logger.level == logging.NOTSET or package_logger.level > log_level:
            package_logger.setLevel(log_level)

        _file_handler_initialized = True
        logger.info(f"File logging initialized: {log_file}")

    except Exception as e:
        logger.warning(f"Failed to set up file logging: {e}")


__all__ = [
    # Version
    "__version__",
    # Configuration
    "SimulationConfig",
    # Geometry and parameters
    "UnitSystem",
    "EmitterParams",
    "EmitterChain",
    "ChiralityMode",
    "build_periodic_chain",
    # Dipole-dipole interaction
    "ddi_coupling",
    "ddi_at_distance",
    "ddi_matrix",
    "DdiMatrix",
    # Disorder
    "DisorderSpec",
    "sample_chain",
    "mean_ddi_curve",
    # Transport
    "ScatterProblem",
    "ScatterTemplate",
    "TransportSolution",
    "solve_transport",
    "solve_spectrum",
    "field_profile",
    # Closed forms
    "TwoEmitterParams",
    "t_b2_closed",
    "t_t2_closed",
    "xi2_closed",
    "xi2_probability_closed",
    "t_single_closed",
    # Observables
    "routing_efficiency",
    "spectrum",
    "pmax_scan",
    "localization_length",
    # Ensembles
    "run_ensemble",
    "mean_pmax",
    "efficiency_map",
    "localization_sweep",
    # Models
    "Spectrum",
    "PmaxResult",
    "EnsembleStats",
    "LocalizationPoint",
    "RunManifest",
    # Validation
    "run_validation",
    # Exceptions
    "WaveguideRoutingError",
    "ConfigurationError",
    "DomainError",
    "NumericalError",
    "SingularSystemError",
    "PoleError",
    "SamplingError",
    "UndefinedEfficiencyError",
    "EnsembleError",
    "ValidationFailure",
]
