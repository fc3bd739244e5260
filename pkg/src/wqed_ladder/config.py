"""Configuration management for wqed-ladder.

This module provides the SimulationConfig dataclass holding every
default of the simulator, and the factories turning it into domain
objects.
"""

import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .disorder import DisorderSpec
from .exceptions import ConfigurationError
from .observables import scan_grid
from .params import (
    ChiralityMode,
    EmitterChain,
    EmitterParams,
    UnitSystem,
    build_periodic_chain,
)
from .scatter import ScatterTemplate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def _csv_ints(value: str) -> List[int]:
    return [int(v) for v in value.split(",") if v.strip()]


def _csv_floats(value: str) -> List[float]:
    return [float(v) for v in value.split(",") if v.strip()]


# Environment variable -> (field name, parser)
_ENV_FIELDS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "WQED_GAMMA0_HZ": ("gamma0_hz", float),
    "WQED_LAMBDA_NM": ("lambda_e_nm", float),
    "WQED_GAMMA": ("gamma", float),
    "WQED_BIG_GAMMA_BOTTOM": ("big_gamma_bottom", float),
    "WQED_BIG_GAMMA_TOP": ("big_gamma_top", float),
    "WQED_THETA_DIPOLE": ("theta_dipole", float),
    "WQED_LEFT_RIGHT_RATIO": ("left_right_ratio", float),
    "WQED_MODE": ("mode", str),
    "WQED_PHASE_SCALE": ("phase_scale", float),
    "WQED_SPACING_NM": ("spacing_nm", float),
    "WQED_SIGMA_FRACTION": ("sigma_fraction", float),
    "WQED_SEED": ("master_seed", int),
    "WQED_REALIZATIONS": ("n_realizations", int),
    "WQED_N_VALUES": ("n_values", _csv_ints),
    "WQED_SIGMA_GRID": ("sigma_grid", _csv_floats),
    "WQED_THREADS": ("n_jobs", int),
    "WQED_BACKEND": ("backend", str),
    "WQED_OUTPUT_DIR": ("output_dir", str),
    "WQED_LOG_LEVEL": ("log_level", str),
}

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class SimulationConfig:
    """Global simulation configuration.

    Rates are in units of Γ0, lengths in nm unless stated otherwise.

    Attributes:
        gamma0_hz: Free-space decay rate Γ0 in Hz. Default: 7.5e6
        lambda_e_nm: Emitter wavelength λ_e. Default: 655.0
        gamma: Non-waveguide decay γ. Default: 6.86
        big_gamma_bottom: Bottom-guide coupling Γ. Default: 11.03
        big_gamma_top: Top-guide coupling Γ. Default: 11.03
        theta_dipole: Dipole angle θ in radians. Default: π/2
        left_right_ratio: Γ_L/Γ_R in bidirectional mode. Default: 1.0
        mode: "chiral" or "bidirectional". Default: "chiral"
        v_bottom: Bottom group velocity relative to c. Default: 1.0
        v_top: Top group velocity relative to c. Default: 1.0
        phase_scale: Multiplier on every propagation phase. Default: 1.0
        spacing_nm: Periodic lattice constant; None means λ_e/20.
        sigma_fraction: Disorder σ/μ for spectra and P_max. Default: 0.1
        min_separation_fraction: Sampling guard as a fraction of μ. Default: 0.001
        master_seed: Root seed of every ensemble. Default: 20240601
        n_realizations: Disorder realizations per ensemble. Default: 1000
        n_values: Chain lengths for spectra and localization. Default: [2, 5, 10, 20]
        delta_min, delta_max, delta_step: Spectrum and P_max detuning grid.
            Default: -300, 300, 0.1
        ddi_l_min_nm, ddi_l_max_nm, ddi_l_step_nm: J(L) grid. Default: 10, 160, 0.25
        ddi_sigma_fraction: Disorder of the J(L) curve. Default: 0.2
        map_delta_min, map_delta_max, map_delta_step: Efficiency map detunings.
            Default: -200, 200, 1.0
        map_l_min, map_l_max, map_l_step: Efficiency map separations in λ_e.
            Default: 0.01, 0.23, 0.0025
        pmax_n_max: Longest chain of the P_max scan. Default: 20
        sigma_grid: Disorder strengths of the localization sweep.
        n_jobs: joblib workers, -1 for all cores. Default: -1
        backend: joblib backend. Default: "loky"
        output_dir: Directory for results, manifests and logs. Default: "results"
        log_level: Log level name. Default: "INFO"
    """

    gamma0_hz: float = 7.5e6
    lambda_e_nm: float = 655.0
    gamma: float = 6.86
    big_gamma_bottom: float = 11.03
    big_gamma_top: float = 11.03
    theta_dipole: float = math.pi / 2
    left_right_ratio: float = 1.0
    mode: str = "chiral"
    v_bottom: float = 1.0
    v_top: float = 1.0
    phase_scale: float = 1.0
    spacing_nm: Optional[float] = None
    sigma_fraction: float = 0.1
    min_separation_fraction: float = 0.001
    master_seed: int = 20240601
    n_realizations: int = 1000
    n_values: List[int] = field(default_factory=lambda: [2, 5, 10, 20])
    delta_min: float = -300.0
    delta_max: float = 300.0
    delta_step: float = 0.1
    ddi_l_min_nm: float = 10.0
    ddi_l_max_nm: float = 160.0
    ddi_l_step_nm: float = 0.25
    ddi_sigma_fraction: float = 0.2
    map_delta_min: float = -200.0
    map_delta_max: float = 200.0
    map_delta_step: float = 1.0
    map_l_min: float = 0.01
    map_l_max: float = 0.23
    map_l_step: float = 0.0025
    pmax_n_max: int = 20
    sigma_grid: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.15, 0.2, 0.25])
    n_jobs: int = -1
    backend: str = "loky"
    output_dir: str = "results"
    log_level: str = "INFO"

    def __post_init__(self) -> None:
        """Validate configuration after initialization."""
        self._validate()

    def _validate(self) -> None:
        """Validate all configuration values.

        Raises:
            ConfigurationError: If any configuration value is invalid.
        """
        for name in ("gamma0_hz", "lambda_e_nm", "v_bottom", "v_top"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")

        for name in ("gamma", "big_gamma_bottom", "big_gamma_top", "left_right_ratio"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(
                    f"{name} must be non-negative, got {getattr(self, name)}"
                )

        if not 0.0 <= self.theta_dipole <= math.pi:
            raise ConfigurationError(f"theta_dipole must lie in [0, pi], got {self.theta_dipole}")

        if self.mode not in {m.value for m in ChiralityMode}:
            raise ConfigurationError(
                f"mode must be 'chiral' or 'bidirectional', got {self.mode!r}"
            )

        if self.spacing_nm is not None and not self.spacing_nm > 0:
            raise ConfigurationError(f"spacing_nm must be positive, got {self.spacing_nm}")

        if not self.sigma_fraction >= 0 or not self.ddi_sigma_fraction >= 0:
            raise ConfigurationError("sigma fractions must be non-negative")

        if not 0 < self.min_separation_fraction < 1:
            raise ConfigurationError(
                f"min_separation_fraction must lie in (0, 1), got {self.min_separation_fraction}"
            )

        if self.master_seed < 0:
            raise ConfigurationError(f"master_seed must be non-negative, got {self.master_seed}")

        if self.n_realizations < 1:
            raise ConfigurationError(
                f"n_realizations must be at least 1, got {self.n_realizations}"
            )

        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigurationError(f"n_values must be positive integers, got {self.n_values}")

        if self.pmax_n_max < 1:
            raise ConfigurationError(f"pmax_n_max must be at least 1, got {self.pmax_n_max}")

        for low, high, step in (
            ("delta_min", "delta_max", "delta_step"),
            ("ddi_l_min_nm", "ddi_l_max_nm", "ddi_l_step_nm"),
            ("map_delta_min", "map_delta_max", "map_delta_step"),
            ("map_l_min", "map_l_max", "map_l_step"),
        ):
            if not getattr(self, high) > getattr(self, low):
                raise ConfigurationError(f"{high} must exceed {low}")
            if not getattr(self, step) > 0:
                raise ConfigurationError(f"{step} must be positive, got {getattr(self, step)}")

        if self.ddi_l_min_nm <= 0 or self.map_l_min <= 0:
            raise ConfigurationError("separation grids must start above zero")

        if self.n_jobs == 0:
            raise ConfigurationError("n_jobs must be non-zero")

        if self.log_level.upper() not in _LOG_LEVELS:
            raise ConfigurationError(f"Invalid log_level: {self.log_level}")

    @classmethod
    def from_env(cls) -> "SimulationConfig":
        """Create configuration from ``WQED_*`` environment variables.

        Environment variable mappings:
            WQED_SEED -> master_seed, WQED_REALIZATIONS -> n_realizations,
            WQED_THREADS -> n_jobs, WQED_N_VALUES -> n_values (comma-separated),
            WQED_SIGMA_GRID -> sigma_grid (comma-separated), and
            WQED_<FIELD> for the physical parameters (see ``_ENV_FIELDS``).

        Raises:
            ConfigurationError: If environment values are invalid.
        """
        kwargs: Dict[str, Any] = {}
        for variable, (name, parse) in _ENV_FIELDS.items():
            if raw := os.environ.get(variable):
                try:
                    kwargs[name] = parse(raw)
                except ValueError as e:
                    raise ConfigurationError(f"Invalid {variable} value: {raw}") from e
        return cls(**kwargs)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulationConfig":
        """Create configuration from a dictionary.

        Unknown keys are ignored. Nested tables (e.g. ``[disorder]`` in a
        TOML file) are flattened one level.

        Raises:
            ConfigurationError: If dictionary values are invalid.
        """
        valid_fields = {f.name for f in fields(cls)}
        flat: Dict[str, Any] = {}
        for key, value in data.items():
            if isinstance(value, dict) and key not in valid_fields:
                flat.update(value)
            else:
                flat[key] = value

        kwargs = {k: v for k, v in flat.items() if k in valid_fields}
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e

    @classmethod
    def from_file(cls, path: str) -> "SimulationConfig":
        """Load a TOML (``.toml``) or JSON (``.json``) configuration file.

        Raises:
            ConfigurationError: If the file is unreadable or malformed.
        """
        file_path = Path(path)
        try:
            if file_path.suffix == ".toml":
                with file_path.open("rb") as f:
                    data = tomllib.load(f)
            elif file_path.suffix == ".json":
                data = json.loads(file_path.read_text(encoding="utf-8"))
            else:
                raise ConfigurationError(
                    f"Unsupported config format {file_path.suffix!r}; use .toml or .json"
                )
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file {path}", cause=e) from e
        except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Malformed config file {path}", cause=e) from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a table/object")
        return cls.from_dict(data)

    def merge(self, **kwargs: Any) -> "SimulationConfig":
        """Create a new config with some values overridden.

        ``None`` values are skipped so unset command-line flags keep the
        file or default value.

        Raises:
            ConfigurationError: On unknown keys or invalid values.
        """
        valid_fields = {f.name for f in fields(self)}
        unknown = set(kwargs) - valid_fields
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {sorted(unknown)}")
        overrides = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def lattice_spacing_nm(self) -> float:
        """Periodic spacing; λ_e/20 unless set explicitly."""
        return self.spacing_nm if self.spacing_nm is not None else self.lambda_e_nm / 20.0

    def unit_system(self) -> UnitSystem:
        return UnitSystem(gamma0_hz=self.gamma0_hz, lambda_e_nm=self.lambda_e_nm)

    def emitter_params(self) -> EmitterParams:
        return EmitterParams(
            gamma=self.gamma,
            big_gamma_bottom=self.big_gamma_bottom,
            big_gamma_top=self.big_gamma_top,
            theta_dipole=self.theta_dipole,
            left_right_ratio=self.left_right_ratio,
        )

    def chirality(self) -> ChiralityMode:
        return ChiralityMode(self.mode)

    def scatter_template(self) -> ScatterTemplate:
        return ScatterTemplate(
            params=self.emitter_params(),
            units=self.unit_system(),
            mode=self.chirality(),
            v_bottom=self.v_bottom,
            v_top=self.v_top,
            phase_scale=self.phase_scale,
        )

    def disorder_spec(
        self,
        mu_nm: Optional[float] = None,
        sigma_fraction: Optional[float] = None,
    ) -> DisorderSpec:
        """Disorder around ``mu_nm`` (default: the lattice spacing)."""
        mu = self.lattice_spacing_nm if mu_nm is None else mu_nm
        return DisorderSpec(
            mu_nm=mu,
            sigma_fraction=self.sigma_fraction if sigma_fraction is None else sigma_fraction,
            min_separation_nm=self.min_separation_fraction * mu,
            master_seed=self.master_seed,
        )

    def delta_grid(self) -> np.ndarray:
        return scan_grid((self.delta_min, self.delta_max), self.delta_step)

    def map_delta_grid(self) -> np.ndarray:
        return scan_grid((self.map_delta_min, self.map_delta_max), self.map_delta_step)

    def map_l_grid(self) -> np.ndarray:
        return scan_grid((self.map_l_min, self.map_l_max), self.map_l_step)

    def ddi_l_grid(self) -> np.ndarray:
        return scan_grid((self.ddi_l_min_nm, self.ddi_l_max_nm), self.ddi_l_step_nm)

    def periodic_chain(self, n: int, spacing_nm: Optional[float] = None) -> EmitterChain:
        spacing = self.lattice_spacing_nm if spacing_nm is None else spacing_nm
        return build_periodic_chain(n, spacing, self.emitter_params())
