"""Result records for wqed-ladder.

This module defines the data structures produced by the observables and
ensemble layers and consumed by the writers and the command line,
including Spectrum, PmaxResult, EnsembleStats, LocalizationPoint,
ResultTable and RunManifest.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .exceptions import ConfigurationError, DomainError

MANIFEST_SCHEMA = "wqed-ladder/manifest/v1"


@dataclass(frozen=True)
class Spectrum:
    """Port detection probabilities and routing efficiency over a Δ grid.

    Attributes:
        delta_grid: Strictly increasing detunings (Γ0).
        t_top: Port 4 probability per detuning.
        t_bottom: Port 2 probability per detuning.
        r_top: Port 3 probability per detuning.
        r_bottom: Port 1 probability per detuning.
        xi: Routing efficiency per detuning (NaN where undefined).
        stderr: Standard errors keyed by observable name. Empty for a
            single deterministic chain.
        metadata: Run description (n, mode, disorder, n_realizations).
    """

    delta_grid: np.ndarray
    t_top: np.ndarray
    t_bottom: np.ndarray
    r_top: np.ndarray
    r_bottom: np.ndarray
    xi: np.ndarray
    stderr: Dict[str, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = np.asarray(self.delta_grid, dtype=float)
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise DomainError("spectrum detuning grid must be strictly increasing")
        for name in ("t_top", "t_bottom", "r_top", "r_bottom", "xi"):
            if np.shape(getattr(self, name)) != grid.shape:
                raise DomainError(f"{name} does not match the detuning grid")

    @property
    def loss(self) -> np.ndarray:
        return 1.0 - (self.t_top + self.t_bottom + self.r_top + self.r_bottom)

    def error_of(self, name: str) -> np.ndarray:
        """Standard error of one observable, zeros for deterministic spectra."""
        if name in self.stderr:
            return self.stderr[name]
        return np.zeros_like(np.asarray(self.delta_grid, dtype=float))


@dataclass(frozen=True)
class PmaxResult:
    """Maximum Port-4 probability of one chain length.

    Attributes:
        n: Number of emitters.
        p_max: Maximum Port-4 detection probability.
        delta_max: Detuning of the maximum (Γ0).
        boundary_flag: True if the maximum sits on the scanned range edge.
    """

    n: int
    p_max: float
    delta_max: float
    boundary_flag: bool = False

    def __post_init__(self) -> None:
        if not -1e-12 <= self.p_max <= 1.0 + 1e-12:
            raise DomainError(f"p_max must lie in [0, 1], got {self.p_max}")


@dataclass(frozen=True)
class EnsembleStats:
    """Per-grid-point disorder averages.

    Attributes:
        delta_grid: Detunings the ensemble was solved on.
        mean: Mean per observable.
        stderr: Standard error per observable (NaN for one realization).
        n_realizations: Number of realizations averaged.
        master_seed: Seed every realization was derived from.
    """

    delta_grid: np.ndarray
    mean: Dict[str, np.ndarray]
    stderr: Dict[str, np.ndarray]
    n_realizations: int
    master_seed: int

    def to_spectrum(self, metadata: Optional[Dict[str, Any]] = None) -> Spectrum:
        """View the averaged port probabilities as a Spectrum."""
        info = {"n_realizations": self.n_realizations, "master_seed": self.master_seed}
        info.update(metadata or {})
        return Spectrum(
            delta_grid=self.delta_grid,
            t_top=self.mean["t_top"],
            t_bottom=self.mean["t_bottom"],
            r_top=self.mean["r_top"],
            r_bottom=self.mean["r_bottom"],
            xi=self.mean["xi"],
            stderr=dict(self.stderr),
            metadata=info,
        )


@dataclass(frozen=True)
class LocalizationPoint:
    """Localization length of one (N, σ) pair.

    Attributes:
        n: Number of emitters.
        sigma_fraction: Disorder strength σ/μ.
        delta: Detuning the transmission was evaluated at (Γ0).
        mean_t_top: Disorder-averaged Port-4 probability.
        t_top_stderr: Standard error of ``mean_t_top``.
        length: N/⟨T_t⟩ (inf when ⟨T_t⟩ = 0).
        length_error: Propagated standard error of ``length``.
        conventional_length: -2N/⟨ln T_t⟩.
        conventional_length_error: Propagated standard error of
            ``conventional_length``.
    """

    n: int
    sigma_fraction: float
    delta: float
    mean_t_top: float
    t_top_stderr: float
    length: float
    length_error: float
    conventional_length: float
    conventional_length_error: float

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.length)


@dataclass
class ResultTable:
    """Column-oriented output handed to a writer.

    Attributes:
        name: Base file name without suffix (e.g. "ddi_curve").
        columns: Column headers.
        rows: Row tuples aligned with ``columns``.
        metadata: Header values such as schema, seed and realization count.
        plot_columns: Columns drawn against the first one by the SVG writer;
            None leaves the table out of plots.
    """

    name: str
    columns: List[str]
    rows: List[Sequence[Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    plot_columns: Optional[List[str]] = None

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise DomainError(
                f"row of {len(values)} values does not match {len(self.columns)} columns"
            )
        self.rows.append(values)

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


@dataclass
class RunManifest:
    """Everything needed to rerun one command bit-identically.

    Attributes:
        command: Subcommand name.
        arguments: Subcommand options as resolved at run time.
        config: Full resolved SimulationConfig as a dictionary.
        master_seed: Root seed of the run.
        outputs: Names of the files written.
        version: wqed-ladder version that produced the run.
        duration_seconds: Wall-clock time of the run.
        created_at: When the run finished.
        schema: Manifest format identifier.
    """

    command: str
    arguments: Dict[str, Any]
    config: Dict[str, Any]
    master_seed: int
    outputs: List[str] = field(default_factory=list)
    version: str = ""
    duration_seconds: float = 0.0
    created_at: datetime = field(default_factory=datetime.now)
    schema: str = MANIFEST_SCHEMA

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation.

        Returns:
            Dictionary with all manifest data.
        """
        return {
            "schema": self.schema,
            "command": self.command,
            "arguments": self.arguments,
            "config": self.config,
            "master_seed": self.master_seed,
            "outputs": list(self.outputs),
            "version": self.version,
            "duration_seconds": self.duration_seconds,
            "created_at": self.created_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        """Create from dictionary representation.

        Raises:
            ConfigurationError: If the schema is unknown or a key is missing.
        """
        schema = data.get("schema")
        if schema != MANIFEST_SCHEMA:
            raise ConfigurationError(f"unsupported manifest schema: {schema!r}")
        try:
            return cls(
                command=data["command"],
                arguments=dict(data["arguments"]),
                config=dict(data["config"]),
                master_seed=int(data["master_seed"]),
                outputs=list(data.get("outputs", [])),
                version=data.get("version", ""),
                duration_seconds=float(data.get("duration_seconds", 0.0)),
                created_at=datetime.fromisoformat(data["created_at"])
                if "created_at" in data
                else datetime.now(),
            )
        except KeyError as e:
            raise ConfigurationError(f"manifest is missing key {e}") from e
