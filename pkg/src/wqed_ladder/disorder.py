"""Gaussian position disorder with deterministic per-realization seeding.

Disorder is applied to successive separations: x_1 = 0 and
x_j = x_{j-1} + d_j with d_j ~ Normal(μ, (σ_fraction·μ)²), redrawn while
d_j < min_separation_nm.

Seed derivation (frozen, golden files depend on it): realization ``r`` of
stream ``s`` draws from ``numpy.random.default_rng(SeedSequence(master_seed,
spawn_key=(s, r)))``. Stream 0 is used for chains, stream 1 for the
two-emitter J(L) curve (``r`` is then the grid index).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .ddi import ddi_at_distance
from .exceptions import DomainError, SamplingError
from .params import (
    EmitterChain,
    EmitterParams,
    UnitSystem,
    build_periodic_chain,
    chain_from_separations,
)

logger = logging.getLogger(__name__)

CHAIN_STREAM = 0
DDI_CURVE_STREAM = 1

# Rejection rounds allowed before a spec is declared pathological.
MAX_REJECTED_DRAWS = 1_000_000


@dataclass(frozen=True)
class DisorderSpec:
    """Parameters of the separation distribution.

    Attributes:
        mu_nm: Mean separation μ in nm.
        sigma_fraction: Standard deviation as a fraction of μ.
        min_separation_nm: Resampling guard; defaults to μ/1000.
        master_seed: Root seed of every realization.
    """

    mu_nm: float
    sigma_fraction: float = 0.1
    min_separation_nm: Optional[float] = None
    master_seed: int = 20240601

    def __post_init__(self) -> None:
        if not self.mu_nm > 0:
            raise DomainError(f"mu_nm must be positive, got {self.mu_nm}")
        if not (math.isfinite(self.sigma_fraction) and self.sigma_fraction >= 0):
            raise DomainError(f"sigma_fraction must be non-negative, got {self.sigma_fraction}")
        if self.min_separation_nm is None:
            object.__setattr__(self, "min_separation_nm", self.mu_nm / 1000.0)
        if not 0 < self.min_separation_nm < self.mu_nm:  # type: ignore[operator]
            raise DomainError(
                f"min_separation_nm must lie in (0, mu_nm), got {self.min_separation_nm}"
            )
        if self.master_seed < 0:
            raise DomainError(f"master_seed must be non-negative, got {self.master_seed}")

    @property
    def sigma_nm(self) -> float:
        return self.sigma_fraction * self.mu_nm

    @property
    def guard_nm(self) -> float:
        return float(self.min_separation_nm)  # type: ignore[arg-type]

    def with_mean(self, mu_nm: float) -> "DisorderSpec":
        """Rescale to another mean, keeping σ/μ and guard/μ fixed."""
        guard_fraction = self.guard_nm / self.mu_nm
        return replace(self, mu_nm=mu_nm, min_separation_nm=guard_fraction * mu_nm)

    def with_sigma(self, sigma_fraction: float) -> "DisorderSpec":
        return replace(self, sigma_fraction=sigma_fraction)


def realization_rng(master_seed: int, stream: int, index: int) -> np.random.Generator:
    """Return the generator for one realization of one stream."""
    if index < 0:
        raise DomainError(f"realization index must be non-negative, got {index}")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(stream, index)))


def draw_separations(
    rng: np.random.Generator,
    mu_nm: float,
    sigma_nm: float,
    min_separation_nm: float,
    size: int,
) -> np.ndarray:
    """Draw ``size`` guarded Gaussian separations.

    Rejected entries are redrawn in place, in index order.

    Raises:
        SamplingError: After MAX_REJECTED_DRAWS rounds still containing rejects.
    """
    values = rng.normal(mu_nm, sigma_nm, size) if size else np.empty(0)
    rejected = values < min_separation_nm
    rounds = 0
    while np.any(rejected):
        rounds += 1
        if rounds >= MAX_REJECTED_DRAWS:
            raise SamplingError(
                f"{int(rejected.sum())} separations still below {min_separation_nm} nm "
                f"after {rounds} redraws (mu={mu_nm}, sigma={sigma_nm})"
            )
        values[rejected] = rng.normal(mu_nm, sigma_nm, int(rejected.sum()))
        rejected = values < min_separation_nm
    return values


def sample_chain(
    spec: DisorderSpec,
    n: int,
    params: EmitterParams = EmitterParams(),
    realization_index: int = 0,
) -> EmitterChain:
    """Sample one disordered chain.

    The result is a pure function of (spec, n, params, realization_index).

    Args:
        spec: Separation distribution and master seed.
        n: Number of emitters (>= 1).
        params: Emitter rates.
        realization_index: Realization counter.

    Returns:
        EmitterChain with x_1 = 0 and guarded Gaussian gaps.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if spec.sigma_fraction == 0:
        return build_periodic_chain(n, spec.mu_nm, params)
    rng = realization_rng(spec.master_seed, CHAIN_STREAM, realization_index)
    separations = draw_separations(rng, spec.mu_nm, spec.sigma_nm, spec.guard_nm, n - 1)
    return chain_from_separations(separations, params)


@dataclass(frozen=True)
class DdiCurve:
    """Disorder-averaged two-emitter coupling versus mean separation.

    Attributes:
        l_grid_nm: Mean separations L.
        mean: Mean J per L (Γ0).
        stderr: Standard error per L (NaN for a single realization).
        n_realizations: Draws per grid point.
    """

    l_grid_nm: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_realizations: int


def mean_ddi_curve(
    spec: DisorderSpec,
    l_grid_nm: Sequence[float],
    n_realizations: int,
    units: UnitSystem = UnitSystem(),
    theta: float = math.pi / 2,
) -> DdiCurve:
    """Average J over Gaussian separations centred on every L of a grid.

    ``spec.mu_nm`` only fixes the guard fraction; each grid point uses
    ``spec.with_mean(L)``.
    """
    if n_realizations < 1:
        raise DomainError(f"n_realizations must be at least 1, got {n_realizations}")
    grid = np.asarray(l_grid_nm, dtype=float)
    means = np.empty_like(grid)
    errors = np.empty_like(grid)

    for index, l_nm in enumerate(grid):
        local = spec.with_mean(float(l_nm))
        if local.sigma_fraction == 0:
            means[index] = ddi_at_distance(float(l_nm), units, theta)
            errors[index] = 0.0 if n_realizations > 1 else math.nan
            continue

        rng = realization_rng(spec.master_seed, DDI_CURVE_STREAM, index)
        separations = draw_separations(
            rng, local.mu_nm, local.sigma_nm, local.guard_nm, n_realizations
        )
        couplings = ddi_at_distance(separations, units, theta)
        means[index] = float(np.mean(couplings))
        if n_realizations > 1:
            errors[index] = float(np.std(couplings, ddof=1) / math.sqrt(n_realizations))
        else:
            errors[index] = math.nan

    logger.debug(f"Averaged J over {n_realizations} draws at {grid.size} separations")
    return DdiCurve(grid, means, errors, n_realizations)
