"""Disorder averaging over many realizations.

Realizations are the unit of parallel work. Each one samples its chain
from ``(master_seed, realization index)``, rebuilds the DDI matrix from the
realized positions and solves the whole detuning grid. Results come back
from joblib in submission order and are folded into running statistics in
realization order, so the averages are bit-identical for any ``n_jobs``
or backend.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .disorder import DisorderSpec, sample_chain
from .exceptions import DomainError, EnsembleError, WaveguideRoutingError
from .models import EnsembleStats, LocalizationPoint, PmaxResult
from .observables import (
    conventional_localization_length,
    conventional_localization_length_error,
    localization_length,
    localization_length_error,
    pmax_from_spectrum,
    routing_efficiency_array,
)
from .params import build_periodic_chain
from .scatter import ScatterTemplate, solve_spectrum

logger = logging.getLogger(__name__)

OBSERVABLES = ("t_top", "t_bottom", "r_top", "r_bottom", "loss", "xi", "log_t_top")

# Port-4 detuning of each chain length used for the localization sweep.
DEFAULT_DELTA_PER_N: Dict[int, float] = {2: 30.0, 5: 80.0, 10: 150.0, 20: 200.0}

MAX_SIGMA_FRACTION = 0.25

_TINY = np.finfo(float).tiny


class RunningStats:
    """Welford mean and variance of equally shaped arrays.

    Values must be pushed in a fixed order for the result to be
    reproducible to the last bit.
    """

    def __init__(self, shape: Sequence[int]) -> None:
        self.count = 0
        self.mean = np.zeros(shape, dtype=float)
        self._m2 = np.zeros(shape, dtype=float)

    def push(self, values: np.ndarray) -> None:
        self.count += 1
        delta = values - self.mean
        self.mean = self.mean + delta / self.count
        self._m2 = self._m2 + delta * (values - self.mean)

    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.mean, math.nan)
        variance = np.maximum(self._m2, 0.0) / (self.count - 1)
        return np.sqrt(variance / self.count)


def _realization_observables(
    spec: DisorderSpec,
    template: ScatterTemplate,
    n: int,
    delta_grid: np.ndarray,
    index: int,
) -> Dict[str, np.ndarray]:
    """Solve one realization and return every ensemble observable."""
    try:
        chain = sample_chain(spec, n, template.params, index)
        result = solve_spectrum(template.bind(chain), delta_grid)
    except WaveguideRoutingError as e:
        raise EnsembleError(
            f"realization {index} failed: {e}", realization_index=index, cause=e
        ) from e
    return {
        "t_top": result.t_top,
        "t_bottom": result.t_bottom,
        "r_top": result.r_top,
        "r_bottom": result.r_bottom,
        "loss": result.loss,
        "xi": routing_efficiency_array(result.t_top, result.t_bottom),
        "log_t_top": np.log(np.maximum(result.t_top, _TINY)),
    }


def run_ensemble(
    spec: DisorderSpec,
    template: ScatterTemplate,
    n: int,
    delta_grid: Sequence[float],
    n_realizations: int,
    n_jobs: Optional[int] = 1,
    backend: Optional[str] = None,
) -> EnsembleStats:
    """Average port observables over disorder realizations.

    Args:
        spec: Separation distribution and master seed.
        template: Rates, units and coupling mode shared by all realizations.
        n: Number of emitters per chain.
        delta_grid: Detunings (Γ0) solved for every realization.
        n_realizations: Number of realizations (>= 1).
        n_jobs: joblib worker count (-1 for all cores).
        backend: joblib backend name, None for joblib's default.

    Returns:
        EnsembleStats with mean and stderr for every name in OBSERVABLES.

    Raises:
        DomainError: If n_realizations < 1.
        EnsembleError: If any realization fails; carries its index.
    """
    if n_realizations < 1:
        raise DomainError(f"n_realizations must be at least 1, got {n_realizations}")
    grid = np.asarray(delta_grid, dtype=float).reshape(-1)

    logger.info(
        f"Running {n_realizations} realizations: N={n}, mu={spec.mu_nm} nm, "
        f"sigma={spec.sigma_fraction}*mu, {grid.size} detunings, n_jobs={n_jobs}"
    )
    stats = {name: RunningStats(grid.shape) for name in OBSERVABLES}
    parallel = Parallel(n_jobs=n_jobs, backend=backend, return_as="generator")
    outputs: Iterator[Dict[str, np.ndarray]] = parallel(
        delayed(_realization_observables)(spec, template, n, grid, index)
        for index in range(n_realizations)
    )
    for index, values in enumerate(outputs):
        for name in OBSERVABLES:
            stats[name].push(values[name])
        if (index + 1) % 100 == 0:
            logger.debug(f"Accumulated {index + 1}/{n_realizations} realizations")

    return EnsembleStats(
        delta_grid=grid,
        mean={name: s.mean for name, s in stats.items()},
        stderr={name: s.stderr() for name, s in stats.items()},
        n_realizations=n_realizations,
        master_seed=spec.master_seed,
    )


def mean_pmax(
    spec: DisorderSpec,
    template: ScatterTemplate,
    n: int,
    delta_grid: Sequence[float],
    n_realizations: int,
    n_jobs: Optional[int] = 1,
    backend: Optional[str] = None,
) -> PmaxResult:
    """P_max and Δ_max of the disorder-averaged Port-4 spectrum."""
    stats = run_ensemble(spec, template, n, delta_grid, n_realizations, n_jobs, backend)
    return pmax_from_spectrum(stats.delta_grid, stats.mean["t_top"], n)


@dataclass(frozen=True)
class EfficiencyMap:
    """Routing efficiency over a detuning by separation grid.

    Attributes:
        delta_grid: Detunings (Γ0), the fast axis.
        l_over_lambda: Mean separations in units of λ_e, the slow axis.
        xi_mean: Shape (len(l_over_lambda), len(delta_grid)).
        xi_stderr: Same shape; zero for periodic maps.
        n_realizations: Realizations per separation (1 for periodic maps).
    """

    delta_grid: np.ndarray
    l_over_lambda: np.ndarray
    xi_mean: np.ndarray
    xi_stderr: np.ndarray
    n_realizations: int

    @property
    def undefined_count(self) -> int:
        return int(np.count_nonzero(np.isnan(self.xi_mean)))


def efficiency_map(
    n: int,
    l_over_lambda_grid: Sequence[float],
    delta_grid: Sequence[float],
    template: ScatterTemplate,
    disorder: Optional[DisorderSpec] = None,
    n_realizations: int = 1,
    n_jobs: Optional[int] = 1,
    backend: Optional[str] = None,
) -> EfficiencyMap:
    """Map ξ_N over (Δ, L) with J recomputed from every separation.

    Without ``disorder`` each row is a periodic chain of spacing L·λ_e.
    With it, each row averages ``n_realizations`` chains drawn from
    ``disorder.with_mean(L·λ_e)``.
    """
    lengths = np.asarray(l_over_lambda_grid, dtype=float).reshape(-1)
    grid = np.asarray(delta_grid, dtype=float).reshape(-1)
    if np.any(lengths <= 0):
        raise DomainError("separations of the efficiency map must be positive")
    lambda_nm = template.units.lambda_e_nm

    means = np.empty((lengths.size, grid.size))
    errors = np.zeros((lengths.size, grid.size))
    for row, l_ratio in enumerate(lengths):
        spacing = float(l_ratio) * lambda_nm
        if disorder is None:
            problem = template.bind(build_periodic_chain(n, spacing, template.params))
            curve = solve_spectrum(problem, grid)
            means[row] = routing_efficiency_array(curve.t_top, curve.t_bottom)
        else:
            stats = run_ensemble(
                disorder.with_mean(spacing), template, n, grid, n_realizations, n_jobs, backend
            )
            means[row] = stats.mean["xi"]
            errors[row] = stats.stderr["xi"]

    result = EfficiencyMap(
        delta_grid=grid,
        l_over_lambda=lengths,
        xi_mean=means,
        xi_stderr=errors,
        n_realizations=1 if disorder is None else n_realizations,
    )
    if result.undefined_count:
        logger.warning(
            f"Routing efficiency undefined at {result.undefined_count} map points "
            f"(no transmitted flux)"
        )
    return result


def localization_sweep(
    spec: DisorderSpec,
    template: ScatterTemplate,
    sigma_grid: Sequence[float],
    n_values: Sequence[int],
    n_realizations: int,
    delta_per_n: Mapping[int, float] = DEFAULT_DELTA_PER_N,
    n_jobs: Optional[int] = 1,
    backend: Optional[str] = None,
) -> List[LocalizationPoint]:
    """Localization length for every (N, σ) pair at the per-N detuning.

    Args:
        spec: Mean separation, guard and master seed; its own σ is replaced
            by every entry of ``sigma_grid``.
        template: Rates, units and coupling mode.
        sigma_grid: Disorder strengths σ/μ in [0, 0.25].
        n_values: Chain lengths; each needs an entry in ``delta_per_n``.
        n_realizations: Realizations per (N, σ).
        delta_per_n: Detuning (Γ0) to evaluate each chain length at.

    Returns:
        Points ordered by N, then σ.
    """
    for sigma in sigma_grid:
        if not 0.0 <= sigma <= MAX_SIGMA_FRACTION:
            raise DomainError(
                f"sigma fractions must lie in [0, {MAX_SIGMA_FRACTION}], got {sigma}"
            )
    missing = [n for n in n_values if n not in delta_per_n]
    if missing:
        raise DomainError(f"no detuning configured for N={missing}")

    points = []
    for n in n_values:
        delta = float(delta_per_n[n])
        for sigma in sigma_grid:
            stats = run_ensemble(
                spec.with_sigma(float(sigma)), template, n, [delta], n_realizations, n_jobs, backend
            )
            mean_t = float(stats.mean["t_top"][0])
            stderr = float(stats.stderr["t_top"][0])
            mean_log = float(stats.mean["log_t_top"][0])
            log_stderr = float(stats.stderr["log_t_top"][0])
            points.append(
                LocalizationPoint(
                    n=n,
                    sigma_fraction=float(sigma),
                    delta=delta,
                    mean_t_top=mean_t,
                    t_top_stderr=stderr,
                    length=localization_length(mean_t, n),
                    length_error=localization_length_error(mean_t, stderr, n),
                    conventional_length=conventional_localization_length(mean_log, n),
                    conventional_length_error=conventional_localization_length_error(
                        mean_log, log_stderr, n
                    ),
                )
            )
            logger.debug(f"N={n}, sigma={sigma}: <T_t>={mean_t:.6f}")
    return points
