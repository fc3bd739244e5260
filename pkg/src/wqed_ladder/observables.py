"""Derived observables: routing efficiency, spectra, peak scans, localization."""

import logging
import math
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import DomainError, UndefinedEfficiencyError
from .models import PmaxResult, Spectrum
from .params import build_periodic_chain
from .scatter import (
    PortProbabilities,
    ScatterProblem,
    ScatterTemplate,
    TransportSolution,
    solve_spectrum,
    solve_transport,
)

logger = logging.getLogger(__name__)

DEFAULT_DELTA_RANGE: Tuple[float, float] = (-300.0, 300.0)
DEFAULT_SCAN_STEP = 0.1
REFINE_TOLERANCE = 1e-3


def routing_efficiency(solution: Union[TransportSolution, PortProbabilities]) -> float:
    """Return ξ = (T_t - T_b)/(T_t + T_b).

    Raises:
        UndefinedEfficiencyError: If neither guide transmits any flux.
    """
    probabilities = (
        solution.probabilities if isinstance(solution, TransportSolution) else solution
    )
    transmitted = probabilities.t_top + probabilities.t_bottom
    if transmitted == 0:
        raise UndefinedEfficiencyError("routing efficiency undefined: no transmitted flux")
    return (probabilities.t_top - probabilities.t_bottom) / transmitted


def routing_efficiency_array(t_top: np.ndarray, t_bottom: np.ndarray) -> np.ndarray:
    """Element-wise routing efficiency; NaN where T_t + T_b = 0."""
    top = np.asarray(t_top, dtype=float)
    bottom = np.asarray(t_bottom, dtype=float)
    transmitted = top + bottom
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = (top - bottom) / transmitted
    return np.where(transmitted == 0, np.nan, xi)


def _checked_grid(delta_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(delta_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise DomainError("detuning grid is empty")
    if not np.all(np.isfinite(grid)):
        raise DomainError("detuning grid must be finite")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise DomainError("detuning grid must be strictly increasing")
    return grid


def spectrum(problem: ScatterProblem, delta_grid: Sequence[float]) -> Spectrum:
    """Port probabilities and ξ of one fixed chain over a detuning grid.

    Disorder-averaged spectra come from :func:`wqed_ladder.ensemble.run_ensemble`.
    """
    grid = _checked_grid(delta_grid)
    result = solve_spectrum(problem, grid)
    xi = routing_efficiency_array(result.t_top, result.t_bottom)
    undefined = int(np.count_nonzero(np.isnan(xi)))
    if undefined:
        logger.warning(f"Routing efficiency undefined at {undefined} of {grid.size} detunings")
    return Spectrum(
        delta_grid=grid,
        t_top=result.t_top,
        t_bottom=result.t_bottom,
        r_top=result.r_top,
        r_bottom=result.r_bottom,
        xi=xi,
        metadata={
            "n": problem.chain.count,
            "mode": problem.mode.value,
            "disorder": "periodic",
            "n_realizations": 1,
        },
    )


def scan_grid(delta_range: Tuple[float, float], step: float) -> np.ndarray:
    """Inclusive uniform grid over ``delta_range`` with spacing ``step``."""
    low, high = delta_range
    if not high > low:
        raise DomainError(f"delta_range must be increasing, got {delta_range}")
    if not step > 0:
        raise DomainError(f"scan step must be positive, got {step}")
    return np.linspace(low, high, int(round((high - low) / step)) + 1)


def pmax_from_spectrum(delta_grid: np.ndarray, t_top: np.ndarray, n: int) -> PmaxResult:
    """Grid maximum of a Port-4 curve, without refinement."""
    index = int(np.argmax(t_top))
    on_edge = index in (0, len(t_top) - 1)
    if on_edge:
        logger.warning(
            f"Port-4 maximum for N={n} lies on the scan boundary "
            f"(delta={delta_grid[index]}); widen the detuning range"
        )
    return PmaxResult(
        n=n,
        p_max=float(t_top[index]),
        delta_max=float(delta_grid[index]),
        boundary_flag=on_edge,
    )


def refine_peak(problem: ScatterProblem, delta_grid: np.ndarray, t_top: np.ndarray) -> PmaxResult:
    """Refine the coarse Port-4 maximum inside its bracketing grid cells.

    Uses scipy's bounded Brent search to 1e-3 Γ0. The coarse sample is
    kept when the refined point is not better.
    """
    coarse = pmax_from_spectrum(delta_grid, t_top, problem.chain.count)
    if coarse.boundary_flag:
        return coarse

    index = int(np.argmax(t_top))

    def negative_port4(delta: float) -> float:
        return -solve_transport(problem.at(delta)).probabilities.t_top

    found = minimize_scalar(
        negative_port4,
        bounds=(float(delta_grid[index - 1]), float(delta_grid[index + 1])),
        method="bounded",
        options={"xatol": REFINE_TOLERANCE},
    )
    refined = -float(found.fun)
    if refined <= coarse.p_max:
        return coarse
    return PmaxResult(
        n=coarse.n,
        p_max=min(refined, 1.0),
        delta_max=float(found.x),
        boundary_flag=False,
    )


def pmax_scan(
    n_values: Sequence[int],
    template: ScatterTemplate,
    spacing_nm: float,
    delta_range: Tuple[float, float] = DEFAULT_DELTA_RANGE,
    step: float = DEFAULT_SCAN_STEP,
) -> List[PmaxResult]:
    """P_max and Δ_max of periodic chains of every requested length.

    Args:
        n_values: Chain lengths to scan.
        template: Rates, units and coupling mode.
        spacing_nm: Lattice constant of the periodic chains.
        delta_range: Detuning range the peaks must lie in.
        step: Coarse grid spacing (Γ0).

    Returns:
        One PmaxResult per entry of ``n_values``, in order.
    """
    grid = scan_grid(delta_range, step)
    results = []
    for n in n_values:
        problem = template.bind(build_periodic_chain(n, spacing_nm, template.params))
        curve = solve_spectrum(problem, grid)
        result = refine_peak(problem, grid, curve.t_top)
        logger.debug(f"N={n}: P_max={result.p_max:.6f} at delta={result.delta_max:.4f}")
        results.append(result)
    return results


def localization_length(mean_t_top: float, n: int) -> float:
    """Finite-chain localization length N/⟨T_t⟩ in units of emitters.

    Returns ``math.inf`` (with a warning) when ⟨T_t⟩ = 0.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not 0.0 <= mean_t_top <= 1.0 + 1e-12:
        raise DomainError(f"mean_t_top must lie in [0, 1], got {mean_t_top}")
    if mean_t_top == 0:
        logger.warning(
            f"Mean Port-4 transmission is zero for N={n}; localization length is infinite"
        )
        return math.inf
    return n / mean_t_top


def conventional_localization_length(mean_log_t_top: float, n: int) -> float:
    """Localization length -2N/⟨ln T_t⟩ from the mean log-transmission."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if math.isnan(mean_log_t_top) or mean_log_t_top > 1e-12:
        raise DomainError(f"mean log-transmission must be <= 0, got {mean_log_t_top}")
    if mean_log_t_top == -math.inf:
        return 0.0
    if mean_log_t_top >= 0:
        return math.inf
    return -2.0 * n / mean_log_t_top


def localization_length_error(mean_t_top: float, stderr: float, n: int) -> float:
    """First-order error of N/⟨T_t⟩ given the standard error of ⟨T_t⟩."""
    if mean_t_top == 0:
        return math.inf
    return n * stderr / mean_t_top**2


def conventional_localization_length_error(
    mean_log_t_top: float, stderr: float, n: int
) -> float:
    """First-order error of -2N/⟨ln T_t⟩ given the standard error of ⟨ln T_t⟩."""
    if mean_log_t_top == 0:
        return math.inf
    if not math.isfinite(mean_log_t_top):
        return math.nan
    return 2.0 * n * stderr / mean_log_t_top**2

