"""Single-photon transport through the emitter ladder.

The emitter amplitudes satisfy an N x N dense complex system M·A = b built
from the boundary-averaged transport equations. Substituting the forward
(and, in bidirectional mode, backward) coefficient recursions gives, for
emitter j,

    (Δ + iγ/2 + iΣΓ/2) A_j - Σ_l J_jl A_l
        + Σ_{l<j} i[Γ_bR e^{ik(x_j-x_l)} + Γ_tR e^{im(x_j-x_l)}] A_l
        + Σ_{l>j} i[Γ_bL e^{ik(x_l-x_j)} + Γ_tL e^{im(x_l-x_j)}] A_l
    = V_bR e^{ik x_j}

with V² = Γ·v per channel. Segment s (0..N) lies between emitters s and
s+1; t[s] and r[s] are the right- and left-moving coefficients on it, with
t_b[0] = 1, t_t[0] = 0 and r[N] = 0.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .ddi import DdiMatrix, ddi_matrix
from .exceptions import DomainError, SingularSystemError
from .params import (
    ChiralityMode,
    EmitterChain,
    EmitterParams,
    UnitSystem,
    coupling_amplitude,
)

logger = logging.getLogger(__name__)

# Upper bound on complex entries held by one batched solve.
_MAX_BATCH_ENTRIES = 2_000_000


@dataclass(frozen=True)
class ScatterProblem:
    """One fully specified transport instance.

    Attributes:
        chain: Emitter geometry and rates.
        ddi: Coupling matrix of ``chain``.
        delta: Detuning Δ = ω - ω_eg (Γ0).
        mode: Chiral or bidirectional coupling.
        units: Unit conventions for propagation phases.
        v_bottom: Bottom group velocity relative to ``units.group_velocity``.
        v_top: Top group velocity relative to ``units.group_velocity``.
        phase_scale: Multiplier applied to every propagation phase.
    """

    chain: EmitterChain
    ddi: DdiMatrix
    delta: float = 0.0
    mode: ChiralityMode = ChiralityMode.CHIRAL
    units: UnitSystem = field(default_factory=UnitSystem)
    v_bottom: float = 1.0
    v_top: float = 1.0
    phase_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.ddi.n != self.chain.count:
            raise DomainError(
                f"DDI matrix size {self.ddi.n} does not match chain size {self.chain.count}"
            )
        if not (self.v_bottom > 0 and self.v_top > 0):
            raise DomainError(
                f"group velocities must be positive, got {self.v_bottom}, {self.v_top}"
            )
        if not math.isfinite(self.delta):
            raise DomainError(f"delta must be finite, got {self.delta}")
        if not math.isfinite(self.phase_scale):
            raise DomainError(f"phase_scale must be finite, got {self.phase_scale}")

    @property
    def params(self) -> EmitterParams:
        return self.chain.params

    def at(self, delta: float) -> "ScatterProblem":
        """Return the same problem at another detuning."""
        return replace(self, delta=float(delta))

    def bottom_wavenumber(self, delta: Optional[float] = None) -> float:
        """k (rad/nm) in the bottom waveguide."""
        d = self.delta if delta is None else delta
        return d * self.phase_scale * self.units.wavenumber_per_nm(self.v_bottom)

    def top_wavenumber(self, delta: Optional[float] = None) -> float:
        """m (rad/nm) in the top waveguide."""
        d = self.delta if delta is None else delta
        return d * self.phase_scale * self.units.wavenumber_per_nm(self.v_top)

    def channel_rates(self) -> "ChannelRates":
        """Waveguide coupling rates per guide and direction."""
        p = self.params
        if self.mode is ChiralityMode.CHIRAL:
            left_b = left_t = 0.0
        else:
            left_b = p.left_right_ratio * p.big_gamma_bottom
            left_t = p.left_right_ratio * p.big_gamma_top
        return ChannelRates(p.big_gamma_bottom, left_b, p.big_gamma_top, left_t)


@dataclass(frozen=True)
class ChannelRates:
    """Γ per (guide, direction) in Γ0 units."""

    bottom_right: float
    bottom_left: float
    top_right: float
    top_left: float

    @property
    def total(self) -> float:
        return self.bottom_right + self.bottom_left + self.top_right + self.top_left


@dataclass(frozen=True)
class ScatterTemplate:
    """A transport problem without emitter positions.

    Binding a chain recomputes the DDI matrix from the realized positions.
    """

    params: EmitterParams = field(default_factory=EmitterParams)
    units: UnitSystem = field(default_factory=UnitSystem)
    mode: ChiralityMode = ChiralityMode.CHIRAL
    v_bottom: float = 1.0
    v_top: float = 1.0
    phase_scale: float = 1.0

    def bind(self, chain: EmitterChain, delta: float = 0.0) -> ScatterProblem:
        if chain.params != self.params:
            chain = EmitterChain(chain.positions_nm, self.params)
        return ScatterProblem(
            chain=chain,
            ddi=ddi_matrix(chain, self.units),
            delta=delta,
            mode=self.mode,
            units=self.units,
            v_bottom=self.v_bottom,
            v_top=self.v_top,
            phase_scale=self.phase_scale,
        )


@dataclass(frozen=True)
class PortProbabilities:
    """Detection probabilities at the four ports for a Port-1 input.

    Attributes:
        t_top: Port 4 (top guide, right end).
        t_bottom: Port 2 (bottom guide, right end).
        r_top: Port 3 (top guide, left end).
        r_bottom: Port 1 (back-reflection).
    """

    t_top: float
    t_bottom: float
    r_top: float
    r_bottom: float

    @property
    def total(self) -> float:
        return self.t_top + self.t_bottom + self.r_top + self.r_bottom

    @property
    def loss(self) -> float:
        return 1.0 - self.total


@dataclass(frozen=True)
class TransportSolution:
    """Solution of one ScatterProblem.

    Attributes:
        delta: Detuning the problem was solved at.
        amplitudes: Complex emitter amplitudes A_1..A_N.
        t_bottom: Right-moving bottom coefficients per segment (N+1).
        t_top: Right-moving top coefficients per segment (N+1).
        r_bottom: Left-moving bottom coefficients per segment (N+1).
        r_top: Left-moving top coefficients per segment (N+1).
        probabilities: Port probabilities.
    """

    delta: float
    amplitudes: np.ndarray
    t_bottom: np.ndarray
    t_top: np.ndarray
    r_bottom: np.ndarray
    r_top: np.ndarray
    probabilities: PortProbabilities

    @property
    def loss(self) -> float:
        return self.probabilities.loss


@dataclass(frozen=True)
class TransportSpectrum:
    """Port observables over a detuning grid.

    Probability arrays have the shape of ``delta_grid``; the complex
    end-of-chain coefficients are kept for closed-form comparisons.
    """

    delta_grid: np.ndarray
    t_top: np.ndarray
    t_bottom: np.ndarray
    r_top: np.ndarray
    r_bottom: np.ndarray
    t_top_amplitude: np.ndarray
    t_bottom_amplitude: np.ndarray

    @property
    def loss(self) -> np.ndarray:
        return 1.0 - (self.t_top + self.t_bottom + self.r_top + self.r_bottom)


@dataclass(frozen=True)
class FieldProfile:
    """Waveguide field amplitudes sampled on a coordinate grid (nm)."""

    x_nm: np.ndarray
    bottom_right: np.ndarray
    bottom_left: np.ndarray
    top_right: np.ndarray
    top_left: np.ndarray


@dataclass(frozen=True)
class _Couplings:
    rates: ChannelRates
    v_bottom_right: float
    v_bottom_left: float
    v_top_right: float
    v_top_left: float


def _couplings(problem: ScatterProblem) -> _Couplings:
    rates = problem.channel_rates()
    return _Couplings(
        rates=rates,
        v_bottom_right=coupling_amplitude(rates.bottom_right, problem.v_bottom),
        v_bottom_left=coupling_amplitude(rates.bottom_left, problem.v_bottom),
        v_top_right=coupling_amplitude(rates.top_right, problem.v_top),
        v_top_left=coupling_amplitude(rates.top_left, problem.v_top),
    )


def _wavenumbers(problem: ScatterProblem, deltas: np.ndarray) -> "tuple[np.ndarray, np.ndarray]":
    k = deltas * problem.phase_scale * problem.units.wavenumber_per_nm(problem.v_bottom)
    m = deltas * problem.phase_scale * problem.units.wavenumber_per_nm(problem.v_top)
    return k, m


def _solve_amplitudes(
    problem: ScatterProblem,
    deltas: np.ndarray,
    couplings: _Couplings,
) -> np.ndarray:
    """Solve M·A = b for every detuning; returns A with shape (G, N)."""
    x = problem.chain.positions_nm
    n = x.size
    rates = couplings.rates
    k, m = _wavenumbers(problem, deltas)

    dx = x[:, None] - x[None, :]
    lower = np.tril(np.ones((n, n), dtype=bool), k=-1)
    upper = lower.T

    k_dx = k[:, None, None] * dx
    m_dx = m[:, None, None] * dx
    matrix = np.empty((deltas.size, n, n), dtype=complex)
    matrix[:] = -problem.ddi.values
    matrix += np.where(
        lower,
        1j * (rates.bottom_right * np.exp(1j * k_dx) + rates.top_right * np.exp(1j * m_dx)),
        0.0,
    )
    if rates.bottom_left or rates.top_left:
        matrix += np.where(
            upper,
            1j * (rates.bottom_left * np.exp(-1j * k_dx) + rates.top_left * np.exp(-1j * m_dx)),
            0.0,
        )
    diagonal = deltas + 0.5j * (problem.params.gamma + rates.total)
    idx = np.arange(n)
    matrix[:, idx, idx] = diagonal[:, None]

    drive = couplings.v_bottom_right * np.exp(1j * k[:, None] * x[None, :])

    try:
        amplitudes = np.linalg.solve(matrix, drive[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(
            f"transport system is singular for N={n} "
            f"(gamma={problem.params.gamma}, total waveguide rate={rates.total})",
            cause=e,
        ) from e
    if not np.all(np.isfinite(amplitudes)):
        raise SingularSystemError(
            f"transport system produced non-finite amplitudes for N={n}"
        )
    return amplitudes


def _batches(grid: np.ndarray, n: int) -> Sequence[np.ndarray]:
    size = max(1, _MAX_BATCH_ENTRIES // max(1, n * n))
    return [grid[i : i + size] for i in range(0, grid.size, size)]


def solve_transport(problem: ScatterProblem) -> TransportSolution:
    """Solve the transport equations at ``problem.delta``.

    Args:
        problem: The transport instance.

    Returns:
        TransportSolution with all boundary coefficients.

    Raises:
        SingularSystemError: At exact real poles (no broadening).
    """
    couplings = _couplings(problem)
    delta = np.array([problem.delta], dtype=float)
    amplitudes = _solve_amplitudes(problem, delta, couplings)[0]
    x = problem.chain.positions_nm
    k = problem.bottom_wavenumber()
    m = problem.top_wavenumber()

    forward_b = np.concatenate(([0.0], np.cumsum(amplitudes * np.exp(-1j * k * x))))
    forward_t = np.concatenate(([0.0], np.cumsum(amplitudes * np.exp(-1j * m * x))))
    t_bottom = 1.0 - 1j * (couplings.v_bottom_right / problem.v_bottom) * forward_b
    t_top = -1j * (couplings.v_top_right / problem.v_top) * forward_t

    if problem.mode is ChiralityMode.CHIRAL:
        r_bottom = np.zeros(x.size + 1, dtype=complex)
        r_top = np.zeros(x.size + 1, dtype=complex)
    else:
        backward_b = np.concatenate(
            (np.cumsum((amplitudes * np.exp(1j * k * x))[::-1])[::-1], [0.0])
        )
        backward_t = np.concatenate(
            (np.cumsum((amplitudes * np.exp(1j * m * x))[::-1])[::-1], [0.0])
        )
        r_bottom = -1j * (couplings.v_bottom_left / problem.v_bottom) * backward_b
        r_top = -1j * (couplings.v_top_left / problem.v_top) * backward_t
        r_bottom[-1] = 0.0
        r_top[-1] = 0.0

    flux_ratio = problem.v_top / problem.v_bottom
    probabilities = PortProbabilities(
        t_top=flux_ratio * float(abs(t_top[-1]) ** 2),
        t_bottom=float(abs(t_bottom[-1]) ** 2),
        r_top=flux_ratio * float(abs(r_top[0]) ** 2),
        r_bottom=float(abs(r_bottom[0]) ** 2),
    )
    return TransportSolution(
        delta=problem.delta,
        amplitudes=amplitudes,
        t_bottom=t_bottom,
        t_top=t_top,
        r_bottom=r_bottom,
        r_top=r_top,
        probabilities=probabilities,
    )


def solve_spectrum(problem: ScatterProblem, delta_grid: Sequence[float]) -> TransportSpectrum:
    """Solve the transport equations on a whole detuning grid.

    Equivalent to calling :func:`solve_transport` per grid point, but the
    N x N systems are solved as stacked batches.

    Args:
        problem: Transport instance; its own ``delta`` is ignored.
        delta_grid: Detunings (Γ0).

    Returns:
        TransportSpectrum aligned with ``delta_grid``.
    """
    grid = np.asarray(delta_grid, dtype=float).reshape(-1)
    couplings = _couplings(problem)
    x = problem.chain.positions_nm
    flux_ratio = problem.v_top / problem.v_bottom

    t_b_parts, t_t_parts, r_b_parts, r_t_parts = [], [], [], []
    for chunk in _batches(grid, x.size):
        amplitudes = _solve_amplitudes(problem, chunk, couplings)
        k, m = _wavenumbers(problem, chunk)
        phase_b = np.exp(1j * k[:, None] * x[None, :])
        phase_t = np.exp(1j * m[:, None] * x[None, :])
        t_b_parts.append(
            1.0
            - 1j
            * (couplings.v_bottom_right / problem.v_bottom)
            * np.sum(amplitudes * np.conj(phase_b), axis=1)
        )
        t_t_parts.append(
            -1j
            * (couplings.v_top_right / problem.v_top)
            * np.sum(amplitudes * np.conj(phase_t), axis=1)
        )
        if problem.mode is ChiralityMode.CHIRAL:
            r_b_parts.append(np.zeros(chunk.size, dtype=complex))
            r_t_parts.append(np.zeros(chunk.size, dtype=complex))
        else:
            r_b_parts.append(
                -1j
                * (couplings.v_bottom_left / problem.v_bottom)
                * np.sum(amplitudes * phase_b, axis=1)
            )
            r_t_parts.append(
                -1j
                * (couplings.v_top_left / problem.v_top)
                * np.sum(amplitudes * phase_t, axis=1)
            )

    def _join(parts: list) -> np.ndarray:
        return np.concatenate(parts) if parts else np.empty(0, dtype=complex)

    t_b = _join(t_b_parts)
    t_t = _join(t_t_parts)
    r_b = _join(r_b_parts)
    r_t = _join(r_t_parts)
    return TransportSpectrum(
        delta_grid=grid,
        t_top=flux_ratio * np.abs(t_t) ** 2,
        t_bottom=np.abs(t_b) ** 2,
        r_top=flux_ratio * np.abs(r_t) ** 2,
        r_bottom=np.abs(r_b) ** 2,
        t_top_amplitude=t_t,
        t_bottom_amplitude=t_b,
    )


def field_profile(
    problem: ScatterProblem,
    solution: TransportSolution,
    coordinate_grid: Sequence[float],
) -> FieldProfile:
    """Evaluate the piecewise plane-wave fields of all four channels.

    A point exactly on an emitter is assigned to the segment on its right.
    """
    x = np.asarray(coordinate_grid, dtype=float)
    segment = np.searchsorted(problem.chain.positions_nm, x, side="right")
    k = problem.bottom_wavenumber(solution.delta)
    m = problem.top_wavenumber(solution.delta)
    return FieldProfile(
        x_nm=x,
        bottom_right=solution.t_bottom[segment] * np.exp(1j * k * x),
        bottom_left=solution.r_bottom[segment] * np.exp(-1j * k * x),
        top_right=solution.t_top[segment] * np.exp(1j * m * x),
        top_left=solution.r_top[segment] * np.exp(-1j * m * x),
    )
