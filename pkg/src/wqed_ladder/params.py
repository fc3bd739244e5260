"""Physical parameters, unit conventions and chain geometry.

All rates are stored in units of the free-space decay rate Γ0 and all
positions in nanometres. Conversion to SI only happens when propagation
phases are computed (see :meth:`UnitSystem.wavenumber_per_nm`).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .exceptions import DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class UnitSystem:
    """Unit conventions shared by every module.

    Attributes:
        gamma0_hz: Free-space decay rate Γ0 in Hz. Default: 7.5 MHz
        lambda_e_nm: Emitter transition wavelength in nm. Default: 655
        group_velocity: Reference group velocity in m/s used for
            propagation phases. Default: speed of light in vacuum
    """

    gamma0_hz: float = 7.5e6
    lambda_e_nm: float = 655.0
    group_velocity: float = SPEED_OF_LIGHT

    def __post_init__(self) -> None:
        if not self.gamma0_hz > 0:
            raise DomainError(f"gamma0_hz must be positive, got {self.gamma0_hz}")
        if not self.lambda_e_nm > 0:
            raise DomainError(f"lambda_e_nm must be positive, got {self.lambda_e_nm}")
        if not self.group_velocity > 0:
            raise DomainError(f"group_velocity must be positive, got {self.group_velocity}")

    def wavenumber_per_nm(self, relative_velocity: float = 1.0) -> float:
        """Wavenumber (rad/nm) carried by a detuning of one Γ0.

        Args:
            relative_velocity: Waveguide group velocity in units of
                ``group_velocity``.

        Returns:
            k per unit detuning, so that k(Δ)·x = Δ · this · x_nm.
        """
        if not relative_velocity > 0:
            raise DomainError(f"relative_velocity must be positive, got {relative_velocity}")
        return 2.0 * math.pi * self.gamma0_hz * 1e-9 / (relative_velocity * self.group_velocity)

    def dimensionless_separation(
        self, distance_nm: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        """Return R = ω_eg·d/c = 2π·d/λ_e, element-wise for arrays."""
        return 2.0 * math.pi * distance_nm / self.lambda_e_nm


class ChiralityMode(str, Enum):
    """Direction selectivity of the emitter-waveguide coupling.

    Values:
        CHIRAL: Only right-moving photons couple; all reflections vanish.
        BIDIRECTIONAL: Both directions couple (left weighted by
            ``EmitterParams.left_right_ratio``).
    """

    CHIRAL = "chiral"
    BIDIRECTIONAL = "bidirectional"


@dataclass(frozen=True)
class EmitterParams:
    """Per-emitter rates shared by every emitter of a chain.

    Attributes:
        gamma: Non-waveguide spontaneous emission rate γ (Γ0). Default: 6.86
        big_gamma_bottom: Coupling rate Γ to the bottom waveguide (Γ0). Default: 11.03
        big_gamma_top: Coupling rate Γ to the top waveguide (Γ0). Default: 11.03
        theta_dipole: Angle between dipole moment and separation vector
            (radians). Default: π/2
        left_right_ratio: Γ_L/Γ_R used in bidirectional mode. Default: 1.0
    """

    gamma: float = 6.86
    big_gamma_bottom: float = 11.03
    big_gamma_top: float = 11.03
    theta_dipole: float = math.pi / 2
    left_right_ratio: float = 1.0

    def __post_init__(self) -> None:
        for name in ("gamma", "big_gamma_bottom", "big_gamma_top", "left_right_ratio"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and non-negative, got {value}")
        if not 0.0 <= self.theta_dipole <= math.pi:
            raise DomainError(f"theta_dipole must lie in [0, pi], got {self.theta_dipole}")


@dataclass(frozen=True)
class EmitterChain:
    """Ordered emitter coordinates along the waveguide axis.

    The same coordinates are used for both waveguides (x_j = y_j).

    Attributes:
        positions_nm: Strictly increasing emitter positions (read-only array).
        params: Emitter rates.
    """

    positions_nm: np.ndarray
    params: EmitterParams = field(default_factory=EmitterParams)

    def __post_init__(self) -> None:
        positions = np.array(self.positions_nm, dtype=float).reshape(-1)
        if positions.size < 1:
            raise DomainError("an emitter chain needs at least one emitter")
        if not np.all(np.isfinite(positions)):
            raise DomainError("emitter positions must be finite")
        if positions.size > 1 and not np.all(np.diff(positions) > 0):
            raise DomainError("emitter positions must be strictly increasing")
        positions.setflags(write=False)
        object.__setattr__(self, "positions_nm", positions)

    @property
    def count(self) -> int:
        """Number of emitters N."""
        return int(self.positions_nm.size)

    @property
    def separations_nm(self) -> np.ndarray:
        """Successive inter-emitter separations (length N-1)."""
        return np.diff(self.positions_nm)

    def shifted(self, offset_nm: float) -> "EmitterChain":
        """Return the same chain translated by ``offset_nm``."""
        return EmitterChain(self.positions_nm + offset_nm, self.params)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmitterChain):
            return NotImplemented
        return self.params == other.params and np.array_equal(
            self.positions_nm, other.positions_nm
        )

    def __hash__(self) -> int:
        return hash((self.params, self.positions_nm.tobytes()))


def build_periodic_chain(
    n: int,
    spacing_nm: float,
    params: EmitterParams = EmitterParams(),
) -> EmitterChain:
    """Build a periodic chain with positions 0, d, 2d, ..., (n-1)d.

    Args:
        n: Number of emitters (>= 1).
        spacing_nm: Lattice constant in nm (> 0).
        params: Emitter rates.

    Returns:
        The periodic EmitterChain.

    Raises:
        DomainError: If n < 1 or spacing_nm <= 0.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not spacing_nm > 0:
        raise DomainError(f"spacing_nm must be positive, got {spacing_nm}")
    return EmitterChain(spacing_nm * np.arange(n, dtype=float), params)


def chain_from_separations(
    separations_nm: Sequence[float],
    params: EmitterParams = EmitterParams(),
) -> EmitterChain:
    """Build a chain anchored at x_1 = 0 from successive separations."""
    positions = np.concatenate(([0.0], np.cumsum(np.asarray(separations_nm, dtype=float))))
    return EmitterChain(positions, params)


def coupling_amplitude(big_gamma: float, group_velocity: float = 1.0) -> float:
    """Return the coupling amplitude V with V²/v_g = Γ.

    Args:
        big_gamma: Waveguide coupling rate Γ (Γ0 units, >= 0).
        group_velocity: Group velocity in the same unit system.

    Returns:
        V = sqrt(Γ·v_g) >= 0.
    """
    if big_gamma < 0:
        raise DomainError(f"big_gamma must be non-negative, got {big_gamma}")
    if not group_velocity > 0:
        raise DomainError(f"group_velocity must be positive, got {group_velocity}")
    return math.sqrt(big_gamma * group_velocity)
