"""Dipole-dipole interaction between emitters.

J(R) is purely real and depends only on |r_i - r_j|, so the coupling
matrix of a chain is symmetric with a zero diagonal. There is no range
cutoff: all N(N-1)/2 pairs are evaluated.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import DomainError
from .params import EmitterChain, UnitSystem

ArrayLike = Union[float, np.ndarray]


def ddi_coupling(r_dimensionless: ArrayLike, theta: float = math.pi / 2) -> ArrayLike:
    """Evaluate J(R) in units of Γ0.

    J = (3/4)[cosR/R³ + sinR/R² - cosR/R] + cos²θ [cosR/R - 3cosR/R³ - 3sinR/R²]

    Args:
        r_dimensionless: R = ω_eg·d/c, scalar or array, strictly positive.
        theta: Angle between dipole moment and separation vector.

    Returns:
        J with the same shape as ``r_dimensionless``.

    Raises:
        DomainError: If any R <= 0 or is not finite.
    """
    r = np.asarray(r_dimensionless, dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("ddi_coupling requires finite R > 0 (coincident emitters)")

    cos_r = np.cos(r)
    sin_r = np.sin(r)
    transverse = 0.75 * (cos_r / r**3 + sin_r / r**2 - cos_r / r)
    longitudinal = math.cos(theta) ** 2 * (cos_r / r - 3.0 * cos_r / r**3 - 3.0 * sin_r / r**2)
    value = transverse + longitudinal

    if np.ndim(r_dimensionless) == 0:
        return float(value)
    return value


def ddi_at_distance(
    distance_nm: ArrayLike,
    units: UnitSystem = UnitSystem(),
    theta: float = math.pi / 2,
) -> ArrayLike:
    """Evaluate J for a physical separation in nm."""
    r = units.dimensionless_separation(np.asarray(distance_nm, dtype=float))
    if np.ndim(distance_nm) == 0:
        return ddi_coupling(float(r), theta)
    return ddi_coupling(r, theta)


@dataclass(frozen=True)
class DdiMatrix:
    """Symmetric pairwise coupling matrix J_ij (Γ0 units, zero diagonal).

    Attributes:
        values: Read-only n x n real array.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DomainError(f"DDI matrix must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("DDI matrix entries must be finite")
        if not np.array_equal(values, values.T):
            raise DomainError("DDI matrix must be symmetric")
        if np.any(np.diag(values) != 0.0):
            raise DomainError("DDI matrix must have a zero diagonal (no self-coupling)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def ddi_matrix(chain: EmitterChain, units: UnitSystem = UnitSystem()) -> DdiMatrix:
    """Assemble J_ij = J(2π|x_i - x_j|/λ_e, θ) for every emitter pair.

    Args:
        chain: Emitter chain (strictly increasing positions).
        units: Unit conventions providing λ_e.

    Returns:
        The symmetric DdiMatrix.

    Raises:
        DomainError: If two emitters coincide.
    """
    n = chain.count
    values = np.zeros((n, n), dtype=float)
    if n > 1:
        upper_i, upper_j = np.triu_indices(n, k=1)
        distances = chain.positions_nm[upper_j] - chain.positions_nm[upper_i]
        couplings = ddi_at_distance(distances, units, chain.params.theta_dipole)
        values[upper_i, upper_j] = couplings
        values[upper_j, upper_i] = couplings
    return DdiMatrix(values)
