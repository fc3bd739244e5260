"""Closed-form transport coefficients for one and two emitters.

These formulas are written out independently of :mod:`wqed_ladder.scatter`
and serve as oracles for the general solver. The two-emitter factor
e^{r₁₂Δ} is read as e^{iθ} with θ = r₁₂Δ; only this reading satisfies
t_t2 = t_b2 - 1, which follows from the coefficient recursions.
"""

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Tuple

from .exceptions import DomainError, PoleError

if TYPE_CHECKING:
    from .scatter import ScatterProblem


@dataclass(frozen=True)
class TwoEmitterParams:
    """Inputs of the two-emitter formulas (all rates in Γ0).

    Attributes:
        delta: Detuning Δ.
        gamma: Non-waveguide decay rate γ.
        big_gamma: Waveguide coupling Γ (equal for both guides).
        j_ddi: Dipole-dipole coupling J.
        phase: Propagation phase θ = r₁₂Δ between the emitters (rad).
    """

    delta: float
    gamma: float
    big_gamma: float
    j_ddi: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        for name in ("delta", "gamma", "big_gamma", "j_ddi", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)}")
        if self.gamma < 0 or self.big_gamma < 0:
            raise DomainError(
                f"gamma and big_gamma must be non-negative, got {self.gamma}, {self.big_gamma}"
            )


def _denominator(p: TwoEmitterParams) -> complex:
    j, g, big_g, d = p.j_ddi, p.gamma, p.big_gamma, p.delta
    value = 4 * j**2 - 8j * cmath.exp(1j * p.phase) * j * big_g + (g + 2 * big_g - 2j * d) ** 2
    if value == 0:
        raise PoleError(f"two-emitter denominator vanishes at {p}")
    return value


def t_b2_closed(p: TwoEmitterParams) -> complex:
    """Bottom-guide (Port 2) transmission amplitude of two emitters."""
    j, g, big_g, d = p.j_ddi, p.gamma, p.big_gamma, p.delta
    numerator = 4 * j**2 + 4 * big_g**2 + (g - 2j * d) ** 2 + 8 * j * big_g * math.sin(p.phase)
    return numerator / _denominator(p)


def t_t2_closed(p: TwoEmitterParams) -> complex:
    """Top-guide (Port 4) transmission amplitude of two emitters."""
    j, g, big_g, d = p.j_ddi, p.gamma, p.big_gamma, p.delta
    numerator = 4j * big_g * (1j * g + 2 * d + 2 * j * math.cos(p.phase))
    return numerator / _denominator(p)


def xi2_closed(p: TwoEmitterParams) -> complex:
    """Two-emitter routing expression, evaluated term by term.

    The expression equals the amplitude ratio (t_t2 - t_b2)/(t_t2 + t_b2);
    it reduces to +1 when t_b2 = 0 and to -1 when t_t2 = 0.
    """
    j, g, big_g, d = p.j_ddi, p.gamma, p.big_gamma, p.delta
    c, s = math.cos(p.phase), math.sin(p.phase)
    numerator = (
        4 * j**2 + g**2 + 4 * g * big_g + 4 * big_g**2
        - 4j * g * d - 8j * big_g * d - 4 * d**2
        - 8j * j * big_g * c + 8 * j * big_g * s
    )
    denominator = (
        4 * j**2 + g**2 - 4 * g * big_g + 4 * big_g**2
        - 4j * g * d + 8j * big_g * d - 4 * d**2
        + 8j * j * big_g * c + 8 * j * big_g * s
    )
    if denominator == 0:
        raise PoleError(f"routing-efficiency denominator vanishes at {p}")
    return -numerator / denominator


def xi2_probability_closed(p: TwoEmitterParams) -> float:
    """Routing efficiency (|t_t2|² - |t_b2|²)/(|t_t2|² + |t_b2|²).

    Raises:
        PoleError: If both transmissions vanish.
    """
    top = abs(t_t2_closed(p)) ** 2
    bottom = abs(t_b2_closed(p)) ** 2
    if top + bottom == 0:
        raise PoleError(f"no transmitted flux at {p}")
    return (top - bottom) / (top + bottom)


def t_single_closed(delta: float, gamma: float, big_gamma: float) -> Tuple[complex, complex]:
    """Transmission amplitudes of one emitter coupled equally to both guides.

    Returns:
        (t_b, t_t) = ((Δ + iγ/2), -iΓ) / (Δ + i(γ/2 + Γ)).
    """
    denominator = delta + 1j * (gamma / 2 + big_gamma)
    if denominator == 0:
        raise PoleError(f"single-emitter pole at delta={delta}, gamma={gamma}, Gamma={big_gamma}")
    return (delta + 0.5j * gamma) / denominator, -1j * big_gamma / denominator


def two_emitter_params(problem: "ScatterProblem") -> TwoEmitterParams:
    """Read the closed-form inputs off a two-emitter transport problem.

    The problem must be chiral with Γ_b = Γ_t and equal group velocities;
    θ is the bottom-guide phase k·r₁₂ accumulated between the emitters.

    Raises:
        DomainError: If the problem is outside the closed-form setting.
    """
    if problem.chain.count != 2:
        raise DomainError(f"closed forms need exactly two emitters, got {problem.chain.count}")
    params = problem.params
    if params.big_gamma_bottom != params.big_gamma_top:
        raise DomainError("closed forms need equal coupling to both waveguides")
    if problem.mode.value != "chiral" or problem.v_bottom != problem.v_top:
        raise DomainError("closed forms need chiral coupling and equal group velocities")
    separation = float(problem.chain.separations_nm[0])
    return TwoEmitterParams(
        delta=problem.delta,
        gamma=params.gamma,
        big_gamma=params.big_gamma_bottom,
        j_ddi=float(problem.ddi.values[0, 1]),
        phase=problem.bottom_wavenumber() * separation,
    )
