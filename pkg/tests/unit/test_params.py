"""Unit tests for units, emitter parameters and chain geometry."""

import math

import numpy as np
import pytest

from wqed_ladder.exceptions import DomainError
from wqed_ladder.params import (
    SPEED_OF_LIGHT,
    ChiralityMode,
    EmitterChain,
    EmitterParams,
    UnitSystem,
    build_periodic_chain,
    chain_from_separations,
    coupling_amplitude,
)


class TestUnitSystem:
    """Tests for UnitSystem."""

    def test_default_values(self) -> None:
        """Test that defaults match the reference emitter."""
        units = UnitSystem()
        assert units.gamma0_hz == 7.5e6
        assert units.lambda_e_nm == 655.0
        assert units.group_velocity == SPEED_OF_LIGHT

    def test_wavenumber_per_nm(self) -> None:
        """Test the wavenumber carried by one Γ0 of detuning."""
        units = UnitSystem()
        expected = 2 * math.pi * 7.5e6 * 1e-9 / SPEED_OF_LIGHT
        assert units.wavenumber_per_nm() == pytest.approx(expected, rel=1e-15)
        assert units.wavenumber_per_nm(0.5) == pytest.approx(2 * expected, rel=1e-15)

    def test_dimensionless_separation(self) -> None:
        """Test that λ_e/20 maps to R = π/10."""
        assert UnitSystem().dimensionless_separation(32.75) == pytest.approx(math.pi / 10)

    @pytest.mark.parametrize(
        "kwargs",
        [{"gamma0_hz": 0.0}, {"lambda_e_nm": -1.0}, {"group_velocity": 0.0}],
    )
    def test_invalid_values(self, kwargs: dict) -> None:
        """Test that non-positive scales are rejected."""
        with pytest.raises(DomainError):
            UnitSystem(**kwargs)

    def test_invalid_relative_velocity(self) -> None:
        """Test that a non-positive relative velocity is rejected."""
        with pytest.raises(DomainError):
            UnitSystem().wavenumber_per_nm(0.0)


class TestEmitterParams:
    """Tests for EmitterParams."""

    def test_default_values(self) -> None:
        """Test default rates and dipole angle."""
        params = EmitterParams()
        assert params.gamma == 6.86
        assert params.big_gamma_bottom == 11.03
        assert params.big_gamma_top == 11.03
        assert params.theta_dipole == math.pi / 2
        assert params.left_right_ratio == 1.0

    def test_zero_rates_allowed(self) -> None:
        """Test that zero rates are valid."""
        params = EmitterParams(gamma=0.0, big_gamma_bottom=0.0, big_gamma_top=0.0)
        assert params.gamma == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"gamma": -0.1},
            {"big_gamma_bottom": -1.0},
            {"big_gamma_top": math.inf},
            {"left_right_ratio": -0.5},
            {"theta_dipole": -0.1},
            {"theta_dipole": 4.0},
        ],
    )
    def test_invalid_values(self, kwargs: dict) -> None:
        """Test that out-of-domain rates and angles are rejected."""
        with pytest.raises(DomainError):
            EmitterParams(**kwargs)


class TestChiralityMode:
    """Tests for ChiralityMode."""

    def test_values(self) -> None:
        """Test string values used by the configuration."""
        assert ChiralityMode("chiral") is ChiralityMode.CHIRAL
        assert ChiralityMode("bidirectional") is ChiralityMode.BIDIRECTIONAL


class TestEmitterChain:
    """Tests for EmitterChain."""

    def test_count_and_separations(self) -> None:
        """Test count and successive separations."""
        chain = EmitterChain(np.array([0.0, 10.0, 25.0]))
        assert chain.count == 3
        np.testing.assert_array_equal(chain.separations_nm, [10.0, 15.0])

    def test_positions_are_read_only(self) -> None:
        """Test that stored positions cannot be mutated."""
        chain = EmitterChain(np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            chain.positions_nm[0] = 5.0

    def test_input_array_is_copied(self) -> None:
        """Test that mutating the caller's array does not affect the chain."""
        positions = np.array([0.0, 1.0])
        chain = EmitterChain(positions)
        positions[1] = 100.0
        assert chain.positions_nm[1] == 1.0

    def test_empty_chain_rejected(self) -> None:
        """Test that a chain needs at least one emitter."""
        with pytest.raises(DomainError):
            EmitterChain(np.array([]))

    @pytest.mark.parametrize("positions", [[0.0, 0.0], [0.0, 2.0, 1.0], [0.0, math.nan]])
    def test_invalid_positions(self, positions: list) -> None:
        """Test that coincident, unordered or non-finite positions are rejected."""
        with pytest.raises(DomainError):
            EmitterChain(np.array(positions))

    def test_shifted(self) -> None:
        """Test that shifting preserves separations and parameters."""
        params = EmitterParams(gamma=1.0)
        chain = EmitterChain(np.array([0.0, 3.0, 7.0]), params)
        shifted = chain.shifted(100.0)
        np.testing.assert_array_equal(shifted.positions_nm, [100.0, 103.0, 107.0])
        assert shifted.params == params

    def test_equality_and_hash(self) -> None:
        """Test value equality and hashing."""
        a = EmitterChain(np.array([0.0, 1.0]))
        b = EmitterChain(np.array([0.0, 1.0]))
        c = EmitterChain(np.array([0.0, 2.0]))
        assert a == b
        assert hash(a) == hash(b)
        assert a != c


class TestChainBuilders:
    """Tests for chain builders and coupling amplitudes."""

    def test_build_periodic_chain(self) -> None:
        """Test periodic positions 0, d, 2d, ..."""
        chain = build_periodic_chain(4, 32.75)
        np.testing.assert_allclose(chain.positions_nm, [0.0, 32.75, 65.5, 98.25])

    def test_single_emitter_chain(self) -> None:
        """Test that N=1 is a valid chain."""
        chain = build_periodic_chain(1, 10.0)
        assert chain.count == 1
        assert chain.separations_nm.size == 0

    @pytest.mark.parametrize("n, spacing", [(0, 10.0), (-2, 10.0), (3, 0.0), (3, -1.0)])
    def test_build_periodic_chain_invalid(self, n: int, spacing: float) -> None:
        """Test that non-positive sizes and spacings are rejected."""
        with pytest.raises(DomainError):
            build_periodic_chain(n, spacing)

    def test_chain_from_separations(self) -> None:
        """Test that chains are anchored at zero."""
        chain = chain_from_separations([1.0, 2.0])
        np.testing.assert_array_equal(chain.positions_nm, [0.0, 1.0, 3.0])

    def test_coupling_amplitude(self) -> None:
        """Test V = sqrt(Γ·v)."""
        assert coupling_amplitude(4.0) == 2.0
        assert coupling_amplitude(2.0, 2.0) == 2.0
        assert coupling_amplitude(0.0) == 0.0

    def test_coupling_amplitude_invalid(self) -> None:
        """Test that negative rates and non-positive velocities are rejected."""
        with pytest.raises(DomainError):
            coupling_amplitude(-1.0)
        with pytest.raises(DomainError):
            coupling_amplitude(1.0, 0.0)
