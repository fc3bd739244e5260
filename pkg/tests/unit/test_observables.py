"""Unit tests for derived observables."""

import logging
import math

import numpy as np
import pytest

from wqed_ladder.exceptions import DomainError, UndefinedEfficiencyError
from wqed_ladder.observables import (
    conventional_localization_length,
    conventional_localization_length_error,
    localization_length,
    localization_length_error,
    pmax_from_spectrum,
    pmax_scan,
    refine_peak,
    routing_efficiency,
    routing_efficiency_array,
    scan_grid,
    spectrum,
)
from wqed_ladder.params import ChiralityMode, EmitterParams, build_periodic_chain
from wqed_ladder.scatter import PortProbabilities, ScatterTemplate, solve_spectrum

LATTICE_SPACING_NM = 32.75


class TestRoutingEfficiency:
    """Tests for routing_efficiency."""

    def test_all_top(self) -> None:
        """Test ξ = +1 when everything reaches Port 4."""
        assert routing_efficiency(PortProbabilities(1.0, 0.0, 0.0, 0.0)) == 1.0

    def test_all_bottom(self) -> None:
        """Test ξ = -1 when everything stays in Port 2."""
        assert routing_efficiency(PortProbabilities(0.0, 0.5, 0.0, 0.0)) == -1.0

    def test_undefined(self) -> None:
        """Test that zero transmitted flux raises."""
        with pytest.raises(UndefinedEfficiencyError):
            routing_efficiency(PortProbabilities(0.0, 0.0, 0.3, 0.2))

    def test_array_marks_undefined_points(self) -> None:
        """Test NaN where both transmissions vanish."""
        xi = routing_efficiency_array(np.array([0.75, 0.0, 0.0]), np.array([0.25, 0.0, 1.0]))
        assert xi[0] == 0.5
        assert math.isnan(xi[1])
        assert xi[2] == -1.0


class TestSpectrum:
    """Tests for spectrum."""

    def test_uncoupled_chain(self) -> None:
        """Test that Γ = 0 gives P2 = 1 and ξ = -1 everywhere."""
        params = EmitterParams(big_gamma_bottom=0.0, big_gamma_top=0.0)
        problem = ScatterTemplate(params=params).bind(build_periodic_chain(3, 30.0))
        result = spectrum(problem, np.linspace(-10.0, 10.0, 11))
        np.testing.assert_array_equal(result.t_bottom, np.ones(11))
        np.testing.assert_array_equal(result.xi, -np.ones(11))
        assert result.metadata["n"] == 3
        assert result.metadata["disorder"] == "periodic"

    def test_probabilities_in_range(self) -> None:
        """Test 0 <= P <= 1 and non-negative loss."""
        problem = ScatterTemplate().bind(build_periodic_chain(5, LATTICE_SPACING_NM))
        result = spectrum(problem, np.linspace(-100.0, 100.0, 201))
        assert np.all((result.t_top >= 0) & (result.t_top <= 1))
        assert np.all(result.loss >= -1e-12)
        assert result.error_of("t_top").shape == (201,)
        assert not np.any(result.error_of("t_top"))

    @pytest.mark.parametrize("grid", [[], [1.0, 0.0], [0.0, 0.0], [0.0, math.inf]])
    def test_invalid_grid(self, grid: list) -> None:
        """Test that empty, unordered or non-finite grids are rejected."""
        problem = ScatterTemplate().bind(build_periodic_chain(2, LATTICE_SPACING_NM))
        with pytest.raises(DomainError):
            spectrum(problem, grid)

    def test_warns_on_undefined_efficiency(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that undefined ξ is logged and marked NaN, not raised."""
        params = EmitterParams(gamma=0.0, big_gamma_bottom=4.0, big_gamma_top=0.0)
        template = ScatterTemplate(params=params, mode=ChiralityMode.BIDIRECTIONAL)
        problem = template.bind(build_periodic_chain(1, 1.0))
        with caplog.at_level(logging.WARNING, logger="wqed_ladder"):
            result = spectrum(problem, [0.0, 1.0])
        assert math.isnan(result.xi[0])
        assert result.r_bottom[0] == pytest.approx(1.0)
        assert not math.isnan(result.xi[1])
        assert "undefined" in caplog.text


class TestScanGrid:
    """Tests for scan_grid."""

    def test_endpoints_and_size(self) -> None:
        """Test an inclusive grid."""
        grid = scan_grid((-300.0, 300.0), 0.1)
        assert grid.size == 6001
        assert grid[0] == -300.0
        assert grid[-1] == 300.0

    @pytest.mark.parametrize("delta_range, step", [((1.0, 1.0), 0.1), ((0.0, 1.0), 0.0)])
    def test_invalid(self, delta_range: tuple, step: float) -> None:
        """Test that empty ranges and non-positive steps are rejected."""
        with pytest.raises(DomainError):
            scan_grid(delta_range, step)


class TestPeakScan:
    """Tests for P_max and Δ_max."""

    def setup_method(self) -> None:
        """Set up test fixtures."""
        self.template = ScatterTemplate()

    def test_single_emitter(self) -> None:
        """Test P_max(N=1) = Γ²/(γ/2 + Γ)² at Δ = 0."""
        (result,) = pmax_scan([1], self.template, LATTICE_SPACING_NM)
        assert result.p_max == pytest.approx(0.58185, abs=1e-4)
        assert abs(result.delta_max) < 1e-3
        assert result.boundary_flag is False

    def test_two_emitters(self) -> None:
        """Test the periodic pair at λ_e/20."""
        (result,) = pmax_scan([2], self.template, LATTICE_SPACING_NM)
        assert result.p_max == pytest.approx(0.7389, abs=2e-3)
        assert result.delta_max == pytest.approx(25.6, abs=1.0)
        assert abs(result.p_max - 0.746) < 0.02
        assert abs(result.delta_max - 25.3) < 3.0

    def test_results_follow_input_order(self) -> None:
        """Test one result per requested N, in order."""
        results = pmax_scan([2, 1], self.template, LATTICE_SPACING_NM, (-100.0, 100.0), 0.5)
        assert [r.n for r in results] == [2, 1]

    def test_refinement_never_worse_than_grid(self) -> None:
        """Test that the refined peak is at least the coarse maximum."""
        problem = self.template.bind(build_periodic_chain(2, LATTICE_SPACING_NM))
        grid = scan_grid((-100.0, 100.0), 2.0)
        curve = solve_spectrum(problem, grid)
        coarse = pmax_from_spectrum(grid, curve.t_top, 2)
        refined = refine_peak(problem, grid, curve.t_top)
        assert refined.p_max >= coarse.p_max
        assert abs(refined.delta_max - coarse.delta_max) <= 2.0

    def test_boundary_flag(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test a maximum on the edge of the scanned range."""
        with caplog.at_level(logging.WARNING, logger="wqed_ladder"):
            (result,) = pmax_scan([1], self.template, LATTICE_SPACING_NM, (50.0, 100.0), 0.5)
        assert result.boundary_flag is True
        assert result.delta_max == 50.0
        assert "boundary" in caplog.text


class TestLocalizationLength:
    """Tests for localization length estimators."""

    def test_values(self) -> None:
        """Test N/⟨T_t⟩."""
        assert localization_length(1.0, 10) == 10.0
        assert localization_length(0.5, 20) == 40.0

    def test_monotone_in_transmission(self) -> None:
        """Test that lower transmission means a longer length."""
        lengths = [localization_length(t, 5) for t in (0.9, 0.5, 0.1)]
        assert lengths == sorted(lengths)

    def test_zero_transmission(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test the infinite length at zero transmission."""
        with caplog.at_level(logging.WARNING, logger="wqed_ladder"):
            assert localization_length(0.0, 5) == math.inf
        assert "infinite" in caplog.text

    @pytest.mark.parametrize("mean_t, n", [(-0.1, 5), (1.5, 5), (0.5, 0)])
    def test_invalid(self, mean_t: float, n: int) -> None:
        """Test out-of-range inputs."""
        with pytest.raises(DomainError):
            localization_length(mean_t, n)

    def test_error_propagation(self) -> None:
        """Test N·stderr/⟨T_t⟩²."""
        assert localization_length_error(0.5, 0.01, 10) == pytest.approx(0.4)
        assert localization_length_error(0.0, 0.01, 10) == math.inf

    def test_conventional(self) -> None:
        """Test -2N/⟨ln T_t⟩."""
        assert conventional_localization_length(-1.0, 5) == 10.0
        assert conventional_localization_length(0.0, 5) == math.inf
        assert conventional_localization_length(-math.inf, 5) == 0.0

    def test_conventional_error_propagation(self) -> None:
        """Test 2N·stderr/⟨ln T_t⟩²."""
        assert conventional_localization_length_error(-2.0, 0.1, 5) == pytest.approx(0.25)
        assert conventional_localization_length_error(0.0, 0.1, 5) == math.inf
        assert math.isnan(conventional_localization_length_error(-math.inf, 0.1, 5))

    @pytest.mark.parametrize("mean_log", [0.5, math.nan])
    def test_conventional_invalid(self, mean_log: float) -> None:
        """Test that positive or NaN mean logs are rejected."""
        with pytest.raises(DomainError):
            conventional_localization_length(mean_log, 5)
