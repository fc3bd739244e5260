"""Unit tests for position disorder and seeding."""

import math

import numpy as np
import pytest

from wqed_ladder import disorder
from wqed_ladder.ddi import ddi_at_distance
from wqed_ladder.disorder import (
    DisorderSpec,
    draw_separations,
    mean_ddi_curve,
    realization_rng,
    sample_chain,
)
from wqed_ladder.exceptions import DomainError, SamplingError
from wqed_ladder.params import EmitterParams, build_periodic_chain


class TestDisorderSpec:
    """Tests for DisorderSpec."""

    def test_default_guard(self) -> None:
        """Test that the guard defaults to μ/1000."""
        spec = DisorderSpec(mu_nm=32.75)
        assert spec.guard_nm == pytest.approx(0.03275)
        assert spec.sigma_nm == pytest.approx(3.275)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mu_nm": 0.0},
            {"mu_nm": 10.0, "sigma_fraction": -0.1},
            {"mu_nm": 10.0, "min_separation_nm": 10.0},
            {"mu_nm": 10.0, "min_separation_nm": 0.0},
            {"mu_nm": 10.0, "master_seed": -1},
        ],
    )
    def test_invalid_values(self, kwargs: dict) -> None:
        """Test that invalid distributions are rejected."""
        with pytest.raises(DomainError):
            DisorderSpec(**kwargs)

    def test_with_mean_keeps_fractions(self) -> None:
        """Test that rescaling keeps σ/μ and guard/μ."""
        spec = DisorderSpec(mu_nm=10.0, sigma_fraction=0.2, min_separation_nm=0.5)
        scaled = spec.with_mean(40.0)
        assert scaled.mu_nm == 40.0
        assert scaled.sigma_fraction == 0.2
        assert scaled.guard_nm == pytest.approx(2.0)
        assert scaled.master_seed == spec.master_seed

    def test_with_sigma(self) -> None:
        """Test replacing the disorder strength."""
        assert DisorderSpec(mu_nm=10.0).with_sigma(0.25).sigma_fraction == 0.25


class TestSampling:
    """Tests for realization seeding and chain sampling."""

    def setup_method(self) -> None:
        """Set up test fixtures."""
        self.spec = DisorderSpec(mu_nm=32.75, sigma_fraction=0.2, master_seed=7)

    def test_realization_rng_is_reproducible(self) -> None:
        """Test that the same (seed, stream, index) gives the same stream."""
        a = realization_rng(7, 0, 3).normal(size=5)
        b = realization_rng(7, 0, 3).normal(size=5)
        np.testing.assert_array_equal(a, b)

    def test_realization_rng_streams_differ(self) -> None:
        """Test that stream and index both select independent streams."""
        base = realization_rng(7, 0, 3).normal(size=5)
        assert not np.array_equal(base, realization_rng(7, 1, 3).normal(size=5))
        assert not np.array_equal(base, realization_rng(7, 0, 4).normal(size=5))
        assert not np.array_equal(base, realization_rng(8, 0, 3).normal(size=5))

    def test_negative_index_rejected(self) -> None:
        """Test that realization indices are non-negative."""
        with pytest.raises(DomainError):
            realization_rng(7, 0, -1)

    def test_sample_chain_is_pure(self) -> None:
        """Test that sampling twice gives identical chains."""
        assert sample_chain(self.spec, 10, realization_index=5) == sample_chain(
            self.spec, 10, realization_index=5
        )

    def test_sample_chain_depends_on_index(self) -> None:
        """Test that different realizations differ."""
        assert sample_chain(self.spec, 10, realization_index=0) != sample_chain(
            self.spec, 10, realization_index=1
        )

    def test_sample_chain_anchor_and_guard(self) -> None:
        """Test x_1 = 0 and every gap above the guard."""
        for index in range(20):
            chain = sample_chain(self.spec, 20, realization_index=index)
            assert chain.positions_nm[0] == 0.0
            assert np.all(chain.separations_nm >= self.spec.guard_nm)

    def test_sample_chain_keeps_params(self) -> None:
        """Test that emitter rates are attached to the chain."""
        params = EmitterParams(gamma=1.0)
        assert sample_chain(self.spec, 3, params).params == params

    def test_zero_sigma_is_periodic(self) -> None:
        """Test that σ = 0 reproduces the periodic chain exactly."""
        spec = self.spec.with_sigma(0.0)
        assert sample_chain(spec, 6, realization_index=9) == build_periodic_chain(6, 32.75)

    def test_single_emitter(self) -> None:
        """Test that N=1 draws nothing."""
        chain = sample_chain(self.spec, 1)
        np.testing.assert_array_equal(chain.positions_nm, [0.0])

    def test_invalid_size(self) -> None:
        """Test that N < 1 is rejected."""
        with pytest.raises(DomainError):
            sample_chain(self.spec, 0)

    def test_separation_statistics(self) -> None:
        """Test mean and spread of weakly truncated draws."""
        rng = realization_rng(1, 0, 0)
        values = draw_separations(rng, 32.75, 3.275, 0.03275, 20000)
        assert np.mean(values) == pytest.approx(32.75, abs=4 * 3.275 / math.sqrt(20000))
        assert np.std(values) == pytest.approx(3.275, rel=0.03)

    def test_guard_does_not_bias_mean(self) -> None:
        """Test guarded and raw Gaussian means within 2 standard errors at σ = 0.2μ."""
        mu, sigma, size = 32.75, 0.2 * 32.75, 20000
        guarded = draw_separations(realization_rng(3, 0, 0), mu, sigma, mu / 1000, size)
        raw = realization_rng(3, 0, 0).normal(mu, sigma, size)
        stderr = np.std(raw, ddof=1) / math.sqrt(size)
        assert abs(np.mean(guarded) - np.mean(raw)) < 2 * stderr
        assert np.mean(guarded) == pytest.approx(mu, abs=4 * sigma / math.sqrt(size))

    def test_heavy_truncation_respects_guard(self) -> None:
        """Test redrawing when a large share of draws falls below the guard."""
        values = draw_separations(realization_rng(1, 0, 0), 10.0, 10.0, 5.0, 1000)
        assert np.all(values >= 5.0)

    def test_exhausted_rejection_budget(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that an unsatisfiable guard raises SamplingError."""
        monkeypatch.setattr(disorder, "MAX_REJECTED_DRAWS", 5)
        with pytest.raises(SamplingError):
            draw_separations(realization_rng(1, 0, 0), 1.0, 1e-9, 2.0, 3)


class TestMeanDdiCurve:
    """Tests for the disorder-averaged J(L) curve."""

    def setup_method(self) -> None:
        """Set up test fixtures."""
        self.grid = np.array([30.0, 50.0, 80.0])

    def test_zero_sigma_is_exact(self) -> None:
        """Test that σ = 0 gives the periodic curve with zero error."""
        spec = DisorderSpec(mu_nm=10.0, sigma_fraction=0.0)
        curve = mean_ddi_curve(spec, self.grid, 50)
        for i, l_nm in enumerate(self.grid):
            assert curve.mean[i] == ddi_at_distance(float(l_nm))
        np.testing.assert_array_equal(curve.stderr, np.zeros(3))

    def test_single_realization_stderr_is_nan(self) -> None:
        """Test that one draw has no error estimate."""
        spec = DisorderSpec(mu_nm=10.0, sigma_fraction=0.2)
        curve = mean_ddi_curve(spec, self.grid, 1)
        assert np.all(np.isnan(curve.stderr))

    def test_reproducible(self) -> None:
        """Test that the curve is a pure function of the seed."""
        spec = DisorderSpec(mu_nm=10.0, sigma_fraction=0.2, master_seed=3)
        a = mean_ddi_curve(spec, self.grid, 200)
        b = mean_ddi_curve(spec, self.grid, 200)
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.stderr, b.stderr)

    def test_disorder_raises_near_field_mean(self) -> None:
        """Test that averaging the convex near field increases J."""
        spec = DisorderSpec(mu_nm=10.0, sigma_fraction=0.2)
        curve = mean_ddi_curve(spec, [50.0], 2000)
        assert curve.mean[0] > ddi_at_distance(50.0)

    def test_invalid_realizations(self) -> None:
        """Test that at least one realization is required."""
        with pytest.raises(DomainError):
            mean_ddi_curve(DisorderSpec(mu_nm=10.0), self.grid, 0)
