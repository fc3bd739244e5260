"""Shared fixtures for wqed-ladder tests."""

from typing import Any, Dict

import pytest

from wqed_ladder.config import SimulationConfig

# Coarse grids that keep command-line runs to a few seconds.
SMALL_GRIDS: Dict[str, Any] = {
    "delta_min": -60.0,
    "delta_max": 60.0,
    "delta_step": 1.0,
    "ddi_l_min_nm": 20.0,
    "ddi_l_max_nm": 80.0,
    "ddi_l_step_nm": 5.0,
    "map_delta_min": 0.0,
    "map_delta_max": 200.0,
    "map_delta_step": 1.0,
    "map_l_min": 0.025,
    "map_l_max": 0.05,
    "map_l_step": 0.025,
    "n_values": [2],
    "n_realizations": 4,
    "n_jobs": 1,
}


@pytest.fixture
def small_config(tmp_path: Any) -> SimulationConfig:
    """Default physics on coarse grids, writing into a temporary directory."""
    return SimulationConfig(output_dir=str(tmp_path / "results"), **SMALL_GRIDS)
