import time

import pytest

from vcburgers.runner import ExperimentConfig, run_lbm
from vcburgers.solutions import example_preset

SNAPSHOT_TIMES = (0.2, 1.0, 1.8)


@pytest.fixture(scope="session")
def full_run():
    """Cached default-discretization runs of the preset experiments.

    Returns a getter: full_run(k) -> dict with grid, snapshots, tau range
    and wall-clock seconds.  Each example is simulated once per session.
    """
    cache = {}

    def get(k):
        if k not in cache:
            preset = example_preset(k)
            config = ExperimentConfig(
                example=k, t_end=1.8, snapshot_times=SNAPSHOT_TIMES
            )
            start = time.perf_counter()
            grid, result = run_lbm(config, preset)
            elapsed = time.perf_counter() - start
            cache[k] = {
                "preset": preset,
                "config": config,
                "grid": grid,
                "snapshots": result.snapshots,
                "tau_min": result.tau_min,
                "tau_max": result.tau_max,
                "seconds": elapsed,
            }
        return cache[k]

    return get
