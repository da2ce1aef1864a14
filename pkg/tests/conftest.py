import numpy as np
import pytest

from lpturb.core import GridSpec
from lpturb.generate import random_solenoidal


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32, 1.0)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(64, 1.0)


@pytest.fixture(scope="session")
def random_field_32(grid32):
    return random_solenoidal(grid32, -1.0, [1, 2, 3], seed=42)


@pytest.fixture(scope="session")
def forced_emhd_run():
    """Forced EMHD 64^3 run, 2000 steps, shared by the acceptance tests.

    Returns (run_result, config).  Expensive (~6 min); session-scoped so it
    executes once.
    """
    from lpturb.solver import (ForcingSpec, PhysicalParams, SolverConfig,
                               SolverState, run)

    g = GridSpec(64, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2, 3], seed=11, amplitude=0.5)
    params = PhysicalParams(nu=0.0, mu=2e-3, d_i=0.05, L=1.0)
    config = SolverConfig(model="EMHD", params=params, dt=2e-4, t_end=0.4,
                          forcing=ForcingSpec(shells=(1, 2), amplitude=0.3,
                                              seed=5),
                          snapshot_stride=100)
    result = run(config, SolverState(0.0, B))
    return result, config


@pytest.fixture(scope="session")
def forced_emhd_window(forced_emhd_run):
    """Second-half averaging window of the forced run."""
    result, config = forced_emhd_run
    t_half = 0.5 * config.t_end
    return [s for s in result.snapshots if s.t >= t_half - 1e-9]
