import time

import pytest

from fhnburst import ModelParams
from fhnburst.sweep import SweepSpec, run_sweep


@pytest.fixture(scope="session")
def params():
    return ModelParams()


DESK_OMEGA = (0.01, 0.04, 0.03 / 19)
DESK_E = (0.40, 0.55, 0.15 / 19)


@pytest.fixture(scope="session")
def desk_grids(params):
    """The 20x20 desk-scale diagram, swept with 1 and with 4 workers."""
    spec1 = SweepSpec(omega_range=DESK_OMEGA, e_range=DESK_E, workers=1)
    spec4 = SweepSpec(omega_range=DESK_OMEGA, e_range=DESK_E, workers=4)
    t0 = time.time()
    grid1 = run_sweep(spec1, params)
    t1 = time.time()
    grid4 = run_sweep(spec4, params)
    t2 = time.time()
    grid1.meta["elapsed"] = t1 - t0
    grid4.meta["elapsed"] = t2 - t1
    return grid1, grid4
