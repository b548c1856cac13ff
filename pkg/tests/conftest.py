import math

import numpy as np
import pytest

from nestedvrp import Instance, Location, TravelMatrices


def make_desk3(battery: float = 900.0) -> Instance:
    """Three-point desk case: depot plus two locations, every leg 100 s for
    both vehicles, both observations 100 s, swap 100 s."""
    side = 30.0  # units; 3000 m at 30 m/s = 100 s
    return Instance(
        id=f"desk3-b{battery:g}",
        locations=(
            Location(id=0, x=0.0, y=0.0, obs_s=0.0),
            Location(id=1, x=side, y=0.0, obs_s=100.0),
            Location(id=2, x=side / 2, y=side * math.sqrt(3) / 2, obs_s=100.0),
        ),
        drone_speed=30.0,
        truck_speed=30.0,
        battery_s=battery,
        swap_s=100.0,
        unit_scale=100.0,
    )


def desk3_exact_matrices() -> TravelMatrices:
    """The desk case with leg times exactly 100.0 s (no float residue)."""
    tau = np.array(
        [[0.0, 100.0, 100.0], [100.0, 0.0, 100.0], [100.0, 100.0, 0.0]]
    )
    tau.setflags(write=False)
    return TravelMatrices(tau_d=tau, tau_t=tau)


@pytest.fixture
def desk3() -> Instance:
    return make_desk3()


@pytest.fixture
def desk3_tight() -> Instance:
    return make_desk3(battery=250.0)


@pytest.fixture
def desk3_matrices() -> TravelMatrices:
    return desk3_exact_matrices()
