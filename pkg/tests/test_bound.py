import pytest

import nestedvrp as nv
from nestedvrp.bound import lower_bound
from nestedvrp.exact import solve_exact
from nestedvrp.generator import GenSpec, Pattern, generate

from conftest import desk3_exact_matrices, make_desk3


def test_location_at_depot_zero_bound():
    inst = nv.Instance(
        id="zero",
        locations=(
            nv.Location(id=0, x=0.0, y=0.0),
            nv.Location(id=1, x=0.0, y=0.0, obs_s=0.0),
        ),
    )
    lb = lower_bound(inst)
    assert lb.seconds == 0.0
    assert lb.certified


def test_desk_loose(desk3, desk3_matrices):
    lb = lower_bound(desk3, matrices=desk3_matrices)
    # tour 300 + observations 200, no forced swap
    assert lb.seconds == pytest.approx(500.0)
    assert lb.certified


def test_desk_tight(desk3_tight, desk3_matrices):
    lb = lower_bound(desk3_tight, matrices=desk3_matrices)
    # 500 s of flying and observing drains two 250 s batteries
    assert lb.seconds == pytest.approx(700.0)


def test_heuristic_flag_past_exact_budget():
    inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=20, alpha=1, seed=1))
    lb = lower_bound(inst)
    assert not lb.certified
    assert lb.seconds > 0


def test_monotone_in_parameters():
    base = make_desk3()
    mats = desk3_exact_matrices()

    def with_params(battery, swap):
        return nv.Instance(
            id="m", locations=base.locations, drone_speed=30.0,
            truck_speed=30.0, battery_s=battery, swap_s=swap)

    batteries = [200.0, 260.0, 500.0, 900.0]
    values = [lower_bound(with_params(b, 100.0), matrices=mats).seconds
              for b in batteries]
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
    swaps = [0.0, 50.0, 150.0]
    values = [lower_bound(with_params(250.0, s), matrices=mats).seconds
              for s in swaps]
    assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))


def test_monotone_in_observation_time():
    def with_obs(extra):
        base = make_desk3()
        locs = list(base.locations)
        locs[1] = nv.Location(id=1, x=locs[1].x, y=locs[1].y,
                              obs_s=locs[1].obs_s + extra)
        return nv.Instance(id="obs", locations=tuple(locs), drone_speed=30.0,
                           truck_speed=30.0)

    values = [lower_bound(with_obs(extra)).seconds
              for extra in (0.0, 100.0, 300.0, 600.0)]
    assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))


def test_bounds_shipment_free_optima():
    checked = 0
    for seed in range(8):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=5,
                                alpha=(seed % 3) + 1, seed=seed + 50))
        sol = solve_exact(inst)
        if any(u.kind == nv.UnitKind.SHIPMENT for u in sol.units):
            continue
        lb = lower_bound(inst)
        assert lb.seconds <= sol.makespan + 1e-6
        checked += 1
    assert checked >= 3


def test_documented_shipment_corner(desk3_tight, desk3_matrices):
    # in-transit swaps absorb service time that the energy-conservation
    # argument behind the bound does not model, so with a tiny battery the
    # bound can exceed the optimum; kept as documentation, not asserted away
    sol = solve_exact(desk3_tight, matrices=desk3_matrices)
    lb = lower_bound(desk3_tight, matrices=desk3_matrices)
    assert any(u.kind == nv.UnitKind.SHIPMENT for u in sol.units)
    assert lb.seconds > sol.makespan


def test_folded_observations_add_offset():
    inst = nv.Instance(
        id="fold",
        locations=(
            nv.Location(id=0, x=0.0, y=0.0),
            nv.Location(id=1, x=30.0, y=0.0, obs_s=2000.0),
        ),
    )
    lb = lower_bound(inst)
    # offset 2 * (900 + 100), residual observation 200, tour 200
    assert lb.seconds == pytest.approx(2000.0 + 200.0 + 200.0)
