import math
import random

import pytest

import nestedvrp as nv
from nestedvrp.cnu import (
    BatteryParams,
    InfeasibleSequenceError,
    UnitCostQuery,
    build_open_task_sequence,
    build_task_sequence,
    solve_cnu,
    solve_cnu_open,
    unit_cost,
)
from nestedvrp.generator import GenSpec, Pattern, generate

from conftest import desk3_exact_matrices, make_desk3
from oracles import partition_cost, sequence_arrays

DESK = make_desk3()
DESK_TIGHT = make_desk3(battery=250.0)
MATS = desk3_exact_matrices()


def desk_seq(instance=DESK, route=(0, 1, 2, 0)):
    return build_task_sequence(route, instance, MATS)


class TestTaskSequence:
    def test_desk_durations(self):
        seq = desk_seq()
        assert seq.durations == (0.0, 100.0, 100.0, 100.0, 100.0, 100.0)
        assert seq.travel_mask == (False, True, False, True, False, True)
        assert seq.end_ids == (0, 1, 1, 2, 2, 0)

    def test_empty_route(self):
        inst = nv.Instance(
            id="empty", locations=(nv.Location(id=0, x=0.0, y=0.0),))
        mats = nv.build_travel_matrices(inst)
        seq = build_task_sequence((0, 0), inst, mats)
        assert seq.durations == (0.0, 0.0)

    def test_symmetric_route(self):
        seq = desk_seq(route=(0, 2, 1, 0))
        assert seq.durations == (0.0, 100.0, 100.0, 100.0, 100.0, 100.0)

    def test_malformed_route_rejected(self):
        with pytest.raises(nv.StructureError):
            desk_seq(route=(0, 1, 0))
        with pytest.raises(nv.StructureError):
            desk_seq(route=(1, 2, 0))


class TestUnitCost:
    def test_whole_mission_unit(self):
        seq = desk_seq()
        got = unit_cost(UnitCostQuery(seq, 0, 5), MATS,
                        BatteryParams(900.0, 100.0))
        assert got.kind == nv.UnitKind.NESTED
        assert got.cost == pytest.approx(600.0)
        assert got.drone_time == pytest.approx(500.0)
        assert got.truck_time == 0.0

    def test_shipment(self):
        seq = desk_seq()
        got = unit_cost(UnitCostQuery(seq, 4, 5), MATS,
                        BatteryParams(900.0, 100.0))
        assert got.kind == nv.UnitKind.SHIPMENT
        assert got.cost == pytest.approx(100.0)

    def test_infeasible_is_none(self):
        seq = desk_seq()
        assert unit_cost(UnitCostQuery(seq, 0, 5), MATS,
                         BatteryParams(250.0, 100.0)) is None

    def test_swap_waiver(self):
        seq = desk_seq()
        got = unit_cost(UnitCostQuery(seq, 3, 5, after_shipment=True), MATS,
                        BatteryParams(250.0, 100.0))
        assert got.cost == pytest.approx(200.0)
        assert not got.charged

    def test_mission_opening_shipment_pays_initial_fit(self):
        seq = desk_seq()
        got = unit_cost(UnitCostQuery(seq, 0, 1), MATS,
                        BatteryParams(900.0, 100.0))
        assert got.kind == nv.UnitKind.SHIPMENT
        assert got.cost == pytest.approx(200.0)
        assert got.charged


class TestSolveCnu:
    def test_desk_loose_battery(self):
        sol = solve_cnu(desk_seq(), MATS, BatteryParams(900.0, 100.0))
        assert sol.makespan == pytest.approx(600.0)
        assert len(sol.units) == 1
        assert sol.units[0].kind == nv.UnitKind.NESTED

    def test_desk_tight_battery(self):
        sol = solve_cnu(desk_seq(DESK_TIGHT), MATS,
                        BatteryParams(250.0, 100.0))
        assert sol.makespan == pytest.approx(600.0)
        kinds = [u.kind for u in sol.units]
        assert kinds == [nv.UnitKind.NESTED, nv.UnitKind.SHIPMENT,
                         nv.UnitKind.NESTED]
        assert [u.cost for u in sol.units] == pytest.approx([300.0, 100.0,
                                                             200.0])
        assert not sol.units[2].charged

    def test_empty_route(self):
        inst = nv.Instance(
            id="empty", locations=(nv.Location(id=0, x=0.0, y=0.0),))
        mats = nv.build_travel_matrices(inst)
        seq = build_task_sequence((0, 0), inst, mats)
        sol = solve_cnu(seq, mats, BatteryParams(900.0, 100.0))
        assert sol.makespan == 0.0
        assert sol.units == ()

    def test_infeasible_names_blocking_task(self):
        inst = nv.Instance(
            id="block",
            locations=(
                nv.Location(id=0, x=0.0, y=0.0),
                nv.Location(id=1, x=10.0, y=0.0, obs_s=1000.0),
            ),
            battery_s=900.0,
        )
        mats = nv.build_travel_matrices(inst)
        seq = build_task_sequence((0, 1, 0), inst, mats)
        with pytest.raises(InfeasibleSequenceError) as err:
            solve_cnu(seq, mats, BatteryParams(900.0, 100.0))
        assert err.value.task_index == 2
        assert err.value.location_id == 1

    def test_units_partition_tasks(self):
        for seed in range(5):
            inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=8, alpha=2,
                                    seed=seed))
            mats = nv.build_travel_matrices(inst)
            route = (0,) + tuple(range(1, 9)) + (0,)
            seq = build_task_sequence(route, inst, mats)
            sol = solve_cnu(seq, mats, BatteryParams.from_instance(inst))
            prev = 0
            for unit in sol.units:
                assert unit.span[0] == prev
                prev = unit.span[1]
            assert prev == seq.task_count
            covered = sorted(c for u in sol.units for c in u.covered)
            assert covered == list(range(1, 9))
            assert nv.validate_solution(inst, sol).ok


def _random_sequence_case(rng):
    n = rng.randint(2, 4)
    inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=n, alpha=rng.choice(
        [1, 2, 3]), seed=rng.randrange(10**6)))
    t_bl = rng.uniform(200.0, 1200.0)
    t_s = rng.uniform(0.0, 300.0)
    route = (0,) + tuple(rng.sample(range(1, n + 1), n)) + (0,)
    return inst, route, t_bl, t_s


class TestAgainstOracle:
    def test_dp_matches_exhaustive_partitions(self):
        rng = random.Random(2024)
        mishits = 0
        for _ in range(60):
            inst, route, t_bl, t_s = _random_sequence_case(rng)
            mats = nv.build_travel_matrices(inst)
            durations, travel, ends = sequence_arrays(route, inst, mats)
            want = partition_cost(durations, travel, ends,
                                  mats.tau_t.tolist(), t_bl, t_s)
            seq = build_task_sequence(route, inst, mats)
            try:
                got = solve_cnu(seq, mats, BatteryParams(t_bl, t_s)).makespan
            except InfeasibleSequenceError:
                got = math.inf
            if want == math.inf:
                assert got == math.inf
            else:
                assert got == pytest.approx(want, abs=1e-9)

    def test_shipment_only_modeling_never_worse(self):
        # allowing a lone travel task as an ordinary unit must not help
        rng = random.Random(77)
        for _ in range(40):
            inst, route, t_bl, t_s = _random_sequence_case(rng)
            mats = nv.build_travel_matrices(inst)
            durations, travel, ends = sequence_arrays(route, inst, mats)
            tau_t = mats.tau_t.tolist()
            restricted = partition_cost(durations, travel, ends, tau_t, t_bl,
                                        t_s)
            permissive = partition_cost(durations, travel, ends, tau_t, t_bl,
                                        t_s, allow_single_travel_nested=True)
            assert restricted == pytest.approx(permissive, abs=1e-9)

    def test_monotone_in_battery_and_swap(self):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=6, alpha=2,
                                seed=31))
        mats = nv.build_travel_matrices(inst)
        route = (0,) + tuple(range(1, 7)) + (0,)
        seq = build_task_sequence(route, inst, mats)

        def cost(t_bl, t_s):
            return solve_cnu(seq, mats, BatteryParams(t_bl, t_s)).makespan

        batteries = [500.0, 700.0, 900.0, 1200.0, 2000.0]
        values = [cost(b, 100.0) for b in batteries]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
        swaps = [0.0, 50.0, 100.0, 200.0]
        values = [cost(900.0, s) for s in swaps]
        assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))


class TestOpenSpans:
    def test_whole_span_matches_closed_solver(self):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=5, alpha=2,
                                seed=13))
        mats = nv.build_travel_matrices(inst)
        route = (0, 1, 2, 3, 4, 5, 0)
        closed = solve_cnu(build_task_sequence(route, inst, mats), mats,
                           BatteryParams.from_instance(inst))
        open_seq = build_open_task_sequence(
            0, (1, 2, 3, 4, 5), 0, inst, mats, starts_mission=True)
        plan = solve_cnu_open(open_seq, mats,
                              BatteryParams.from_instance(inst))
        assert plan.cost == pytest.approx(closed.makespan, abs=1e-9)
        assert list(plan.boundaries) == [u.span[1] for u in closed.units]

    def test_single_location_span(self):
        # slow truck, far middle stop: riding the truck would cost 300 s a
        # leg, so covering the span as one unit (max(D, T) + swap) is optimal
        mid_y = math.sqrt(30.0**2 - 2.5**2)
        inst = nv.Instance(
            id="wedge",
            locations=(
                nv.Location(id=0, x=0.0, y=0.0),
                nv.Location(id=1, x=2.5, y=mid_y, obs_s=100.0),
                nv.Location(id=2, x=5.0, y=0.0, obs_s=50.0),
            ),
            drone_speed=30.0,
            truck_speed=10.0,
        )
        mats = nv.build_travel_matrices(inst)
        seq = build_open_task_sequence(0, (1,), 2, inst, mats)
        plan = solve_cnu_open(seq, mats, BatteryParams(900.0, 100.0))
        assert plan.boundaries == (3,)
        # drone 100 + 100 + 100 dominates the 50 s direct truck leg
        assert plan.cost == pytest.approx(400.0, abs=1e-6)

    def test_two_location_span_matches_brute_force(self):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=4, alpha=2,
                                seed=21))
        mats = nv.build_travel_matrices(inst)
        params = BatteryParams.from_instance(inst)
        best = math.inf
        for order in ((2, 3), (3, 2)):
            seq = build_open_task_sequence(1, order, 4, inst, mats)
            best = min(best, solve_cnu_open(seq, mats, params).cost)
        from nestedvrp.exact import solve_exact_open
        norm, _, _ = nv.normalize_observations(inst)
        got = solve_exact_open((2, 3), 1, 4, False, norm, mats)
        assert got.exact
        assert got.plan.cost == pytest.approx(best, abs=1e-9)
