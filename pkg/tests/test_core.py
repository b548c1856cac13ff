import json
import random

import numpy as np
import pytest

import nestedvrp as nv
from nestedvrp import cnu
from nestedvrp.generator import GenSpec, Pattern, generate



def two_point_instance(dist_units, drone_speed, truck_speed):
    return nv.Instance(
        id="pair",
        locations=(
            nv.Location(id=0, x=0.0, y=0.0),
            nv.Location(id=1, x=dist_units, y=0.0, obs_s=10.0),
        ),
        drone_speed=drone_speed,
        truck_speed=truck_speed,
    )


class TestTravelMatrices:
    def test_distance_over_speed(self):
        inst = two_point_instance(30.0, 30.0, 30.0)  # 3000 m
        mats = nv.build_travel_matrices(inst)
        assert mats.tau_d[0][1] == pytest.approx(100.0)

    def test_truck_half_speed(self):
        inst = two_point_instance(30.0, 30.0, 15.0)
        mats = nv.build_travel_matrices(inst)
        assert mats.tau_t[0][1] == pytest.approx(200.0)

    def test_coincident_points(self):
        inst = nv.Instance(
            id="same",
            locations=(
                nv.Location(id=0, x=5.0, y=5.0),
                nv.Location(id=1, x=5.0, y=5.0, obs_s=1.0),
            ),
        )
        mats = nv.build_travel_matrices(inst)
        assert mats.tau_d[0][1] == 0.0
        assert mats.tau_t[0][1] == 0.0

    def test_symmetric_zero_diagonal(self):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=15, alpha=2, seed=5))
        mats = nv.build_travel_matrices(inst)
        assert np.allclose(mats.tau_d, mats.tau_d.T)
        assert np.all(np.diag(mats.tau_d) == 0)
        assert np.all(mats.tau_d <= mats.tau_t + 1e-12)

    def test_rejects_bad_speed(self):
        inst = two_point_instance(30.0, 30.0, 30.0)
        broken = nv.Instance(
            id="zero", locations=inst.locations, drone_speed=0.0,
            truck_speed=0.0)
        with pytest.raises(nv.ParameterError):
            nv.build_travel_matrices(broken)

    def test_triangle_inequality_random_triples(self):
        inst = generate(GenSpec(pattern=Pattern.DOUBLE_CENTER, n=40, alpha=3,
                                seed=11))
        mats = nv.build_travel_matrices(inst)
        rng = random.Random(0)
        m = len(inst.locations)
        for _ in range(1000):
            a, b, c = rng.randrange(m), rng.randrange(m), rng.randrange(m)
            for tau in (mats.tau_d, mats.tau_t):
                assert tau[a][c] <= tau[a][b] + tau[b][c] + 1e-9


class TestNormalizeObservations:
    def make(self, obs):
        return nv.Instance(
            id="norm",
            locations=(
                nv.Location(id=0, x=0.0, y=0.0),
                nv.Location(id=1, x=10.0, y=0.0, obs_s=obs),
            ),
        )

    def test_below_capacity_unchanged(self):
        inst = self.make(250.0)
        norm, offset, forced = nv.normalize_observations(inst)
        assert norm is inst
        assert offset == 0.0
        assert not forced

    def test_folding(self):
        norm, offset, forced = nv.normalize_observations(self.make(2000.0))
        assert norm.locations[1].obs_s == pytest.approx(200.0)
        assert offset == pytest.approx(2000.0)
        assert forced == {1}

    def test_exact_capacity_boundary(self):
        norm, offset, forced = nv.normalize_observations(self.make(900.0))
        assert norm.locations[1].obs_s == 0.0
        assert offset == pytest.approx(1000.0)
        assert forced == {1}

    def test_idempotent(self):
        rng = random.Random(3)
        for _ in range(20):
            inst = self.make(rng.uniform(0, 3000))
            once, off1, _ = nv.normalize_observations(inst)
            twice, off2, _ = nv.normalize_observations(once)
            assert twice == once
            assert off2 == 0.0


class TestMakespanAndValidation:
    def test_empty_makespan(self):
        sol = nv.Solution(
            instance_id="x", drone_route=(0, 0), units=(), swap_stops=(),
            truck_route=(), makespan=0.0, obs_offset=0.0)
        assert nv.makespan(sol) == 0.0

    def test_single_unit_makespan(self):
        unit = nv.NestedUnit(
            kind=nv.UnitKind.NESTED, span=(0, 3), covered=(1,),
            drone_time=500.0, truck_time=0.0, charged=True, cost=600.0,
            slack=300.0, idle=0.0)
        sol = nv.Solution(
            instance_id="x", drone_route=(0, 1, 0), units=(unit,),
            swap_stops=(), truck_route=(), makespan=600.0, obs_offset=0.0)
        assert nv.makespan(sol) == 600.0

    def test_exact_solution_validates(self, desk3, desk3_matrices):
        sol = nv.solve_exact(desk3, matrices=desk3_matrices)
        report = nv.validate_solution(desk3, sol)
        assert report.ok, report.violations

    def test_forged_battery_detected(self, desk3, desk3_matrices):
        sol = nv.solve_exact(desk3, matrices=desk3_matrices)
        unit = sol.units[0]
        forged = nv.NestedUnit(
            kind=unit.kind, span=unit.span, covered=unit.covered,
            drone_time=desk3.battery_s + 1.0, truck_time=unit.truck_time,
            charged=unit.charged, cost=unit.cost, slack=unit.slack,
            idle=unit.idle)
        bad = nv.Solution(
            instance_id=sol.instance_id, drone_route=sol.drone_route,
            units=(forged,) + sol.units[1:], swap_stops=sol.swap_stops,
            truck_route=sol.truck_route, makespan=sol.makespan,
            obs_offset=sol.obs_offset)
        report = nv.validate_solution(desk3, bad)
        assert not report.ok
        assert any("exceeds battery" in v for v in report.violations)

    def test_missing_location_detected(self, desk3, desk3_matrices):
        sol = nv.solve_exact(desk3, matrices=desk3_matrices)
        short_route = tuple(x for x in sol.drone_route if x != 2)
        bad = nv.Solution(
            instance_id=sol.instance_id, drone_route=short_route,
            units=sol.units, swap_stops=sol.swap_stops,
            truck_route=sol.truck_route, makespan=sol.makespan,
            obs_offset=sol.obs_offset)
        report = nv.validate_solution(desk3, bad)
        assert not report.ok
        assert any("never visited" in v for v in report.violations)

    def test_unknown_id_raises(self, desk3):
        sol = nv.Solution(
            instance_id="desk", drone_route=(0, 7, 0), units=(),
            swap_stops=(), truck_route=(), makespan=0.0, obs_offset=0.0)
        with pytest.raises(nv.StructureError):
            nv.validate_solution(desk3, sol)

    def test_makespan_invariant_under_rederivation(self):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=6, alpha=2, seed=9))
        sol = nv.solve_exact(inst)
        norm, offset, _ = nv.normalize_observations(inst)
        mats = nv.build_travel_matrices(norm)
        seq = cnu.build_task_sequence(sol.drone_route, norm, mats)
        params = cnu.BatteryParams.from_instance(norm)
        units = cnu.derive_units(seq, [u.span[1] for u in sol.units], mats,
                                 params)
        assert offset + sum(u.cost for u in units) == pytest.approx(
            sol.makespan, abs=1e-6)


class TestSerialization:
    def test_instance_round_trip(self, tmp_path):
        inst = generate(GenSpec(pattern=Pattern.SINGLE_CENTER, n=8, alpha=3,
                                seed=4))
        path = tmp_path / "inst.json"
        nv.save_instance(inst, str(path))
        again = nv.load_instance(str(path))
        assert again == inst

    def test_solution_round_trip(self, tmp_path):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=5, alpha=2, seed=8))
        sol = nv.solve_exact(inst)
        path = tmp_path / "sol.json"
        nv.save_solution(sol, str(path))
        again = nv.load_solution(str(path), inst)
        assert again.makespan == sol.makespan
        assert again.drone_route == sol.drone_route
        assert again.units == sol.units
        assert again.swap_stops == sol.swap_stops
        assert again.truck_route == sol.truck_route
        assert nv.validate_solution(inst, again).ok

    def test_float_precision_survives(self, tmp_path):
        inst = generate(GenSpec(pattern=Pattern.UNIFORM, n=4, alpha=2, seed=2))
        path = tmp_path / "inst.json"
        nv.save_instance(inst, str(path))
        data = json.loads(path.read_text())
        assert data["locations"][1]["obs_s"] == inst.locations[1].obs_s
