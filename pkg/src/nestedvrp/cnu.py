"""Optimal battery-swap partition of a fixed drone route.

Given the order in which the drone visits locations, the remaining decisions
(where to swap batteries, hence the truck route) reduce to partitioning the
drone's alternating travel/observation task list into contiguous units.  Each
candidate unit has a closed-form cost, so the optimum is a shortest path over
task boundaries; the search runs in O(m^2) edge relaxations for m tasks and
far fewer in practice because battery capacity bounds unit length.

Cost rules per unit, with D = drone work inside the span, T = direct truck
time between the boundary locations, and swap time t_s:

* a span of exactly one travel task is a shipment: the truck carries the
  drone and swaps the battery en route; cost max(T, t_s), feasible even when
  T exceeds the battery.  A shipment that opens the mission additionally pays
  t_s for the initial battery fit (nothing has been absorbed in transit yet).
* any other span is feasible iff D and T both fit the battery; cost
  max(D, T) plus t_s for the start-of-unit swap, waived when the previous
  unit was a shipment (that swap already happened in transit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    Instance,
    NestedUnit,
    Solution,
    StructureError,
    TravelMatrices,
    UnitKind,
)


class InfeasibleSequenceError(RuntimeError):
    """No feasible partition exists; names the task that cannot be covered."""

    def __init__(self, task_index: int, location_id: int, duration: float,
                 battery_s: float):
        self.task_index = task_index
        self.location_id = location_id
        self.duration = duration
        self.battery_s = battery_s
        super().__init__(
            f"task {task_index} (observation at location {location_id}, "
            f"{duration:.3f} s) exceeds battery capacity {battery_s:.3f} s"
        )


@dataclass(frozen=True)
class BatteryParams:
    t_bl: float
    t_s: float

    @classmethod
    def from_instance(cls, instance: Instance) -> "BatteryParams":
        return cls(t_bl=instance.battery_s, t_s=instance.swap_s)


@dataclass(frozen=True)
class TaskSequence:
    """The drone's task list along a fixed route.

    Task k has duration ``durations[k]`` and ends at location
    ``end_ids[k]`` (``end_idx`` carries matrix indices).  Task 0 is a
    zero-length placeholder at the start location so that boundary 0 is
    "standing at the start, fresh".  ``starts_mission`` is False for spans
    cut out of a larger mission (the mission-start swap rules then do not
    apply at boundary 0).
    """

    instance_id: str
    route: tuple[int, ...]
    durations: tuple[float, ...]
    travel_mask: tuple[bool, ...]
    end_ids: tuple[int, ...]
    end_idx: tuple[int, ...]
    starts_mission: bool = True

    @property
    def task_count(self) -> int:
        return len(self.durations) - 1


def build_task_sequence(route, instance: Instance,
                        matrices: TravelMatrices) -> TaskSequence:
    """Expand a depot-to-depot route into the alternating task list."""
    route = tuple(route)
    depot = instance.depot.id
    if len(route) < 2 or route[0] != depot or route[-1] != depot:
        raise StructureError("route must begin and end at the depot")
    interior = route[1:-1]
    expected = {loc.id for loc in instance.locations[1:]}
    if set(interior) != expected or len(interior) != len(expected):
        raise StructureError("route must visit every location exactly once")

    idx = instance.index_of
    tau_d = matrices.drone_rows
    durations = [0.0]
    travel = [False]
    end_ids = [depot]
    end_idx = [idx[depot]]
    prev = idx[depot]
    for k, loc_id in enumerate(route[1:], start=1):
        cur = idx[loc_id]
        durations.append(tau_d[prev][cur])
        travel.append(True)
        end_ids.append(loc_id)
        end_idx.append(cur)
        if k < len(route) - 1:  # no observation at the terminal depot
            durations.append(instance.location(loc_id).obs_s)
            travel.append(False)
            end_ids.append(loc_id)
            end_idx.append(cur)
        prev = cur
    if len(interior) == 0:
        # degenerate mission: a single zero travel task back to the depot
        pass
    return TaskSequence(
        instance_id=instance.id,
        route=route,
        durations=tuple(durations),
        travel_mask=tuple(travel),
        end_ids=tuple(end_ids),
        end_idx=tuple(end_idx),
        starts_mission=True,
    )


def build_open_task_sequence(start_loc: int, middle, end_loc: int,
                             instance: Instance, matrices: TravelMatrices,
                             include_start_obs: bool = False,
                             include_end_obs: bool = False,
                             starts_mission: bool = False) -> TaskSequence:
    """Task list for a span between two fixed boundary locations.

    The drone stands at ``start_loc``; when ``include_start_obs`` that
    location's observation is the first task of the span (its position in the
    route is fixed, only the swap structure around it is re-decided).  The
    span ends on arrival at ``end_loc``, plus its observation when
    ``include_end_obs``.
    """
    idx = instance.index_of
    tau_d = matrices.drone_rows
    durations = [0.0]
    travel = [False]
    end_ids = [start_loc]
    end_idx = [idx[start_loc]]
    prev = idx[start_loc]
    if include_start_obs:
        durations.append(instance.location(start_loc).obs_s)
        travel.append(False)
        end_ids.append(start_loc)
        end_idx.append(prev)
    for loc_id in middle:
        cur = idx[loc_id]
        durations.append(tau_d[prev][cur])
        travel.append(True)
        end_ids.append(loc_id)
        end_idx.append(cur)
        durations.append(instance.location(loc_id).obs_s)
        travel.append(False)
        end_ids.append(loc_id)
        end_idx.append(cur)
        prev = cur
    cur = idx[end_loc]
    durations.append(tau_d[prev][cur])
    travel.append(True)
    end_ids.append(end_loc)
    end_idx.append(cur)
    if include_end_obs:
        durations.append(instance.location(end_loc).obs_s)
        travel.append(False)
        end_ids.append(end_loc)
        end_idx.append(cur)
    route = (start_loc,) + tuple(middle) + (end_loc,)
    return TaskSequence(
        instance_id=instance.id,
        route=route,
        durations=tuple(durations),
        travel_mask=tuple(travel),
        end_ids=tuple(end_ids),
        end_idx=tuple(end_idx),
        starts_mission=starts_mission,
    )


@dataclass(frozen=True)
class UnitCostQuery:
    """A candidate unit: span (start, end] of a task sequence."""

    seq: TaskSequence
    start: int
    end: int
    after_shipment: bool = False

    @property
    def drone_time(self) -> float:
        return sum(self.seq.durations[self.start + 1:self.end + 1])

    def truck_time(self, matrices: TravelMatrices) -> float:
        return matrices.truck_rows[self.seq.end_idx[self.start]][
            self.seq.end_idx[self.end]]


@dataclass(frozen=True)
class UnitCost:
    kind: UnitKind
    cost: float
    drone_time: float
    truck_time: float
    charged: bool


def unit_cost(query: UnitCostQuery, matrices: TravelMatrices,
              params: BatteryParams) -> UnitCost | None:
    """Cost of one candidate unit, or None when it is infeasible."""
    seq = query.seq
    i, j = query.start, query.end
    if not (0 <= i < j <= seq.task_count):
        raise StructureError(f"invalid span ({i}, {j}]")
    drone = query.drone_time
    truck = query.truck_time(matrices)
    single_travel = j == i + 1 and seq.travel_mask[j]
    if single_travel:
        charged = seq.starts_mission and i == 0
        cost = max(truck, params.t_s) + (params.t_s if charged else 0.0)
        return UnitCost(UnitKind.SHIPMENT, cost, drone, truck, charged)
    if drone > params.t_bl or truck > params.t_bl:
        return None
    charged = not query.after_shipment
    cost = max(drone, truck) + (params.t_s if charged else 0.0)
    kind = UnitKind.HOLDING if j == i + 1 else UnitKind.NESTED
    return UnitCost(kind, cost, drone, truck, charged)


def _optimal_partition(durations, travel_mask, end_idx, truck_rows,
                       t_bl: float, t_s: float, after_shipment: bool,
                       starts_mission: bool):
    """Suffix DP over task boundaries.

    Two charge states per boundary: 0 = the next unit pays its start swap,
    1 = the previous unit was a shipment so the swap is waived.  Ties break
    toward fewer units, then toward the smallest next boundary (scanning j
    ascending keeps the first minimum).  Returns (cost, boundary list).
    """
    m = len(durations) - 1
    if m == 0:
        return 0.0, []
    inf = math.inf
    cost0 = [inf] * (m + 1)
    cost1 = [inf] * (m + 1)
    units0 = [0] * (m + 1)
    units1 = [0] * (m + 1)
    succ0 = [-1] * (m + 1)
    succ1 = [-1] * (m + 1)
    cost0[m] = cost1[m] = 0.0

    for i in range(m - 1, -1, -1):
        row = truck_rows[end_idx[i]]
        best0 = inf
        bu0 = 0
        bj0 = -1
        best1 = inf
        bu1 = 0
        bj1 = -1
        acc = 0.0
        for j in range(i + 1, m + 1):
            acc += durations[j]
            if j == i + 1 and travel_mask[j]:
                # shipment covers this travel task alone
                truck = row[end_idx[j]]
                base = truck if truck > t_s else t_s
                if starts_mission and i == 0:
                    base += t_s
                tail = cost1[j]
                if tail != inf:
                    cand = base + tail
                    u = units1[j] + 1
                    if cand < best0 or (cand == best0 and u < bu0):
                        best0, bu0, bj0 = cand, u, j
                    if cand < best1 or (cand == best1 and u < bu1):
                        best1, bu1, bj1 = cand, u, j
            elif acc <= t_bl:
                truck = row[end_idx[j]]
                if truck <= t_bl:
                    big = acc if acc > truck else truck
                    tail = cost0[j]
                    if tail != inf:
                        u = units0[j] + 1
                        cand = big + t_s + tail
                        if cand < best0 or (cand == best0 and u < bu0):
                            best0, bu0, bj0 = cand, u, j
                        cand = big + tail
                        if cand < best1 or (cand == best1 and u < bu1):
                            best1, bu1, bj1 = cand, u, j
            if acc > t_bl:
                break
        cost0[i], units0[i], succ0[i] = best0, bu0, bj0
        cost1[i], units1[i], succ1[i] = best1, bu1, bj1

    total = cost1[0] if after_shipment else cost0[0]
    if total == inf:
        return inf, None
    boundaries = []
    state = 1 if after_shipment else 0
    b = 0
    while b < m:
        nxt = succ1[b] if state else succ0[b]
        boundaries.append(nxt)
        state = 1 if (nxt == b + 1 and travel_mask[nxt]) else 0
        b = nxt
    return total, boundaries


def derive_units(seq: TaskSequence, boundaries, matrices: TravelMatrices,
                 params: BatteryParams) -> tuple[NestedUnit, ...]:
    """Re-cost a boundary list into fully populated units.

    The charge flags are recomputed from scratch, so splicing new boundaries
    into an existing mission automatically re-prices seam units.
    """
    truck_rows = matrices.truck_rows
    units: list[NestedUnit] = []
    prev = 0
    prev_kind: UnitKind | None = None
    for b in boundaries:
        drone = sum(seq.durations[prev + 1:b + 1])
        truck = truck_rows[seq.end_idx[prev]][seq.end_idx[b]]
        single_travel = b == prev + 1 and seq.travel_mask[b]
        if single_travel:
            kind = UnitKind.SHIPMENT
            charged = seq.starts_mission and prev == 0
            cost = max(truck, params.t_s) + (params.t_s if charged else 0.0)
        else:
            kind = UnitKind.HOLDING if b == prev + 1 else UnitKind.NESTED
            charged = prev_kind != UnitKind.SHIPMENT
            cost = max(drone, truck) + (params.t_s if charged else 0.0)
        covered = tuple(
            seq.end_ids[k]
            for k in range(prev + 1, b + 1)
            if not seq.travel_mask[k]
        )
        units.append(NestedUnit(
            kind=kind,
            span=(prev, b),
            covered=covered,
            drone_time=drone,
            truck_time=truck,
            charged=charged,
            cost=cost,
            slack=params.t_bl - cost,
            idle=max(0.0, truck - drone),
        ))
        prev = b
        prev_kind = kind
    return tuple(units)


def assemble_solution(seq: TaskSequence, boundaries, matrices: TravelMatrices,
                      params: BatteryParams, obs_offset: float = 0.0) -> Solution:
    """Package a boundary list as a full Solution with derived fields."""
    units = derive_units(seq, boundaries, matrices, params)
    stops: list[tuple[int, str]] = [(seq.end_ids[0], "after")]
    for b in boundaries:
        side = "before" if seq.travel_mask[b] else "after"
        stops.append((seq.end_ids[b], side))
    arcs: list[tuple[int, int]] = []
    prev = 0
    for unit in units:
        b = unit.span[1]
        if unit.kind != UnitKind.HOLDING:
            arcs.append((seq.end_ids[prev], seq.end_ids[b]))
        prev = b
    total = obs_offset + sum(u.cost for u in units)
    return Solution(
        instance_id=seq.instance_id,
        drone_route=seq.route,
        units=units,
        swap_stops=tuple(stops),
        truck_route=tuple(arcs),
        makespan=total,
        obs_offset=obs_offset,
    )


def _raise_infeasible(seq: TaskSequence, t_bl: float) -> None:
    for k in range(1, seq.task_count + 1):
        if not seq.travel_mask[k] and seq.durations[k] > t_bl:
            raise InfeasibleSequenceError(
                task_index=k,
                location_id=seq.end_ids[k],
                duration=seq.durations[k],
                battery_s=t_bl,
            )
    raise InfeasibleSequenceError(-1, -1, math.nan, t_bl)  # pragma: no cover


def solve_cnu(seq: TaskSequence, matrices: TravelMatrices,
              params: BatteryParams, obs_offset: float = 0.0) -> Solution:
    """Minimum-makespan unit partition of a full mission task sequence."""
    if len(seq.route) == 2:
        # nothing to observe, nothing to do
        return Solution(
            instance_id=seq.instance_id,
            drone_route=seq.route,
            units=(),
            swap_stops=(),
            truck_route=(),
            makespan=obs_offset,
            obs_offset=obs_offset,
        )
    total, boundaries = _optimal_partition(
        seq.durations, seq.travel_mask, seq.end_idx, matrices.truck_rows,
        params.t_bl, params.t_s, after_shipment=False,
        starts_mission=seq.starts_mission,
    )
    if boundaries is None:
        _raise_infeasible(seq, params.t_bl)
    return assemble_solution(seq, boundaries, matrices, params, obs_offset)


@dataclass(frozen=True)
class OpenPlan:
    """Partition of an open span: cost and boundaries in span-local indices."""

    cost: float
    boundaries: tuple[int, ...]


def solve_cnu_open(seq: TaskSequence, matrices: TravelMatrices,
                   params: BatteryParams,
                   after_shipment: bool = False) -> OpenPlan:
    """Same optimization restricted to a span with fixed boundary locations."""
    total, boundaries = _optimal_partition(
        seq.durations, seq.travel_mask, seq.end_idx, matrices.truck_rows,
        params.t_bl, params.t_s, after_shipment=after_shipment,
        starts_mission=seq.starts_mission,
    )
    if boundaries is None:
        _raise_infeasible(seq, params.t_bl)
    return OpenPlan(cost=total, boundaries=tuple(boundaries))
