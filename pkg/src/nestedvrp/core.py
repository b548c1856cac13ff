"""Problem data model: instances, travel times, solutions, validation.

All times are seconds. Coordinates are abstract map units; the conversion to
travel seconds happens once, in :func:`build_travel_matrices`, using the
instance's ``unit_scale`` (meters per unit) and vehicle speeds (m/s).

Every type here is immutable after construction and safe to share across
worker processes; all operations are pure functions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
import numpy as np


class ParameterError(ValueError):
    """A physically meaningless parameter (non-positive speed, etc.)."""


class StructureError(ValueError):
    """Malformed route, unknown location id, or broken solution structure."""


@dataclass(frozen=True)
class Location:
    id: int
    x: float
    y: float
    obs_s: float = 0.0

    def __post_init__(self) -> None:
        if self.obs_s < 0:
            raise ParameterError(f"negative observation time at location {self.id}")


@dataclass(frozen=True)
class Instance:
    """A mission: locations (index 0 is the depot), speeds, battery parameters.

    Invariants enforced here: the truck is never faster than the drone,
    battery capacity is positive, swap service time is non-negative.
    """

    id: str
    locations: tuple[Location, ...]
    drone_speed: float = 30.0
    truck_speed: float = 30.0
    battery_s: float = 900.0
    swap_s: float = 100.0
    unit_scale: float = 100.0

    def __post_init__(self) -> None:
        if not self.locations:
            raise StructureError("instance needs at least the depot location")
        ids = [loc.id for loc in self.locations]
        if len(set(ids)) != len(ids):
            raise StructureError("duplicate location ids")
        if self.truck_speed > self.drone_speed:
            raise ParameterError("truck must not be faster than the drone")
        if self.battery_s <= 0:
            raise ParameterError("battery capacity must be positive")
        if self.swap_s < 0:
            raise ParameterError("swap service time must be non-negative")

    @property
    def depot(self) -> Location:
        return self.locations[0]

    @property
    def n(self) -> int:
        """Number of observed locations (depot excluded)."""
        return len(self.locations) - 1

    @property
    def speed_ratio(self) -> float:
        return self.drone_speed / self.truck_speed

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {loc.id: k for k, loc in enumerate(self.locations)}

    def location(self, loc_id: int) -> Location:
        try:
            return self.locations[self.index_of[loc_id]]
        except KeyError:
            raise StructureError(f"unknown location id {loc_id}") from None


@dataclass(frozen=True)
class TravelMatrices:
    """Symmetric drone/truck travel-time matrices, indexed by location position."""

    tau_d: np.ndarray
    tau_t: np.ndarray

    @cached_property
    def drone_rows(self) -> list[list[float]]:
        # plain lists index faster than ndarray scalars in the hot DP loops
        return self.tau_d.tolist()

    @cached_property
    def truck_rows(self) -> list[list[float]]:
        return self.tau_t.tolist()


def build_travel_matrices(instance: Instance) -> TravelMatrices:
    """Euclidean travel times: tau[i][j] = dist(i,j) * unit_scale / speed."""
    if instance.drone_speed <= 0 or instance.truck_speed <= 0:
        raise ParameterError("vehicle speeds must be positive")
    pts = np.array([[loc.x, loc.y] for loc in instance.locations], dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1]) * instance.unit_scale
    tau_d = dist / instance.drone_speed
    tau_t = dist / instance.truck_speed
    tau_d.setflags(write=False)
    tau_t.setflags(write=False)
    return TravelMatrices(tau_d=tau_d, tau_t=tau_t)


def normalize_observations(
    instance: Instance,
) -> tuple[Instance, float, frozenset[int]]:
    """Fold observation times that exceed the battery capacity.

    A location observed for ``o >= battery`` needs ``floor(o/battery)`` full
    batteries mid-observation; each costs battery + swap seconds regardless of
    routing, so that portion is charged as a constant offset and only the
    residual observation time stays on the location.  Idempotent.

    Returns (normalized instance, makespan offset, ids of folded locations).
    """
    t_bl, t_s = instance.battery_s, instance.swap_s
    offset = 0.0
    forced: set[int] = set()
    new_locs: list[Location] = []
    changed = False
    for loc in instance.locations:
        if loc.obs_s >= t_bl:
            k = math.floor(loc.obs_s / t_bl)
            offset += k * (t_bl + t_s)
            new_locs.append(replace(loc, obs_s=loc.obs_s - k * t_bl))
            forced.add(loc.id)
            changed = True
        else:
            new_locs.append(loc)
    if not changed:
        return instance, 0.0, frozenset()
    return replace(instance, locations=tuple(new_locs)), offset, frozenset(forced)


class UnitKind(str, Enum):
    NESTED = "nested"
    SHIPMENT = "shipment"
    HOLDING = "holding"


@dataclass(frozen=True)
class NestedUnit:
    """One truck bridge plus the drone tasks it spans.

    ``span`` is the half-open task-index interval (start, end] over the
    mission's task sequence.  ``cost`` is the unit's contribution to the
    makespan: the larger of drone and truck elapsed time, plus the swap
    service time when ``charged`` is set.  ``slack`` is battery left unused
    (battery - cost); ``idle`` is drone wait for the truck, max(0, T - D).
    """

    kind: UnitKind
    span: tuple[int, int]
    covered: tuple[int, ...]
    drone_time: float
    truck_time: float
    charged: bool
    cost: float
    slack: float
    idle: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "span": list(self.span),
            "locs": list(self.covered),
            "D": self.drone_time,
            "T": self.truck_time,
            "l": self.cost,
            "charged": self.charged,
        }


@dataclass(frozen=True)
class Solution:
    """A complete mission plan: drone route, unit partition, derived extras.

    ``swap_stops`` lists (location id, "before"|"after") pairs: whether the
    swap happens on arrival (before the observation) or after it.
    ``truck_route`` lists the direct truck arcs (one per non-holding unit).
    """

    instance_id: str
    drone_route: tuple[int, ...]
    units: tuple[NestedUnit, ...]
    swap_stops: tuple[tuple[int, str], ...]
    truck_route: tuple[tuple[int, int], ...]
    makespan: float
    obs_offset: float = 0.0


def makespan(solution: Solution) -> float:
    """Recompute the mission makespan from the unit list."""
    return solution.obs_offset + sum(u.cost for u in solution.units)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def validate_solution(instance: Instance, solution: Solution) -> ValidationReport:
    """Check a solution against the instance it claims to solve.

    Verifies route coverage, unit contiguity, battery feasibility of every
    non-shipment unit, consistency of the stored unit data with values
    re-derived from the route, and the stored makespan (1e-6 s tolerance).
    Unknown location ids raise :class:`StructureError`; everything else is
    reported as a violation.
    """
    from . import cnu  # local import, cnu depends on core types

    bad: list[str] = []
    route = solution.drone_route
    depot_id = instance.depot.id
    for loc_id in route:
        if loc_id not in instance.index_of:
            raise StructureError(f"route references unknown location id {loc_id}")

    norm, offset, _ = normalize_observations(instance)
    matrices = build_travel_matrices(norm)
    t_bl = norm.battery_s

    if len(route) < 2 or route[0] != depot_id or route[-1] != depot_id:
        bad.append("route must begin and end at the depot")
    interior = route[1:-1]
    expected = {loc.id for loc in instance.locations[1:]}
    seen = set(interior)
    if len(seen) != len(interior):
        bad.append("route visits a location more than once")
    for missing in sorted(expected - seen):
        bad.append(f"location {missing} is never visited")
    for extra in sorted(seen - expected):
        if extra == depot_id:
            bad.append("route revisits the depot mid-mission")
        else:
            bad.append(f"route visits unexpected id {extra}")

    if abs(solution.obs_offset - offset) > 1e-6:
        bad.append(
            f"obs_offset {solution.obs_offset} differs from derived {offset}"
        )

    structurally_sound = not bad
    if structurally_sound:
        seq = cnu.build_task_sequence(route, norm, matrices)
        m = seq.task_count
        boundaries = [u.span[1] for u in solution.units]
        prev = 0
        contiguous = True
        for k, unit in enumerate(solution.units):
            if unit.span[0] != prev:
                bad.append(f"unit {k}: span starts at {unit.span[0]}, expected {prev}")
                contiguous = False
                break
            if unit.span[1] <= unit.span[0]:
                bad.append(f"unit {k}: empty or inverted span {unit.span}")
                contiguous = False
                break
            prev = unit.span[1]
        if contiguous and instance.n > 0 and prev != m:
            bad.append(f"units cover tasks up to {prev}, expected {m}")
            contiguous = False
        if contiguous and instance.n == 0 and solution.units:
            bad.append("empty mission must have no units")
            contiguous = False

        for k, unit in enumerate(solution.units):
            if unit.kind != UnitKind.SHIPMENT:
                if unit.drone_time > t_bl + 1e-9:
                    bad.append(
                        f"unit {k}: drone time {unit.drone_time:.6f} exceeds battery {t_bl}"
                    )
                if unit.truck_time > t_bl + 1e-9:
                    bad.append(
                        f"unit {k}: truck time {unit.truck_time:.6f} exceeds battery {t_bl}"
                    )

        if contiguous and instance.n > 0:
            params = cnu.BatteryParams.from_instance(norm)
            derived = cnu.derive_units(seq, boundaries, matrices, params)
            for k, (got, want) in enumerate(zip(solution.units, derived)):
                if got.kind != want.kind:
                    bad.append(f"unit {k}: kind {got.kind.value}, expected {want.kind.value}")
                if tuple(got.covered) != tuple(want.covered):
                    bad.append(f"unit {k}: covered set {got.covered} != derived {want.covered}")
                if abs(got.drone_time - want.drone_time) > 1e-6:
                    bad.append(f"unit {k}: stored drone time differs from derived")
                if abs(got.truck_time - want.truck_time) > 1e-6:
                    bad.append(f"unit {k}: stored truck time differs from derived")
                if abs(got.cost - want.cost) > 1e-6:
                    bad.append(f"unit {k}: stored cost differs from derived")
            recomputed = offset + sum(u.cost for u in derived)
            if abs(recomputed - solution.makespan) > 1e-6:
                bad.append(
                    f"makespan {solution.makespan:.9f} differs from recomputed {recomputed:.9f}"
                )
        elif contiguous:
            if abs(solution.makespan - offset) > 1e-6:
                bad.append("empty mission makespan must equal the observation offset")

    covered_all: list[int] = []
    for unit in solution.units:
        covered_all.extend(unit.covered)
    if sorted(covered_all) != sorted(expected):
        if structurally_sound:
            bad.append("unit covered sets do not partition the locations")

    return ValidationReport(ok=not bad, violations=tuple(bad))


# ---------------------------------------------------------------------------
# JSON serialization.  Floats go through repr so at least 9 significant
# digits always survive a round trip.

def instance_to_dict(instance: Instance) -> dict:
    return {
        "id": instance.id,
        "unit_scale": instance.unit_scale,
        "drone_speed": instance.drone_speed,
        "truck_speed": instance.truck_speed,
        "battery_s": instance.battery_s,
        "swap_s": instance.swap_s,
        "locations": [
            {"id": loc.id, "x": loc.x, "y": loc.y, "obs_s": loc.obs_s}
            for loc in instance.locations
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        locs = tuple(
            Location(id=int(d["id"]), x=float(d["x"]), y=float(d["y"]),
                     obs_s=float(d["obs_s"]))
            for d in data["locations"]
        )
        return Instance(
            id=str(data["id"]),
            locations=locs,
            drone_speed=float(data["drone_speed"]),
            truck_speed=float(data["truck_speed"]),
            battery_s=float(data["battery_s"]),
            swap_s=float(data["swap_s"]),
            unit_scale=float(data["unit_scale"]),
        )
    except KeyError as exc:
        raise StructureError(f"instance JSON missing field {exc}") from None


def save_instance(instance: Instance, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def load_instance(path: str) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def solution_to_dict(solution: Solution) -> dict:
    return {
        "instance_id": solution.instance_id,
        "makespan_s": solution.makespan,
        "route": list(solution.drone_route),
        "units": [u.to_dict() for u in solution.units],
    }


def solution_from_dict(data: dict, instance: Instance) -> Solution:
    """Rebuild a full solution (derived fields included) from the wire form."""
    from . import cnu

    norm, offset, _ = normalize_observations(instance)
    matrices = build_travel_matrices(norm)
    route = tuple(int(x) for x in data["route"])
    if instance.n == 0:
        return Solution(
            instance_id=str(data["instance_id"]),
            drone_route=route,
            units=(),
            swap_stops=(),
            truck_route=(),
            makespan=float(data["makespan_s"]),
            obs_offset=offset,
        )
    seq = cnu.build_task_sequence(route, norm, matrices)
    params = cnu.BatteryParams.from_instance(norm)
    boundaries = [int(u["span"][1]) for u in data["units"]]
    rebuilt = cnu.assemble_solution(seq, boundaries, matrices, params, offset)
    stored_units = tuple(
        NestedUnit(
            kind=UnitKind(u["kind"]),
            span=(int(u["span"][0]), int(u["span"][1])),
            covered=tuple(int(x) for x in u["locs"]),
            drone_time=float(u["D"]),
            truck_time=float(u["T"]),
            charged=bool(u["charged"]),
            cost=float(u["l"]),
            slack=norm.battery_s - float(u["l"]),
            idle=max(0.0, float(u["T"]) - float(u["D"])),
        )
        for u in data["units"]
    )
    return Solution(
        instance_id=str(data["instance_id"]),
        drone_route=route,
        units=stored_units,
        swap_stops=rebuilt.swap_stops,
        truck_route=rebuilt.truck_route,
        makespan=float(data["makespan_s"]),
        obs_offset=offset,
    )


def save_solution(solution: Solution, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_dict(solution), fh, indent=2)
        fh.write("\n")


def load_solution(path: str, instance: Instance) -> Solution:
    with open(path) as fh:
        return solution_from_dict(json.load(fh), instance)
