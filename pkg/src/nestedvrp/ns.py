"""Destroy/repair neighborhood search over nested-unit partitions.

Each iteration removes a battery-wasteful unit together with one neighbor,
re-solves the freed span exactly (order, swap stops and truck legs), splices
the result back, and accepts the candidate if it improves the incumbent or,
with probability one half, even if it does not.  The best solution seen is
tracked separately so the returned result never regresses.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import cnu, exact, tsp
from .core import (
    Instance,
    Solution,
    TravelMatrices,
    UnitKind,
    build_travel_matrices,
    normalize_observations,
)
from .cnu import BatteryParams

EXACT_TSP_LIMIT = 12
SMALL_N_LIMIT = 10
IMPROVE_EPS = 1e-9


@dataclass(frozen=True)
class NsParams:
    """Search knobs.  ``n_max`` of None resolves to 20 for missions with at
    most 10 locations and 50 otherwise."""

    beta: float = 0.25
    n_unch: int = 5
    n_max: int | None = None
    accept_worse_prob: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.beta <= 1):
            raise ValueError("beta must lie in (0, 1]")
        if self.n_unch < 1 or (self.n_max is not None and self.n_max < 1):
            raise ValueError("iteration limits must be at least 1")

    def resolve_n_max(self, n: int) -> int:
        if self.n_max is not None:
            return self.n_max
        return 20 if n <= SMALL_N_LIMIT else 50


def initialize(instance: Instance,
               matrices: TravelMatrices | None = None) -> Solution:
    """Feasible starting point: shortest known drone tour, then optimal swaps."""
    norm, offset, _ = normalize_observations(instance)
    if matrices is None:
        matrices = build_travel_matrices(norm)
    if norm.n <= EXACT_TSP_LIMIT:
        tour = tsp.solve_tsp_exact(matrices.tau_d)
    else:
        tour = tsp.solve_tsp_heuristic(matrices.tau_d)
    route = tuple(norm.locations[i].id for i in tour.order)
    seq = cnu.build_task_sequence(route, norm, matrices)
    params = BatteryParams.from_instance(norm)
    return cnu.solve_cnu(seq, matrices, params, offset)


@dataclass(frozen=True)
class DestroyedSpan:
    """What destruction freed: two adjacent units and the seam they leave.

    ``start_loc``/``end_loc`` stay fixed in the route; ``movable`` may be
    reordered.  When a boundary cuts between a location's arrival and its
    observation, that location is pinned in place but its observation belongs
    to the span (``start_obs``/``end_obs``).
    """

    bad_index: int
    pair: tuple[int, int]
    span: tuple[int, int]
    free_locations: tuple[int, ...]
    movable: tuple[int, ...]
    start_loc: int
    end_loc: int
    start_obs: bool
    end_obs: bool
    after_shipment: bool
    at_mission_start: bool


def _loc_at(route: tuple[int, ...], boundary: int) -> int:
    return route[(boundary + 1) // 2]


def destroy(solution: Solution, params: NsParams,
            rng: random.Random) -> DestroyedSpan:
    """Pick a wasteful unit plus one neighbor and describe the freed span."""
    units = solution.units
    if len(units) < 2:
        raise ValueError("destruction needs at least two units")
    ranked = sorted(range(len(units)),
                    key=lambda k: (-units[k].slack, k))
    pool = max(1, int(params.beta * len(units)))
    bad = ranked[rng.randrange(pool)]
    if bad == 0:
        neighbor = 1
    elif bad == len(units) - 1:
        neighbor = bad - 1
    else:
        neighbor = bad - 1 if rng.randrange(2) == 0 else bad + 1
    lo, hi = min(bad, neighbor), max(bad, neighbor)

    route = solution.drone_route
    b0 = units[lo].span[0]
    b2 = units[hi].span[1]
    m = units[-1].span[1]
    start_obs = b0 % 2 == 1
    end_obs = b2 % 2 == 0 and b2 != m
    start_loc = _loc_at(route, b0)
    end_loc = _loc_at(route, b2)
    covered = tuple(units[lo].covered) + tuple(units[hi].covered)
    movable = [loc for loc in covered
               if not (start_obs and loc == start_loc)
               and not (end_obs and loc == end_loc)]
    return DestroyedSpan(
        bad_index=bad,
        pair=(lo, hi),
        span=(b0, b2),
        free_locations=covered,
        movable=tuple(movable),
        start_loc=start_loc,
        end_loc=end_loc,
        start_obs=start_obs,
        end_obs=end_obs,
        after_shipment=lo > 0 and units[lo - 1].kind == UnitKind.SHIPMENT,
        at_mission_start=b0 == 0,
    )


def _reconstruct(norm: Instance, matrices: TravelMatrices,
                 solution: Solution, span: DestroyedSpan) -> Solution:
    result = exact.solve_exact_open(
        span.movable, span.start_loc, span.end_loc, span.after_shipment,
        norm, matrices,
        include_start_obs=span.start_obs,
        include_end_obs=span.end_obs,
        starts_mission=span.at_mission_start,
    )
    b0, b2 = span.span
    route = list(solution.drone_route)
    k_lo = b0 // 2 + 1
    k_hi = b2 // 2
    block = ([span.start_loc] if span.start_obs else []) \
        + list(result.order) \
        + ([span.end_loc] if span.end_obs else [])
    new_route = tuple(route[:k_lo] + block + route[k_hi + 1:])
    assert len(new_route) == len(route)

    lo, hi = span.pair
    boundaries = [u.span[1] for u in solution.units[:lo]]
    boundaries.extend(b0 + sb for sb in result.plan.boundaries)
    boundaries.extend(u.span[1] for u in solution.units[hi + 1:])

    seq = cnu.build_task_sequence(new_route, norm, matrices)
    params = BatteryParams.from_instance(norm)
    return cnu.assemble_solution(seq, boundaries, matrices, params,
                                 solution.obs_offset)


def reconstruct(instance: Instance, solution: Solution, span: DestroyedSpan,
                matrices: TravelMatrices | None = None) -> Solution:
    """Re-solve the freed span exactly and splice it back into the mission."""
    norm, _, _ = normalize_observations(instance)
    if matrices is None:
        matrices = build_travel_matrices(norm)
    return _reconstruct(norm, matrices, solution, span)


def accept(candidate_makespan: float, incumbent_makespan: float,
           rng: random.Random, worse_prob: float = 0.5) -> bool:
    """Greedy accept on strict improvement, coin flip otherwise."""
    if candidate_makespan < incumbent_makespan - IMPROVE_EPS:
        return True
    return rng.random() < worse_prob


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    incumbent_s: float
    best_s: float
    accepted: bool
    destroyed_unit: int


@dataclass(frozen=True)
class NsResult:
    solution: Solution
    trace: tuple[IterationRecord, ...]
    iterations: int


def solve_ns(instance: Instance, params: NsParams | None = None,
             matrices: TravelMatrices | None = None) -> NsResult:
    """Run the full search; deterministic for a fixed seed."""
    params = params or NsParams()
    norm, _, _ = normalize_observations(instance)
    if matrices is None:
        matrices = build_travel_matrices(norm)
    incumbent = initialize(instance, matrices)
    best = incumbent
    rng = random.Random(params.seed)
    n_max = params.resolve_n_max(norm.n)
    trace: list[IterationRecord] = []
    unchanged = 0
    for it in range(1, n_max + 1):
        if len(incumbent.units) < 2:
            break
        span = destroy(incumbent, params, rng)
        candidate = _reconstruct(norm, matrices, incumbent, span)
        improved_best = candidate.makespan < best.makespan - IMPROVE_EPS
        accepted = accept(candidate.makespan, incumbent.makespan, rng,
                          params.accept_worse_prob)
        if accepted:
            incumbent = candidate
        if improved_best:
            best = candidate
            unchanged = 0
        else:
            unchanged += 1
        trace.append(IterationRecord(
            iteration=it,
            incumbent_s=incumbent.makespan,
            best_s=best.makespan,
            accepted=accepted,
            destroyed_unit=span.bad_index,
        ))
        if unchanged >= params.n_unch:
            break
    return NsResult(solution=best, trace=tuple(trace), iterations=len(trace))
