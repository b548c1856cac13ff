"""Exact solving by drone-route enumeration over the swap-partition optimizer.

Every interior permutation is a candidate drone route; each is priced by the
partition DP and the cheapest wins.  A branch is cut only when an admissible
lower bound (travel so far + cheapest possible remaining entries + all
observation time + one initial swap) already exceeds the incumbent, so the
result is identical to full enumeration.  Ties go to the lexicographically
smallest route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import cnu, tsp
from .core import (
    Instance,
    Solution,
    TravelMatrices,
    build_travel_matrices,
    normalize_observations,
)
from .cnu import BatteryParams, OpenPlan
from .tsp import SizeError

MAX_EXACT_N = 9
MAX_OPEN_FREE = 9


def _route_arrays(route_ids, norm: Instance, matrices: TravelMatrices):
    """Task arrays for a known-valid depot-to-depot route (no validation)."""
    idx = norm.index_of
    tau = matrices.drone_rows
    locs = norm.locations
    durations = [0.0]
    travel = [False]
    eidx = [idx[route_ids[0]]]
    prev = eidx[0]
    last = len(route_ids) - 1
    for k in range(1, len(route_ids)):
        cur = idx[route_ids[k]]
        durations.append(tau[prev][cur])
        travel.append(True)
        eidx.append(cur)
        if k < last:
            durations.append(locs[cur].obs_s)
            travel.append(False)
            eidx.append(cur)
        prev = cur
    return durations, travel, eidx


def solve_exact(instance: Instance, max_n: int = MAX_EXACT_N,
                matrices: TravelMatrices | None = None) -> Solution:
    """Global optimum over all drone orders (small instances only)."""
    norm, offset, _ = normalize_observations(instance)
    n = norm.n
    if n > max_n:
        raise SizeError(f"{n} locations exceeds the enumeration budget of {max_n}")
    if matrices is None:
        matrices = build_travel_matrices(norm)
    params = BatteryParams.from_instance(norm)
    depot = norm.depot.id
    if n == 0:
        seq = cnu.build_task_sequence((depot, depot), norm, matrices)
        return cnu.solve_cnu(seq, matrices, params, offset)

    idx = norm.index_of
    tau_d = matrices.drone_rows
    tau_t = matrices.truck_rows
    ids = sorted(loc.id for loc in norm.locations[1:])
    obs_total = sum(loc.obs_s for loc in norm.locations[1:])
    depot_i = idx[depot]
    size = len(norm.locations)
    min_in = {
        u: min(tau_d[v][idx[u]] for v in range(size) if v != idx[u])
        for u in ids
    }
    ret_min = min(tau_d[v][depot_i] for v in range(size) if v != depot_i)

    inf = math.inf
    best_cost = inf
    best_route: tuple[int, ...] | None = None
    best_bounds: list[int] | None = None
    t_bl, t_s = params.t_bl, params.t_s
    route = [depot]

    def descend(cur_i: int, remaining: list[int], travel_sum: float,
                min_in_left: float) -> None:
        nonlocal best_cost, best_route, best_bounds
        if not remaining:
            full = route + [depot]
            durations, travel, eidx = _route_arrays(full, norm, matrices)
            cost, bounds = cnu._optimal_partition(
                durations, travel, eidx, tau_t, t_bl, t_s,
                after_shipment=False, starts_mission=True)
            if bounds is None:
                seq = cnu.build_task_sequence(tuple(full), norm, matrices)
                cnu._raise_infeasible(seq, t_bl)
            if cost < best_cost:
                best_cost = cost
                best_route = tuple(full)
                best_bounds = bounds
            return
        bound = travel_sum + min_in_left + ret_min + obs_total + t_s
        if bound > best_cost:
            return
        for nxt in remaining:
            ni = idx[nxt]
            route.append(nxt)
            descend(ni, [r for r in remaining if r != nxt],
                    travel_sum + tau_d[cur_i][ni], min_in_left - min_in[nxt])
            route.pop()

    descend(depot_i, ids, 0.0, sum(min_in.values()))
    assert best_route is not None
    seq = cnu.build_task_sequence(best_route, norm, matrices)
    return cnu.assemble_solution(seq, best_bounds, matrices, params, offset)


@dataclass(frozen=True)
class OpenSearchResult:
    """Best ordering of a freed span: order of the movable locations, the
    span-local partition, and whether the search was exhaustive."""

    order: tuple[int, ...]
    plan: OpenPlan
    exact: bool


def solve_exact_open(free, start_loc: int, end_loc: int, after_shipment: bool,
                     instance: Instance,
                     matrices: TravelMatrices | None = None, *,
                     include_start_obs: bool = False,
                     include_end_obs: bool = False,
                     starts_mission: bool = False,
                     max_free: int = MAX_OPEN_FREE) -> OpenSearchResult:
    """Optimal sub-mission between two fixed boundary locations.

    Enumerates orderings of ``free`` when there are at most ``max_free`` of
    them; beyond that it falls back to a shortest-path heuristic order and
    flags the result as non-exhaustive.  ``instance`` must carry normalized
    observation times when ``matrices`` is supplied by the caller.
    """
    if matrices is None:
        instance, _, _ = normalize_observations(instance)
        matrices = build_travel_matrices(instance)
    params = BatteryParams.from_instance(instance)
    mids = sorted(free)

    def plan_for(order) -> OpenPlan:
        seq = cnu.build_open_task_sequence(
            start_loc, order, end_loc, instance, matrices,
            include_start_obs=include_start_obs,
            include_end_obs=include_end_obs,
            starts_mission=starts_mission)
        return cnu.solve_cnu_open(seq, matrices, params,
                                  after_shipment=after_shipment)

    if not mids:
        if (start_loc == end_loc and not include_start_obs
                and not include_end_obs):
            return OpenSearchResult((), OpenPlan(0.0, ()), True)
        return OpenSearchResult((), plan_for(()), True)

    idx = instance.index_of
    tau_d = matrices.drone_rows
    if len(mids) > max_free:
        order = tsp.open_path_order(
            tau_d, idx[start_loc], [idx[u] for u in mids], idx[end_loc])
        by_idx = {idx[u]: u for u in mids}
        ordered = tuple(by_idx[i] for i in order)
        return OpenSearchResult(ordered, plan_for(ordered), False)

    obs = {u: instance.location(u).obs_s for u in mids}
    obs_total = sum(obs.values())
    if include_start_obs:
        obs_total += instance.location(start_loc).obs_s
    if include_end_obs:
        obs_total += instance.location(end_loc).obs_s
    pool = [idx[start_loc]] + [idx[u] for u in mids]
    min_in = {
        u: min(tau_d[v][idx[u]] for v in pool if v != idx[u])
        for u in mids
    }
    end_entry = min(tau_d[v][idx[end_loc]] for v in pool if v != idx[end_loc])

    inf = math.inf
    best_cost = inf
    best_order: tuple[int, ...] = ()
    best_plan: OpenPlan | None = None
    placed: list[int] = []

    def descend(cur_i: int, remaining: list[int], travel_sum: float,
                min_in_left: float) -> None:
        nonlocal best_cost, best_order, best_plan
        if not remaining:
            if travel_sum + tau_d[cur_i][idx[end_loc]] + obs_total >= best_cost:
                return
            plan = plan_for(tuple(placed))
            if plan.cost < best_cost:
                best_cost = plan.cost
                best_order = tuple(placed)
                best_plan = plan
            return
        if travel_sum + min_in_left + end_entry + obs_total >= best_cost:
            return
        order = sorted(remaining, key=lambda u: (tau_d[cur_i][idx[u]], u))
        for nxt in order:
            placed.append(nxt)
            descend(idx[nxt], [r for r in remaining if r != nxt],
                    travel_sum + tau_d[cur_i][idx[nxt]],
                    min_in_left - min_in[nxt])
            placed.pop()

    descend(idx[start_loc], mids, 0.0, sum(min_in.values()))
    if best_plan is None:
        # every order infeasible: an observation alone exceeds the battery
        return OpenSearchResult(tuple(mids), plan_for(tuple(mids)), True)
    return OpenSearchResult(best_order, best_plan, True)
