"""Closed-form makespan lower bound.

Relaxing where swaps may occur, the mission can never beat: the shortest
drone tour, plus all observation time, plus one swap service per full
battery that the flying and observing alone must drain.  The tour term is
exact up to 12 locations; past that a heuristic tour is used, which can only
enlarge the value, so the result is then an estimate rather than a certified
bound (gap statistics are measured against this same quantity either way).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import tsp
from .core import (
    Instance,
    TravelMatrices,
    build_travel_matrices,
    normalize_observations,
)

EXACT_TSP_LIMIT = 12


@dataclass(frozen=True)
class LowerBound:
    seconds: float
    certified: bool


def lower_bound(instance: Instance,
                matrices: TravelMatrices | None = None,
                exact_limit: int = EXACT_TSP_LIMIT) -> LowerBound:
    norm, offset, _ = normalize_observations(instance)
    if matrices is None:
        matrices = build_travel_matrices(norm)
    if norm.n <= exact_limit:
        tour = tsp.solve_tsp_exact(matrices.tau_d)
        certified = True
    else:
        tour = tsp.solve_tsp_heuristic(matrices.tau_d)
        certified = False
    obs_total = sum(loc.obs_s for loc in norm.locations[1:])
    active = tour.length + obs_total
    swaps = math.floor(active / norm.battery_s) if norm.battery_s > 0 else 0
    return LowerBound(
        seconds=offset + active + swaps * norm.swap_s,
        certified=certified,
    )
