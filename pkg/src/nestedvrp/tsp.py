"""Shortest tours over the drone travel-time matrix, for route initialization.

Tours live in matrix-index space: position 0 is the depot, and a tour is
(0, ..., 0).  Callers translate indices to location ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HELD_KARP_LIMIT = 14


class SizeError(ValueError):
    """Instance too large for the exact solver; use the heuristic."""


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]
    length: float


def tour_length(order, tau_d) -> float:
    rows = tau_d.tolist() if isinstance(tau_d, np.ndarray) else tau_d
    return sum(rows[a][b] for a, b in zip(order, order[1:]))


def solve_tsp_exact(tau_d) -> Tour:
    """Optimal tour by subset dynamic programming (up to 14 interior stops)."""
    rows = tau_d.tolist() if isinstance(tau_d, np.ndarray) else [list(r) for r in tau_d]
    n = len(rows) - 1
    if n > HELD_KARP_LIMIT:
        raise SizeError(
            f"{n} locations exceeds the exact budget of {HELD_KARP_LIMIT}; "
            "use solve_tsp_heuristic"
        )
    if n <= 0:
        return Tour(order=(0, 0), length=0.0)
    if n == 1:
        return Tour(order=(0, 1, 0), length=rows[0][1] + rows[1][0])

    full = (1 << n) - 1
    size = 1 << n
    inf = math.inf
    # cost[mask][last-1]: cheapest path depot -> visits mask -> last
    cost = [[inf] * n for _ in range(size)]
    parent = [[-1] * n for _ in range(size)]
    for v in range(n):
        cost[1 << v][v] = rows[0][v + 1]
    for mask in range(1, size):
        row_mask = cost[mask]
        for last in range(n):
            c = row_mask[last]
            if c == inf or not (mask >> last) & 1:
                continue
            row_tau = rows[last + 1]
            for nxt in range(n):
                if (mask >> nxt) & 1:
                    continue
                nm = mask | (1 << nxt)
                nc = c + row_tau[nxt + 1]
                if nc < cost[nm][nxt]:
                    cost[nm][nxt] = nc
                    parent[nm][nxt] = last
    best = inf
    best_last = -1
    for last in range(n):
        total = cost[full][last] + rows[last + 1][0]
        if total < best:
            best = total
            best_last = last
    order = [0]
    chain = []
    mask, last = full, best_last
    while last != -1:
        chain.append(last + 1)
        prev = parent[mask][last]
        mask ^= 1 << last
        last = prev
    order.extend(reversed(chain))
    order.append(0)
    return Tour(order=tuple(order), length=best)


def _nearest_neighbor(rows, start: int, nodes) -> list[int]:
    order = [start]
    remaining = set(nodes)
    cur = start
    while remaining:
        row = rows[cur]
        # ties go to the lowest index for determinism
        nxt = min(remaining, key=lambda v: (row[v], v))
        order.append(nxt)
        remaining.discard(nxt)
        cur = nxt
    return order


def _two_opt_cycle(order: list[int], rows) -> list[int]:
    """First-improvement 2-opt on a closed tour; sweeps until a clean pass."""
    n = len(order)
    improved = True
    while improved:
        improved = False
        for i in range(1, n - 2):
            a = order[i - 1]
            b = order[i]
            rab = rows[a]
            for j in range(i + 1, n - 1):
                c = order[j]
                d = order[j + 1]
                delta = rab[c] + rows[b][d] - rab[b] - rows[c][d]
                if delta < -1e-12:
                    order[i:j + 1] = reversed(order[i:j + 1])
                    improved = True
                    b = order[i]
                    rab = rows[a]
    return order


def solve_tsp_heuristic(tau_d, seed: int = 0) -> Tour:
    """Nearest-neighbor construction plus 2-opt to local optimality."""
    rows = tau_d.tolist() if isinstance(tau_d, np.ndarray) else [list(r) for r in tau_d]
    n = len(rows) - 1
    if n <= 0:
        return Tour(order=(0, 0), length=0.0)
    order = _nearest_neighbor(rows, 0, range(1, n + 1))
    order.append(0)
    order = _two_opt_cycle(order, rows)
    return Tour(order=tuple(order), length=tour_length(order, rows))


def open_path_order(tau_d, start: int, middle, end: int) -> list[int]:
    """Heuristic ordering of stops between two fixed endpoints (NN + 2-opt)."""
    rows = tau_d.tolist() if isinstance(tau_d, np.ndarray) else tau_d
    middle = list(middle)
    if len(middle) <= 1:
        return middle
    order = _nearest_neighbor(rows, start, middle) + [end]
    # 2-opt with both endpoints pinned
    n = len(order)
    improved = True
    while improved:
        improved = False
        for i in range(1, n - 2):
            a = order[i - 1]
            b = order[i]
            for j in range(i + 1, n - 1):
                c = order[j]
                d = order[j + 1]
                delta = rows[a][c] + rows[b][d] - rows[a][b] - rows[c][d]
                if delta < -1e-12:
                    order[i:j + 1] = reversed(order[i:j + 1])
                    improved = True
                    b = order[i]
    return order[1:-1]
