"""Linear mixed-integer models of the mission, and LP-format export.

Three variants share one base system: ``MILP`` (products of timer and swap
variables replaced by their exact linear envelopes), ``MILP_DL`` (drone
order-index subtour rows lifted by arc indicators), and ``MILP_SD`` (the
order index multiplied through the degree rows, linearized with one lift
variable per interior arc; the lift variables are named ``v`` to keep them
apart from the truck arcs).

Node space: 0 is the depot, 1..n the observed locations, n+1 a copy of the
depot where the mission ends.  Arcs run from every node but n+1 to every
node but 0.

Endpoint conventions the models add on top of the base rows: the swap
indicator at node n+1 is fixed on so the final leg's duration is counted,
with a constant -swap correction since no battery change really happens
there; and a shipment's usual two-swap objective rebate drops to one at the
mission endpoints (the initial battery fit is always paid, the terminal
arrival is already handled by the constant).  This prices every unit exactly
as the simulator does.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .core import (
    Instance,
    Solution,
    StructureError,
    UnitKind,
    build_travel_matrices,
    normalize_observations,
)

INF = math.inf


class Variant(str, Enum):
    MILP = "MILP"
    MILP_DL = "MILP_DL"
    MILP_SD = "MILP_SD"


VARIANT_ALIASES = {
    "milp": Variant.MILP,
    "dl": Variant.MILP_DL,
    "milp_dl": Variant.MILP_DL,
    "milp+dl": Variant.MILP_DL,
    "sd": Variant.MILP_SD,
    "milp_sd": Variant.MILP_SD,
    "milp+sd": Variant.MILP_SD,
}


@dataclass(frozen=True)
class VarDef:
    name: str
    binary: bool
    lo: float
    hi: float


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: dict[str, float]
    sense: str  # "<=", ">=", "="
    rhs: float

    @property
    def group(self) -> str:
        if self.name.endswith("_lo") or self.name.endswith("_hi"):
            return self.name[:-3]
        return self.name


@dataclass(frozen=True)
class MipModel:
    variant: Variant
    n: int
    m1: float
    m2: float
    variables: dict[str, VarDef]
    rows: tuple[Row, ...]
    objective: dict[str, float]
    objective_constant: float

    @property
    def binary_count(self) -> int:
        return sum(1 for v in self.variables.values() if v.binary)

    @property
    def continuous_count(self) -> int:
        return sum(1 for v in self.variables.values() if not v.binary)

    @property
    def constraint_count(self) -> int:
        return len({r.group for r in self.rows})


def arcs_of(n: int) -> list[tuple[int, int]]:
    """Directed arcs: sources 0..n, targets 1..n+1, no self-loops."""
    return [(i, j) for i in range(n + 1) for j in range(1, n + 2) if i != j]


def expected_counts(n: int, variant: Variant) -> dict[str, int]:
    """Closed-form variable and constraint-group counts for a built model."""
    a = (n + 1) ** 2 - n
    a0 = n * n
    av = n * n - n
    binary = 4 * a + (n + 1) + (n + 1) + (n + 2)
    continuous = (n + 2) + 2 * (n + 1) + 2 * (n + 1) + n + (n + 1)
    groups = (
        (n + 1) + (n + 1) + 1        # degree rows, u_0
        + n + (n + 1) + (n + 1) + 1  # swap-stop linking, truck departure
        + 2 * n                      # truck degree at interior stops
        + a0                         # truck order rows
        + a                          # synchronization
        + 4 * n                      # timer product envelope at stops
        + 5 * a                      # shipment linking
        + 3 * (n + 1) + 2 * a        # departure product envelope + arc timers
        + 6 * (n + 1)                # duration bounds and definitions
        + 3 * a                      # truck-entry product envelope
        + 3                          # initial and terminal fixings
    )
    if variant is Variant.MILP:
        groups += a0
    elif variant is Variant.MILP_DL:
        groups += n + a0
    else:
        continuous += av
        groups += (n + 1) + (n + 1) + av + a0 + n
    return {"binary": binary, "continuous": continuous, "constraints": groups}


def build_model(instance: Instance, variant: Variant = Variant.MILP) -> MipModel:
    """Assemble the full row system for one model variant."""
    if isinstance(variant, str):
        variant = VARIANT_ALIASES.get(variant.lower(), Variant(variant))
    norm, obs_offset, _ = normalize_observations(instance)
    n = norm.n
    if n < 1:
        raise StructureError("model needs at least one observed location")
    matrices = build_travel_matrices(norm)
    t_bl = norm.battery_s
    t_s = norm.swap_s

    def pos(node: int) -> int:
        return 0 if node == n + 1 else node

    tau_d = matrices.drone_rows
    tau_t = matrices.truck_rows

    def td(i: int, j: int) -> float:
        return tau_d[pos(i)][pos(j)]

    def tt(i: int, j: int) -> float:
        return tau_t[pos(i)][pos(j)]

    arcs = arcs_of(n)
    arcset = set(arcs)
    m1 = max(tt(i, j) for i, j in arcs)
    # battery alone is too small to deactivate the lower timer rows when an
    # off-route arc is long and the timer at its tail is nearly drained
    m2 = t_bl + max(td(i, j) for i, j in arcs)
    mw = max(m1, m2, t_s)
    obs = {j: norm.locations[j].obs_s for j in range(1, n + 1)}

    variables: dict[str, VarDef] = {}

    def bvar(name: str) -> str:
        variables[name] = VarDef(name, True, 0.0, 1.0)
        return name

    def cvar(name: str, lo: float, hi: float) -> str:
        variables[name] = VarDef(name, False, lo, hi)
        return name

    for i, j in arcs:
        bvar(f"x_{i}_{j}")
    for i, j in arcs:
        bvar(f"y_{i}_{j}")
    for i, j in arcs:
        bvar(f"w_{i}_{j}")
    for j in range(1, n + 2):
        bvar(f"zm_{j}")
    for i in range(n + 1):
        bvar(f"zp_{i}")
    for i in range(n + 2):
        bvar(f"z_{i}")
    for i, j in arcs:
        bvar(f"Q_{i}_{j}")
    for i in range(n + 2):
        if variant is Variant.MILP and i >= 1:
            cvar(f"u_{i}", 1.0, n + 1.0)
        else:
            cvar(f"u_{i}", 0.0, n + 1.0)
    for j in range(1, n + 2):
        cvar(f"tm_{j}", 0.0, t_bl)
    for i in range(n + 1):
        cvar(f"tp_{i}", 0.0, t_bl)
    for j in range(1, n + 2):
        cvar(f"lm_{j}", 0.0, INF)
    for i in range(n + 1):
        cvar(f"lp_{i}", 0.0, INF)
    for j in range(1, n + 1):
        cvar(f"P_{j}", 0.0, t_bl)
    for i in range(n + 1):
        cvar(f"F_{i}", 0.0, t_bl)
    if variant is Variant.MILP_SD:
        for i, j in arcs:
            if i != 0 and j != n + 1:
                cvar(f"v_{i}_{j}", 0.0, n + 1.0)

    rows: list[Row] = []

    def row(name: str, coeffs: dict[str, float], sense: str, rhs: float) -> None:
        rows.append(Row(name, {k: v for k, v in coeffs.items() if v != 0.0},
                        sense, rhs))

    # drone degree
    for i in range(n + 1):
        row(f"c1_{i}", {f"x_{i}_{j}": 1.0 for j in range(1, n + 2) if j != i},
            "=", 1.0)
    for j in range(1, n + 2):
        row(f"c2_{j}", {f"x_{i}_{j}": 1.0 for i in range(n + 1) if i != j},
            "=", 1.0)
    row("c3", {"u_0": 1.0}, "=", 0.0)

    # drone subtour elimination, per variant
    def lift(i: int, j: int) -> dict[str, float]:
        # u_i * x_ij under the SD substitutions
        if i == 0:
            return {}
        if j == n + 1:
            return {f"x_{i}_{j}": float(n)}
        return {f"v_{i}_{j}": 1.0}

    if variant is Variant.MILP:
        for i, j in arcs:
            if i != 0:
                row(f"c5_{i}_{j}",
                    {f"u_{i}": 1.0, f"u_{j}": -1.0, f"x_{i}_{j}": n + 1.0},
                    "<=", float(n))
    elif variant is Variant.MILP_DL:
        for i in range(1, n + 1):
            row(f"DL1_{i}_lo",
                {f"u_{i}": 1.0, f"x_0_{i}": 1.0, f"x_{i}_{n + 1}": -(n - 2.0)},
                ">=", 2.0)
            row(f"DL1_{i}_hi",
                {f"u_{i}": 1.0, f"x_0_{i}": n - 1.0, f"x_{i}_{n + 1}": -1.0},
                "<=", float(n))
        for i, j in arcs:
            if i != 0:
                coeffs = {f"u_{i}": 1.0, f"u_{j}": -1.0, f"x_{i}_{j}": n + 1.0}
                if (j, i) in arcset:
                    coeffs[f"x_{j}_{i}"] = n - 1.0
                row(f"DL2_{i}_{j}", coeffs, "<=", float(n))
    else:  # MILP_SD
        for i in range(n + 1):
            coeffs: dict[str, float] = {}
            for j in range(1, n + 1):
                if j != i:
                    for k, v in lift(i, j).items():
                        coeffs[k] = coeffs.get(k, 0.0) + v
            coeffs[f"x_{i}_{n + 1}"] = coeffs.get(f"x_{i}_{n + 1}", 0.0) + float(n)
            coeffs[f"u_{i}"] = coeffs.get(f"u_{i}", 0.0) - 1.0
            row(f"SD1_{i}", coeffs, "=", 0.0)
        for j in range(1, n + 2):
            coeffs = {}
            for i in range(n + 1):
                if i != j:
                    for k, v in lift(i, j).items():
                        coeffs[k] = coeffs.get(k, 0.0) + v
            coeffs[f"u_{j}"] = coeffs.get(f"u_{j}", 0.0) - 1.0
            row(f"SD2_{j}", coeffs, "=", -1.0)
        for i, j in arcs:
            if i != 0 and j != n + 1:
                row(f"SD3_{i}_{j}_lo",
                    {f"v_{i}_{j}": 1.0, f"x_{i}_{j}": -1.0}, ">=", 0.0)
                row(f"SD3_{i}_{j}_hi",
                    {f"v_{i}_{j}": 1.0, f"x_{i}_{j}": -float(n)}, "<=", 0.0)
        for i, j in arcs:
            if i == 0:
                continue
            fwd = lift(i, j)
            rev = lift(j, i) if (j, i) in arcset else {}
            lo: dict[str, float] = {f"u_{i}": 1.0, f"x_{i}_{j}": n + 1.0}
            if (j, i) in arcset:
                lo[f"x_{j}_{i}"] = lo.get(f"x_{j}_{i}", 0.0) + float(n)
            for k, v in fwd.items():
                lo[k] = lo.get(k, 0.0) - v
            for k, v in rev.items():
                lo[k] = lo.get(k, 0.0) - v
            row(f"SD4_{i}_{j}_lo", lo, "<=", n + 1.0)
            hi: dict[str, float] = {f"u_{i}": -1.0, f"x_{i}_{j}": -1.0}
            for k, v in fwd.items():
                hi[k] = hi.get(k, 0.0) + v
            for k, v in rev.items():
                hi[k] = hi.get(k, 0.0) + v
            row(f"SD4_{i}_{j}_hi", hi, "<=", -1.0)
        for i in range(1, n + 1):
            row(f"SD5_{i}_lo",
                {f"u_{i}": 1.0, f"x_0_{i}": 1.0, f"x_{i}_{n + 1}": -(n - 2.0)},
                ">=", 2.0)
            row(f"SD5_{i}_hi",
                {f"u_{i}": 1.0, f"x_0_{i}": n - 1.0, f"x_{i}_{n + 1}": -1.0},
                "<=", float(n))

    # swap stops and the truck route
    for j in range(1, n + 1):
        row(f"c6_{j}", {f"z_{j}": 1.0, f"zm_{j}": -1.0, f"zp_{j}": -1.0},
            "<=", 0.0)
    for i in range(1, n + 2):
        row(f"c7_{i}", {f"z_{i}": 1.0, f"zm_{i}": -1.0}, ">=", 0.0)
    for i in range(n + 1):
        row(f"c8_{i}", {f"z_{i}": 1.0, f"zp_{i}": -1.0}, ">=", 0.0)
    row("c9", {f"y_0_{j}": 1.0 for j in range(1, n + 2)}, "=", 1.0)
    for j in range(1, n + 1):
        coeffs = {f"y_{i}_{j}": 1.0 for i in range(n + 1) if i != j}
        coeffs[f"z_{j}"] = -1.0
        row(f"c10a_{j}", coeffs, "=", 0.0)
        coeffs = {f"y_{j}_{k}": 1.0 for k in range(1, n + 2) if k != j}
        coeffs[f"z_{j}"] = -1.0
        row(f"c10b_{j}", coeffs, "=", 0.0)
    for i, j in arcs:
        if i != 0:
            row(f"c11_{i}_{j}",
                {f"u_{i}": 1.0, f"u_{j}": -1.0, f"y_{i}_{j}": n + 1.0},
                "<=", float(n))
    for i, j in arcs:
        row(f"c12_{i}_{j}", {f"y_{i}_{j}": tt(i, j), f"w_{i}_{j}": -m1},
            "<=", t_bl)

    # timer flow
    for j in range(1, n + 1):
        row(f"c15a_{j}", {f"P_{j}": 1.0, f"zm_{j}": -t_bl}, "<=", 0.0)
        row(f"c15b_{j}", {f"P_{j}": 1.0, f"tm_{j}": -1.0}, "<=", 0.0)
        row(f"c15c_{j}", {f"P_{j}": 1.0, f"tm_{j}": -1.0, f"zm_{j}": -t_bl},
            ">=", -t_bl)
        row(f"c15d_{j}", {f"tp_{j}": 1.0, f"tm_{j}": -1.0, f"P_{j}": 1.0},
            "=", obs[j])
    for i, j in arcs:
        row(f"c16_{i}_{j}", {f"w_{i}_{j}": 1.0, f"x_{i}_{j}": -1.0}, "<=", 0.0)
    for i, j in arcs:
        row(f"c17_{i}_{j}", {f"w_{i}_{j}": 1.0, f"y_{i}_{j}": -1.0}, "<=", 0.0)
    for i, j in arcs:
        row(f"c18_{i}_{j}", {f"w_{i}_{j}": 1.0, f"zp_{i}": -1.0}, "<=", 0.0)
    for i, j in arcs:
        row(f"c19_{i}_{j}", {f"w_{i}_{j}": 1.0, f"zm_{j}": -1.0}, "<=", 0.0)
    for i, j in arcs:
        row(f"c20_{i}_{j}",
            {f"x_{i}_{j}": 1.0, f"y_{i}_{j}": 1.0, f"zp_{i}": 1.0,
             f"zm_{j}": 1.0, f"w_{i}_{j}": -1.0},
            "<=", 3.0)
    for i in range(n + 1):
        row(f"c21a_{i}", {f"F_{i}": 1.0, f"zp_{i}": -t_bl}, "<=", 0.0)
        row(f"c21b_{i}", {f"F_{i}": 1.0, f"tp_{i}": -1.0}, "<=", 0.0)
        row(f"c21c_{i}", {f"F_{i}": 1.0, f"tp_{i}": -1.0, f"zp_{i}": -t_bl},
            ">=", -t_bl)
    for i, j in arcs:
        d = td(i, j)
        row(f"c21_{i}_{j}",
            {f"tm_{j}": 1.0, f"tp_{i}": -1.0, f"F_{i}": 1.0,
             f"w_{i}_{j}": d, f"x_{i}_{j}": m2},
            "<=", d + m2)
        row(f"c22_{i}_{j}",
            {f"tm_{j}": 1.0, f"tp_{i}": -1.0, f"F_{i}": 1.0,
             f"w_{i}_{j}": d, f"x_{i}_{j}": -m2},
            ">=", d - m2)

    # interval-between-rendezvous accounting
    for j in range(1, n + 2):
        coeffs = {f"lm_{j}": 1.0, f"zm_{j}": -t_bl}
        for i in range(n + 1):
            if i != j:
                coeffs[f"w_{i}_{j}"] = -mw
        row(f"c23_{j}", coeffs, "<=", 0.0)
    for j in range(n + 1):
        row(f"c24_{j}", {f"lp_{j}": 1.0, f"zp_{j}": -t_bl}, "<=", 0.0)
    for j in range(1, n + 2):
        row(f"c25_{j}", {f"lm_{j}": 1.0, f"tm_{j}": -1.0, f"zm_{j}": -m2},
            ">=", -m2)
    for j in range(1, n + 2):
        coeffs = {f"lm_{j}": 1.0, f"zm_{j}": -m1}
        for i in range(n + 1):
            if i != j:
                t = tt(i, j)
                coeffs[f"y_{i}_{j}"] = -t
                coeffs[f"w_{i}_{j}"] = -(max(t, t_s) - t)
        row(f"c26_{j}", coeffs, ">=", -m1)
    for j in range(n + 1):
        row(f"c27_{j}", {f"lp_{j}": 1.0, f"tp_{j}": -1.0, f"zp_{j}": -m2},
            ">=", -m2)
    for i, j in arcs:
        row(f"c28a_{i}_{j}", {f"Q_{i}_{j}": 1.0, f"y_{i}_{j}": -1.0},
            "<=", 0.0)
        row(f"c28b_{i}_{j}", {f"Q_{i}_{j}": 1.0, f"zm_{j}": -1.0}, "<=", 0.0)
        row(f"c28c_{i}_{j}",
            {f"y_{i}_{j}": 1.0, f"zm_{j}": 1.0, f"Q_{i}_{j}": -1.0},
            "<=", 1.0)
    for j in range(n + 1):
        coeffs = {f"lp_{j}": 1.0, f"zp_{j}": -m1}
        for i in range(n + 1):
            if i != j and j != 0:
                t = tt(i, j)
                coeffs[f"y_{i}_{j}"] = -t
                coeffs[f"Q_{i}_{j}"] = t
        row(f"c28_{j}", coeffs, ">=", -m1)

    # endpoint fixings
    row("c30a", {"zp_0": 1.0}, "=", 1.0)
    row("c30b", {"tp_0": 1.0}, "=", 0.0)
    row("cterm", {f"zm_{n + 1}": 1.0}, "=", 1.0)

    objective: dict[str, float] = {}
    for j in range(1, n + 2):
        objective[f"lm_{j}"] = 1.0
    for i in range(n + 1):
        objective[f"lp_{i}"] = 1.0
    for j in range(1, n + 2):
        objective[f"zm_{j}"] = t_s
    for i in range(n + 1):
        objective[f"zp_{i}"] = t_s
    for i, j in arcs:
        rebate = 2.0 - (1.0 if i == 0 else 0.0) - (1.0 if j == n + 1 else 0.0)
        if rebate:
            objective[f"w_{i}_{j}"] = -t_s * rebate

    return MipModel(
        variant=variant,
        n=n,
        m1=m1,
        m2=m2,
        variables=variables,
        rows=tuple(rows),
        objective=objective,
        objective_constant=obs_offset - t_s,
    )


def solution_to_assignment(instance: Instance,
                           solution: Solution) -> dict[str, float]:
    """Map a simulated solution onto the model's variable space.

    Produces values for every variable any variant declares (the lift
    variables included), so one assignment can be checked against all three
    systems.
    """
    norm, _, _ = normalize_observations(instance)
    matrices = build_travel_matrices(norm)
    n = norm.n
    idx = norm.index_of
    arcs = arcs_of(n)

    def pos(node: int) -> int:
        return 0 if node == n + 1 else node

    tau_d = matrices.drone_rows
    obs = {j: norm.locations[j].obs_s for j in range(1, n + 1)}

    assign: dict[str, float] = {}
    for i, j in arcs:
        assign[f"x_{i}_{j}"] = 0.0
        assign[f"y_{i}_{j}"] = 0.0
        assign[f"w_{i}_{j}"] = 0.0
        assign[f"Q_{i}_{j}"] = 0.0
        if i != 0 and j != n + 1:
            assign[f"v_{i}_{j}"] = 0.0
    for j in range(1, n + 2):
        assign[f"zm_{j}"] = 0.0
        assign[f"tm_{j}"] = 0.0
        assign[f"lm_{j}"] = 0.0
    for i in range(n + 1):
        assign[f"zp_{i}"] = 0.0
        assign[f"tp_{i}"] = 0.0
        assign[f"lp_{i}"] = 0.0
        assign[f"F_{i}"] = 0.0
    for i in range(n + 2):
        assign[f"z_{i}"] = 0.0
        assign[f"u_{i}"] = 0.0
    for j in range(1, n + 1):
        assign[f"P_{j}"] = 0.0

    route_nodes = [0] + [idx[loc] for loc in solution.drone_route[1:-1]] + [n + 1]
    for k, node in enumerate(route_nodes):
        assign[f"u_{node}"] = float(k)
    for a, b in zip(route_nodes, route_nodes[1:]):
        assign[f"x_{a}_{b}"] = 1.0

    def node_at(boundary: int) -> int:
        return route_nodes[(boundary + 1) // 2]

    assign["zp_0"] = 1.0
    shipment_arcs: set[tuple[int, int]] = set()
    m = solution.units[-1].span[1] if solution.units else 1
    boundary_nodes = [0]
    for unit in solution.units:
        b = unit.span[1]
        node = node_at(b)
        if b % 2 == 1:
            assign[f"zm_{node}"] = 1.0
        else:
            assign[f"zp_{node}"] = 1.0
        boundary_nodes.append(node)
        if unit.kind == UnitKind.SHIPMENT:
            a = node_at(unit.span[0])
            shipment_arcs.add((a, node))
            assign[f"w_{a}_{node}"] = 1.0
    if not solution.units:
        assign[f"zm_{n + 1}"] = 1.0
        boundary_nodes.append(n + 1)

    prev = boundary_nodes[0]
    for node in boundary_nodes[1:]:
        if node != prev:
            assign[f"y_{prev}_{node}"] = 1.0
        prev = node
    for i in range(n + 2):
        zm = assign.get(f"zm_{i}", 0.0)
        zp = assign.get(f"zp_{i}", 0.0)
        assign[f"z_{i}"] = 1.0 if (zm or zp) else 0.0

    # replay the battery timer along the route
    t = 0.0
    for a, b in zip(route_nodes, route_nodes[1:]):
        depart = 0.0 if assign[f"zp_{a}"] else t
        if (a, b) in shipment_arcs:
            arrive = 0.0
        else:
            arrive = depart + tau_d[pos(a)][pos(b)]
        assign[f"tm_{b}"] = arrive
        if b <= n:
            t = obs[b] if assign[f"zm_{b}"] else arrive + obs[b]
            assign[f"tp_{b}"] = t
        else:
            t = arrive

    for unit in solution.units:
        b = unit.span[1]
        node = node_at(b)
        if unit.kind == UnitKind.SHIPMENT:
            value = max(unit.truck_time, norm.swap_s)
        else:
            value = max(unit.drone_time, unit.truck_time)
        key = f"lm_{node}" if b % 2 == 1 else f"lp_{node}"
        assign[key] = value

    for j in range(1, n + 1):
        assign[f"P_{j}"] = assign[f"tm_{j}"] * assign[f"zm_{j}"]
    for i in range(n + 1):
        assign[f"F_{i}"] = assign[f"tp_{i}"] * assign[f"zp_{i}"]
    for i, j in arcs:
        assign[f"Q_{i}_{j}"] = assign[f"y_{i}_{j}"] * assign[f"zm_{j}"]
        if i != 0 and j != n + 1:
            assign[f"v_{i}_{j}"] = assign[f"u_{i}"] * assign[f"x_{i}_{j}"]
    return assign


@dataclass(frozen=True)
class AssignmentCheck:
    feasible: bool
    objective: float
    violations: tuple[str, ...]


def check_assignment(model: MipModel, assignment: dict[str, float],
                     tol: float = 1e-6) -> AssignmentCheck:
    """Evaluate every row, bound, and integrality mark of the model."""
    for name in model.variables:
        if name not in assignment:
            raise StructureError(f"assignment missing variable {name}")
    bad: list[str] = []
    for name, var in model.variables.items():
        val = assignment[name]
        if val < var.lo - tol or val > var.hi + tol:
            bad.append(f"bound {name}: {val} outside [{var.lo}, {var.hi}]")
        if var.binary and abs(val - round(val)) > tol:
            bad.append(f"integrality {name}: {val}")
    for r in model.rows:
        lhs = sum(c * assignment[v] for v, c in r.coeffs.items())
        if r.sense == "<=" and lhs > r.rhs + tol:
            bad.append(f"{r.name}: {lhs:.9f} > {r.rhs:.9f}")
        elif r.sense == ">=" and lhs < r.rhs - tol:
            bad.append(f"{r.name}: {lhs:.9f} < {r.rhs:.9f}")
        elif r.sense == "=" and abs(lhs - r.rhs) > tol:
            bad.append(f"{r.name}: {lhs:.9f} != {r.rhs:.9f}")
    objective = model.objective_constant + sum(
        c * assignment[v] for v, c in model.objective.items())
    return AssignmentCheck(feasible=not bad, objective=objective,
                           violations=tuple(bad))


# ---------------------------------------------------------------------------
# LP-format text export and the matching reader.

def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _terms(coeffs: dict[str, float]) -> str:
    parts: list[str] = []
    for name, c in coeffs.items():
        if not parts:
            parts.append(f"{_num(c)} {name}" if c >= 0
                         else f"- {_num(-c)} {name}")
        elif c >= 0:
            parts.append(f"+ {_num(c)} {name}")
        else:
            parts.append(f"- {_num(-c)} {name}")
    return " ".join(parts) if parts else "0 dummy"


def lp_string(model: MipModel) -> str:
    lines = [
        f"\\ nestedvrp n={model.n} variant={model.variant.value} "
        f"m1={repr(model.m1)} m2={repr(model.m2)} "
        f"const={repr(model.objective_constant)}",
        "Minimize",
    ]
    obj = _terms(model.objective)
    if model.objective_constant >= 0:
        obj += f" + {_num(model.objective_constant)}"
    else:
        obj += f" - {_num(-model.objective_constant)}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for r in model.rows:
        lines.append(f" {r.name}: {_terms(r.coeffs)} {r.sense} {_num(r.rhs)}")
    lines.append("Bounds")
    for name, var in model.variables.items():
        if var.binary:
            continue
        if var.hi == INF:
            lines.append(f" {name} >= {_num(var.lo)}")
        else:
            lines.append(f" {_num(var.lo)} <= {name} <= {_num(var.hi)}")
    lines.append("Binaries")
    binaries = [name for name, var in model.variables.items() if var.binary]
    for k in range(0, len(binaries), 8):
        lines.append(" " + " ".join(binaries[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model: MipModel, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(lp_string(model))


_TERM_RE = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?(?:e[+-]?\d+)?)\s*([A-Za-z_]\w*)?")


def _parse_expr(text: str) -> tuple[dict[str, float], float]:
    coeffs: dict[str, float] = {}
    constant = 0.0
    for sign, num, name in _TERM_RE.findall(text):
        if not num:
            continue
        val = float(num) * (-1.0 if sign == "-" else 1.0)
        if name:
            coeffs[name] = coeffs.get(name, 0.0) + val
        else:
            constant += val
    return coeffs, constant


def parse_lp(text: str) -> MipModel:
    """Read a file produced by :func:`lp_string` back into a model."""
    header = {}
    rows: list[Row] = []
    objective: dict[str, float] = {}
    constant = 0.0
    bounds: dict[str, tuple[float, float]] = {}
    binaries: list[str] = []
    section = ""
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            for token in line[1:].split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    header[k] = v
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "binaries", "end"):
            section = low
            continue
        if section == "minimize":
            body = line.split(":", 1)[1] if ":" in line else line
            objective, constant = _parse_expr(body)
        elif section == "subject to":
            name, body = line.split(":", 1)
            for sense in ("<=", ">=", "="):
                if f" {sense} " in body:
                    expr, rhs = body.rsplit(f" {sense} ", 1)
                    coeffs, _ = _parse_expr(expr)
                    rows.append(Row(name.strip(), coeffs, sense, float(rhs)))
                    break
        elif section == "bounds":
            if " >= " in line and " <= " not in line:
                name, lo = line.split(" >= ")
                bounds[name.strip()] = (float(lo), INF)
            else:
                lo, rest = line.split(" <= ", 1)
                name, hi = rest.split(" <= ")
                bounds[name.strip()] = (float(lo), float(hi))
        elif section == "binaries":
            binaries.extend(line.split())

    variables: dict[str, VarDef] = {}
    for name in binaries:
        variables[name] = VarDef(name, True, 0.0, 1.0)
    for name, (lo, hi) in bounds.items():
        variables[name] = VarDef(name, False, lo, hi)
    return MipModel(
        variant=Variant(header["variant"]),
        n=int(header["n"]),
        m1=float(header["m1"]),
        m2=float(header["m2"]),
        variables=variables,
        rows=tuple(rows),
        objective=objective,
        objective_constant=float(header["const"]),
    )
