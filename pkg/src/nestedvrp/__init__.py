"""Drone-truck surveillance routing toolkit.

A single drone observes a set of locations while a single truck follows to
swap its batteries; the goal is the shortest mission makespan.  The package
provides exact solving at small scale, a destroy/repair neighborhood search
at large scale, an analytic lower bound, seeded benchmark generation, and
export of the mixed-integer models for external solvers.
"""

from .bound import LowerBound, lower_bound
from .cnu import (
    BatteryParams,
    InfeasibleSequenceError,
    TaskSequence,
    UnitCostQuery,
    build_task_sequence,
    solve_cnu,
    solve_cnu_open,
    unit_cost,
)
from .core import (
    Instance,
    Location,
    NestedUnit,
    ParameterError,
    Solution,
    StructureError,
    TravelMatrices,
    UnitKind,
    ValidationReport,
    build_travel_matrices,
    load_instance,
    load_solution,
    makespan,
    normalize_observations,
    save_instance,
    save_solution,
    validate_solution,
)
from .exact import solve_exact, solve_exact_open
from .generator import GenSpec, Pattern, generate
from .model import MipModel, Variant, build_model, check_assignment, export_lp, parse_lp, solution_to_assignment
from .ns import NsParams, NsResult, accept, destroy, initialize, reconstruct, solve_ns
from .tsp import SizeError, Tour, solve_tsp_exact, solve_tsp_heuristic

__version__ = "0.1.0"
