"""Command-line driver: gen, solve, lb, validate, export, bench, plot."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from multiprocessing import Pool

from . import bound, exact, generator, model, ns
from .core import (
    ParameterError,
    StructureError,
    load_instance,
    load_solution,
    save_instance,
    save_solution,
    validate_solution,
)
from .cnu import InfeasibleSequenceError
from .generator import GenSpec, PATTERN_ALIASES
from .tsp import SizeError

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2


def _default_seed() -> int:
    env = os.environ.get("NESTEDVRP_SEED")
    return int(env) if env else 0


def _error_json(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _cmd_gen(args) -> int:
    pattern = PATTERN_ALIASES.get(args.pattern.lower())
    if pattern is None:
        _error_json("usage", f"unknown pattern {args.pattern!r}")
        return EXIT_USAGE
    spec = GenSpec(pattern=pattern, n=args.n, alpha=args.alpha,
                   seed=args.seed, obs_max=args.obs_max)
    instance = generator.generate(spec)
    save_instance(instance, args.out)
    print(f"wrote {args.out} ({instance.n} locations, id {instance.id})")
    return EXIT_OK


def _cmd_solve(args) -> int:
    instance = load_instance(getattr(args, "in"))
    trace = None
    try:
        if args.algo == "exact":
            solution = exact.solve_exact(instance, max_n=args.max_n)
        elif args.algo == "cnu":
            solution = ns.initialize(instance)
        else:
            params = ns.NsParams(beta=args.beta, n_unch=args.nunch,
                                 n_max=args.nmax, seed=args.seed)
            result = ns.solve_ns(instance, params)
            solution = result.solution
            trace = result.trace
    except InfeasibleSequenceError as exc:
        _error_json("infeasible", str(exc))
        return EXIT_INFEASIBLE
    except SizeError as exc:
        _error_json("usage", str(exc))
        return EXIT_USAGE

    report = validate_solution(instance, solution)
    if not report.ok:
        _error_json("internal", "; ".join(report.violations))
        return EXIT_INFEASIBLE
    if args.out:
        save_solution(solution, args.out)
    if trace is not None and args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "incumbent_s", "best_s", "accepted",
                             "destroyed_unit_idx"])
            for rec in trace:
                writer.writerow([rec.iteration, repr(rec.incumbent_s),
                                 repr(rec.best_s), int(rec.accepted),
                                 rec.destroyed_unit])
    print(json.dumps({
        "instance_id": solution.instance_id,
        "algo": args.algo,
        "makespan_s": solution.makespan,
        "units": len(solution.units),
        "swap_stops": len(solution.swap_stops),
    }))
    return EXIT_OK


def _cmd_lb(args) -> int:
    instance = load_instance(args.instance)
    lb = bound.lower_bound(instance)
    print(f"{lb.seconds:.6f} {'certified' if lb.certified else 'estimate'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    instance = load_instance(args.instance)
    try:
        solution = load_solution(args.solution, instance)
        report = validate_solution(instance, solution)
    except (StructureError, InfeasibleSequenceError) as exc:
        _error_json("structure", str(exc))
        return EXIT_INFEASIBLE
    if report.ok:
        print("valid")
        return EXIT_OK
    _error_json("invalid", "; ".join(report.violations))
    return EXIT_INFEASIBLE


def _cmd_export(args) -> int:
    instance = load_instance(getattr(args, "in"))
    variant = model.VARIANT_ALIASES.get(args.variant.lower())
    if variant is None:
        _error_json("usage", f"unknown variant {args.variant!r}")
        return EXIT_USAGE
    built = model.build_model(instance, variant)
    model.export_lp(built, args.out)
    print(f"wrote {args.out} ({built.binary_count} binaries, "
          f"{built.constraint_count} constraints)")
    return EXIT_OK


def _bench_one(job: tuple[str, int, float, int]) -> dict:
    pattern, n, alpha, seed = job
    spec = GenSpec(pattern=PATTERN_ALIASES[pattern], n=n, alpha=alpha,
                   seed=seed)
    instance = generator.generate(spec)
    init = ns.initialize(instance)
    t0 = time.perf_counter()
    result = ns.solve_ns(instance, ns.NsParams(seed=seed))
    elapsed = time.perf_counter() - t0
    lb = bound.lower_bound(instance)
    c_ns = result.solution.makespan
    gap = (c_ns - lb.seconds) / lb.seconds * 100.0 if lb.seconds > 0 else float("inf")
    return {
        "pattern": pattern,
        "N": n,
        "alpha": alpha,
        "seed": seed,
        "C_ns": c_ns,
        "C_cnu": init.makespan,
        "C_lb": lb.seconds,
        "gap_pct": gap,
        "T_ns_s": elapsed,
        "iters": result.iterations,
        "n_swaps": len(result.solution.swap_stops),
    }


def _parse_grid(grid: str) -> tuple[list[str], list[int], list[float]]:
    parts = grid.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be PATTERNS:NS:ALPHAS, e.g. u:20,50:1,2")
    patterns = [p.strip() for p in parts[0].split(",") if p.strip()]
    for p in patterns:
        if p.lower() not in PATTERN_ALIASES:
            raise ValueError(f"unknown pattern {p!r}")
    ns_list = [int(x) for x in parts[1].split(",") if x.strip()]
    alphas = [float(x) for x in parts[2].split(",") if x.strip()]
    return patterns, ns_list, alphas


def _cmd_bench(args) -> int:
    try:
        patterns, sizes, alphas = _parse_grid(args.grid)
    except ValueError as exc:
        _error_json("usage", str(exc))
        return EXIT_USAGE
    base = args.seed
    jobs = [
        (p.lower(), n, a, base + rep)
        for p in patterns for n in sizes for a in alphas
        for rep in range(args.reps)
    ]
    if args.jobs == 1:
        rows = [_bench_one(job) for job in jobs]
    else:
        with Pool(processes=args.jobs) as pool:
            rows = pool.map(_bench_one, jobs)
    fields = ["pattern", "N", "alpha", "seed", "C_ns", "C_cnu", "C_lb",
              "gap_pct", "T_ns_s", "iters", "n_swaps"]
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def _cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    instance = load_instance(args.instance)
    solution = load_solution(args.solution, instance)
    coords = {loc.id: (loc.x, loc.y) for loc in instance.locations}

    fig, ax = plt.subplots(figsize=(8, 8))
    xs = [loc.x for loc in instance.locations]
    ys = [loc.y for loc in instance.locations]
    ax.scatter(xs, ys, s=12, color="black", zorder=3)

    route = solution.drone_route
    for a, b in zip(route, route[1:]):
        (x1, y1), (x2, y2) = coords[a], coords[b]
        ax.plot([x1, x2], [y1, y2], "k--", linewidth=0.8, zorder=1)
    ship_pairs = set()
    for u in solution.units:
        if u.kind.value == "shipment":
            lo = route[(u.span[0] + 1) // 2]
            hi = route[(u.span[1] + 1) // 2]
            ship_pairs.add((lo, hi))
    seen = set()
    for a, b in solution.truck_route:
        (x1, y1), (x2, y2) = coords[a], coords[b]
        if (a, b) in ship_pairs:
            ax.plot([x1, x2], [y1, y2], color="tab:blue", linewidth=1.8,
                    zorder=2,
                    label="drone aboard truck" if "s" not in seen else None)
            seen.add("s")
        else:
            ax.plot([x1, x2], [y1, y2], "k-", linewidth=1.2, zorder=2,
                    label="truck" if "t" not in seen else None)
            seen.add("t")
    for loc_id, side in solution.swap_stops:
        x, y = coords[loc_id]
        color = "green" if side == "before" else "red"
        key = f"z{side}"
        ax.scatter([x], [y], s=70, facecolors="none", edgecolors=color,
                   zorder=4,
                   label=(f"swap {side} observation" if key not in seen
                          else None))
        seen.add(key)
    ax.plot([], [], "k--", linewidth=0.8, label="drone")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(
        f"{solution.instance_id}: makespan {solution.makespan:.1f} s, "
        f"{len(solution.units)} units"
    )
    ax.set_aspect("equal")
    fig.savefig(args.out, format="svg")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nestedvrp",
        description="Drone-truck surveillance routing toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("--pattern", required=True, help="u | sc | dc")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--obs-max", type=float, default=250.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("--algo", choices=["ns", "exact", "cnu"], default="ns")
    p.add_argument("--in", required=True)
    p.add_argument("--out")
    p.add_argument("--trace", help="CSV iteration trace (ns only)")
    p.add_argument("--beta", type=float, default=0.25)
    p.add_argument("--nunch", type=int, default=5)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--max-n", type=int, default=exact.MAX_EXACT_N)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("lb", help="print the makespan lower bound")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_lb)

    p = sub.add_parser("validate", help="check a solution file")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("export", help="write an LP-format model")
    p.add_argument("--variant", default="milp", help="milp | dl | sd")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("bench", help="run a benchmark grid")
    p.add_argument("--grid", required=True,
                   help="PATTERNS:NS:ALPHAS, e.g. u,sc:20,50:1,2")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("plot", help="render routes and swap stops to SVG")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, StructureError) as exc:
        _error_json("usage", str(exc))
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _error_json("io", str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
