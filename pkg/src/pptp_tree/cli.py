"""Command line entry point: ``pptp-tree <solve|oracle|simulate|gen|check>``.

Reports go to stdout as one JSON object per line, diagnostics to stderr.
Exit codes: 0 success, 1 usage, 2 parse/validation, 3 resource guard.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from . import oracle
from .envelope import description_to_json, envelope_to_tsv
from .instance import (
    GeneratorParams,
    InstanceError,
    SHAPES,
    check_instance_data,
    generate_instance,
    load_instance,
    serialize_instance,
)
from .solver import solve

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _round(obj: Any) -> Any:
    """Round every float to 12 significant digits; non-finite values become null."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _emit(report: dict, output: str | None = None) -> None:
    line = json.dumps(_round(report))
    if output:
        Path(output).write_text(line + "\n", encoding="utf-8")
    else:
        print(line)


def _report(command: str, name: str, t0: float, payload: dict) -> dict:
    return {"command": command, "instance_name": name, "wall_time_ms": (time.perf_counter() - t0) * 1e3, **payload}


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.path, args.cost_convention)
    sol = solve(inst, keep_envelope=bool(args.envelope))
    payload: dict[str, Any] = {
        "selected": list(sol.selected),
        "expected_profit": sol.expected_profit,
        "expected_revenue": sol.expected_revenue,
        "expected_cost": sol.expected_cost,
    }
    if args.envelope == "json":
        payload["envelope"] = description_to_json(sol.envelope)
    _emit(_report("solve", inst.name, t0, payload), args.output)
    if args.envelope == "tsv":
        sys.stdout.write(envelope_to_tsv(sol.envelope))
    return EXIT_OK


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.path, args.cost_convention)
    res = oracle.brute_force_solve(inst, limit=args.limit)
    sel = sorted(res.maximal_optimal_set)
    payload = {
        "selected": sel,
        "expected_profit": res.best_profit,
        "expected_revenue": oracle.expected_revenue(inst, sel),
        "expected_cost": oracle.expected_cost(inst, sel),
        "optimal_set_count": len(res.all_optima),
    }
    _emit(_report("oracle", inst.name, t0, payload), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.path, args.cost_convention)
    if args.set.strip() == "solve":
        chosen = list(solve(inst).selected)
    else:
        try:
            chosen = [int(t) for t in args.set.replace(" ", "").split(",") if t]
        except ValueError:
            raise UsageError(f"--set must be 'solve' or comma-separated ids, got {args.set!r}") from None
    for v in chosen:
        if v not in inst:
            raise oracle.OracleError(f"unknown node id {v} in --set")
    sim = oracle.simulate(inst, chosen, args.samples, args.seed)
    exact = oracle.expected_profit(inst, chosen)
    diff = sim.mean_profit - exact
    if sim.std_error > 0:
        gap = diff / sim.std_error
    else:
        gap = 0.0 if abs(diff) <= 1e-9 * max(1.0, abs(exact)) else math.copysign(math.inf, diff)
    payload = {
        "set": sorted(chosen),
        "samples": sim.samples,
        "seed": args.seed,
        "mean_profit": sim.mean_profit,
        "std_error": sim.std_error,
        "mean_cost": sim.mean_cost,
        "mean_revenue": sim.mean_revenue,
        "expected_profit": exact,
        "gap_std_errors": gap,
    }
    _emit(_report("simulate", inst.name, t0, payload), args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    params = GeneratorParams(
        max_children=args.max_children,
        edge_cost_range=tuple(args.edge_cost_range),
        prize_range=tuple(args.prize_range),
        prob_range=tuple(args.prob_range),
        junction_fraction=args.junction_fraction,
        shape=args.shape,
    )
    try:
        inst = generate_instance(args.nodes, args.seed, params, name=args.name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = serialize_instance(inst)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    payload = {
        "nodes": inst.n,
        "customers": len(inst.customers),
        "seed": args.seed,
        "output": args.output,
    }
    print(json.dumps(_round(_report("gen", inst.name, t0, payload))), file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    try:
        data = json.loads(Path(args.path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        violations = [f"malformed JSON: {exc}"]
        data = {}
    else:
        violations = check_instance_data(data) if isinstance(data, dict) else ["malformed: top level must be a JSON object"]
    for v in violations:
        print(f"{args.path}: {v}", file=sys.stderr)
    name = data.get("name", "") if isinstance(data, dict) else ""
    _emit(_report("check", str(name), t0, {"ok": not violations, "violations": violations}))
    return EXIT_OK if not violations else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pptp-tree", description="Probabilistic profitable tour problem on trees.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_instance(sp):
        sp.add_argument("path", help="instance JSON file")
        sp.add_argument("--cost-convention", choices=("round_trip", "one_way"), default=None,
                        help="override the file's cost convention")
        sp.add_argument("--output", help="write the report here instead of stdout")

    sp = sub.add_parser("solve", help="exact optimal commitment set")
    with_instance(sp)
    sp.add_argument("--envelope", nargs="?", const="tsv", choices=("tsv", "json"),
                    help="also emit the root envelope (TSV after the report, or embedded JSON)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("oracle", help="brute-force optimum (small instances only)")
    with_instance(sp)
    sp.add_argument("--limit", type=int, default=oracle.MAX_BRUTE_FORCE, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate for a committed set")
    with_instance(sp)
    sp.add_argument("--set", required=True, help="comma-separated ids, empty string, or 'solve'")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("gen", help="generate a random instance")
    sp.add_argument("--nodes", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--shape", choices=SHAPES, default="random")
    sp.add_argument("--max-children", type=int, default=3)
    sp.add_argument("--edge-cost-range", type=float, nargs=2, default=(1.0, 10.0), metavar=("LO", "HI"))
    sp.add_argument("--prize-range", type=float, nargs=2, default=(1.0, 20.0), metavar=("LO", "HI"))
    sp.add_argument("--prob-range", type=float, nargs=2, default=(0.05, 1.0), metavar=("LO", "HI"))
    sp.add_argument("--junction-fraction", type=float, default=0.2)
    sp.add_argument("--name", default=None)
    sp.add_argument("--output", help="instance file to write (stdout if omitted)")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("check", help="validate an instance file")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_check)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pptp-tree: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except oracle.TooLargeError as exc:
        print(f"pptp-tree: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InstanceError, oracle.OracleError) as exc:
        print(f"pptp-tree: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"pptp-tree: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
