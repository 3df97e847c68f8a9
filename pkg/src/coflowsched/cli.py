"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 validation error,
3 ratio or feasibility failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import cells_from_dict, rows_to_csv, run_cells, worst_per_cell
from .generator import SHAPES, GeneratorConfig, generate
from .instance import MODES, InstanceParseError, read_instance, validate, write_instance
from .lp import DEFAULT_MAX_ROUNDS, DEFAULT_TOLERANCE
from .pipeline import PIPELINES, StageError, run_pipeline
from .simulator import Schedule, verify_schedule

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_FAILED = 0, 1, 2, 3


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_instance(path: str):
    try:
        return read_instance(Path(path).read_bytes())
    except OSError as e:
        raise InstanceParseError(f"{path}: {e.strerror}") from e


def cmd_gen(args) -> int:
    cfg = GeneratorConfig(
        seed=args.seed, num_ports=args.ports, num_cores=args.cores, num_coflows=args.coflows,
        mode=args.mode, density=args.density, size_lo=args.size_lo, size_hi=args.size_hi,
        release_max=args.release_max, weight_lo=args.weight_lo, weight_hi=args.weight_hi,
        precedence=args.precedence, dag_prob=args.dag_prob, num_jobs=args.jobs,
    )
    try:
        inst = generate(cfg)
    except ValueError as e:
        print(f"gen: {e}", file=sys.stderr)
        return EXIT_USAGE
    _emit(write_instance(inst).decode(), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    inst = _load_instance(args.instance)
    try:
        result = run_pipeline(inst, args.pipeline, instance_id=Path(args.instance).stem,
                              backend=args.backend, tolerance=args.tolerance,
                              max_rounds=args.max_rounds, preempt=args.preempt)
    except StageError as e:
        print(f"run: stage {e.stage}: {e}", file=sys.stderr)
        return EXIT_INVALID if e.stage in ("validate", "lp-build") else EXIT_FAILED
    _emit(result.to_json(), args.out)
    r = result.ratio
    print(f"{r.instance_id}: cost {r.alg_cost} lp {r.lp_objective:.6g} ratio {r.ratio:.4f} "
          f"bound {r.bound} -> {'pass' if result.ok else 'FAIL'}", file=sys.stderr)
    if not result.feasibility.ok:
        print(f"run: infeasible schedule: {result.feasibility.message}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAILED


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    report = validate(inst)
    if not report.ok:
        print("verify: invalid instance: " + "; ".join(report.violations), file=sys.stderr)
        return EXIT_INVALID
    try:
        doc = json.loads(Path(args.schedule).read_text())
        rows = doc["schedule"] if isinstance(doc, dict) else doc
        schedule = Schedule.from_dict(rows)
    except (OSError, ValueError, KeyError, TypeError) as e:
        print(f"verify: cannot read schedule: {e}", file=sys.stderr)
        return EXIT_USAGE
    feas = verify_schedule(inst, schedule)
    if feas.ok:
        print("feasible")
        return EXIT_OK
    print(f"infeasible (check {feas.check}, t={feas.witness_time}): {feas.message}")
    return EXIT_FAILED


def cmd_bench(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
        cells = cells_from_dict(doc, args.seed or 0)
    except (OSError, ValueError, KeyError) as e:
        print(f"bench: bad config: {e}", file=sys.stderr)
        return EXIT_USAGE
    rows = run_cells(cells, workers=args.workers, backend=args.backend, tolerance=args.tolerance,
                     max_rounds=args.max_rounds, preempt=args.preempt)
    text = rows_to_csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(text)
    else:
        sys.stdout.write(text)
    failures = 0
    for name, (worst, worst_norm, fails, n) in worst_per_cell(cells, rows).items():
        failures += fails
        print(f"{name}: {n} rows, worst ratio {worst:.4f} ({worst_norm:.3f} of bound), failures {fails}",
              file=sys.stderr)
    return EXIT_OK if failures == 0 else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coflowsched", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("--backend", default="highs", choices=("highs", "simplex", "simplex-exact"))
        sp.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
        sp.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
        sp.add_argument("--preempt", action=argparse.BooleanOptionalAction, default=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", choices=MODES, default="divisible")
    g.add_argument("--ports", type=int, default=4)
    g.add_argument("--cores", type=int, default=2)
    g.add_argument("--coflows", type=int, default=5)
    g.add_argument("--density", type=float, default=0.4)
    g.add_argument("--size-lo", type=int, default=1)
    g.add_argument("--size-hi", type=int, default=5)
    g.add_argument("--release-max", type=int, default=0)
    g.add_argument("--weight-lo", type=int, default=1)
    g.add_argument("--weight-hi", type=int, default=3)
    g.add_argument("--precedence", choices=SHAPES, default="none")
    g.add_argument("--dag-prob", type=float, default=0.3)
    g.add_argument("--jobs", type=int, default=None)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="LP, schedule, simulate, verify and ratio-check one instance")
    r.add_argument("instance")
    r.add_argument("--pipeline", choices=PIPELINES, default=None,
                   help="defaults to the instance's mode")
    r.add_argument("--mode", dest="pipeline", choices=MODES, help=argparse.SUPPRESS)
    solver_flags(r)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="check a schedule (or run report) for feasibility")
    v.add_argument("instance")
    v.add_argument("schedule")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a config set and write bench.csv")
    b.add_argument("config")
    b.add_argument("--out")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--seed", type=int, default=None, help="offset added to every cell's seed range")
    solver_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except InstanceParseError as e:
        print(f"{args.command}: parse error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
