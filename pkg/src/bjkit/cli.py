"""Command-line frontend.

Subcommands:
    bjkit sat solve FILE      solve a DIMACS CNF instance
    bjkit sat enum FILE       enumerate its models
    bjkit color solve FILE    colour a JSON graph instance
    bjkit color enum FILE     enumerate its colourings
    bjkit gen 3sat            write a random 3-SAT instance

Exit codes follow the solver-competition convention: 10 when a
model/colouring was found, 20 when there is none, 0 for non-solve
commands, 1 for usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from bjkit import cnf, coloring, sat, viz
from bjkit.engine import SearchStats
from bjkit.trace import TraceSink

EXIT_FOUND = 10
EXIT_NONE = 20
EXIT_OK = 0
EXIT_ERROR = 1


def emit_stats(stats: SearchStats, fmt: str, out=None) -> None:
    """Write run counters as JSON or aligned text."""
    out = out or sys.stdout
    d = stats.as_dict()
    if fmt == "json":
        out.write(json.dumps(d) + "\n")
    else:
        width = max(len(k) for k in d)
        for k, v in d.items():
            val = f"{v:.6f}" if isinstance(v, float) else str(v)
            out.write(f"{k:<{width}}  {val}\n")


def export_dot(snapshot, path: str) -> None:
    """Write the conflict-time implication graph as DOT text."""
    text = viz.export_dot(snapshot)
    with open(path, "w") as f:
        f.write(text)


def _parse_assumptions(text: str) -> list[tuple[int, bool]]:
    script = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ValueError(f"bad assumption {chunk!r}: expected var=value")
        name, _, value = chunk.partition("=")
        digits = "".join(ch for ch in name if ch.isdigit())
        if not digits:
            raise ValueError(f"bad assumption variable {name!r}")
        value = value.strip().lower()
        if value not in ("true", "false", "1", "0"):
            raise ValueError(f"bad assumption value {value!r}")
        script.append((int(digits), value in ("true", "1")))
    return script


def _open_sink(path: Optional[str], stack: list) -> Optional[TraceSink]:
    if path is None:
        return None
    f = open(path, "w")
    stack.append(f)
    return TraceSink(stream=f, keep=False)


def _load_cnf(path: str) -> cnf.CnfInstance:
    with open(path) as f:
        return cnf.parse_dimacs(f.read())


def _load_coloring(path: str) -> coloring.ColoringInstance:
    with open(path) as f:
        return coloring.ColoringInstance.from_json_obj(json.load(f))


def _model_line(model: dict[int, bool]) -> str:
    lits = " ".join(str(v if model[v] else -v) for v in sorted(model))
    return f"v {lits} 0"


def _cmd_sat_solve(args) -> int:
    instance = _load_cnf(args.file)
    files: list = []
    try:
        sink = _open_sink(args.trace, files)
        options = sat.SolveOptions(
            strategy=args.strategy,
            k=args.k,
            decision_script=_parse_assumptions(args.assume) if args.assume else None,
            sink=sink,
        )
        result = sat.solve(instance, options)
    finally:
        for f in files:
            f.close()
    print("s SATISFIABLE" if result.sat else "s UNSATISFIABLE")
    if result.sat:
        print(_model_line(result.model))
    if args.dot:
        if result.conflict_graph is None:
            print("no conflict snapshot; dot export refused", file=sys.stderr)
        else:
            export_dot(result.conflict_graph, args.dot)
    if args.plot:
        if result.conflict_graph is None:
            print("no conflict snapshot; plot refused", file=sys.stderr)
        else:
            viz.render_implication_graph(result.conflict_graph, args.plot)
    if args.stats:
        emit_stats(result.stats, args.stats)
    return EXIT_FOUND if result.sat else EXIT_NONE


def _cmd_sat_enum(args) -> int:
    instance = _load_cnf(args.file)
    options = sat.SolveOptions(strategy=args.strategy, k=args.k)
    stats = SearchStats()
    start = time.perf_counter()
    count = 0
    for model in sat.enumerate_models(instance, options, stats=stats):
        print(_model_line(model))
        count += 1
        if args.limit and count >= args.limit:
            break
    stats.wall_time_s = time.perf_counter() - start
    print(f"c {count} models")
    if args.stats:
        emit_stats(stats, args.stats)
    return EXIT_FOUND if count else EXIT_NONE


def _cmd_color_solve(args) -> int:
    instance = _load_coloring(args.file)
    files: list = []
    stats = SearchStats()
    try:
        sink = _open_sink(args.trace, files)
        solution = coloring.solve(instance, sink, stats=stats)
    finally:
        for f in files:
            f.close()
    if solution is None:
        print("s UNSATISFIABLE")
        if args.stats:
            emit_stats(stats, args.stats)
        return EXIT_NONE
    print("s SATISFIABLE")
    print("a " + " ".join(f"{v}={c}" for v, c in sorted(solution.assignment.items())))
    if args.plot:
        viz.render_coloring(instance, solution.assignment, args.plot)
    if args.stats:
        emit_stats(solution.stats, args.stats)
    return EXIT_FOUND


def _cmd_color_enum(args) -> int:
    instance = _load_coloring(args.file)
    stats = SearchStats()
    start = time.perf_counter()
    count = 0
    for assignment in coloring.enumerate_solutions(instance, stats=stats):
        print("a " + " ".join(f"{v}={c}" for v, c in sorted(assignment.items())))
        count += 1
        if args.limit and count >= args.limit:
            break
    stats.wall_time_s = time.perf_counter() - start
    print(f"c {count} solutions")
    if args.stats:
        emit_stats(stats, args.stats)
    return EXIT_FOUND if count else EXIT_NONE


def _cmd_gen(args) -> int:
    instance = cnf.gen_random_3sat(args.n, args.m, args.seed)
    text = cnf.emit_dimacs(instance)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bjkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sat = sub.add_parser("sat", help="SAT solving on DIMACS CNF files")
    sat_sub = p_sat.add_subparsers(dest="subcommand", required=True)

    def add_sat_common(p):
        p.add_argument("file", help="DIMACS CNF input")
        p.add_argument("--strategy", choices=sat.STRATEGIES, default="last-uip")
        p.add_argument("--k", type=int, default=8,
                       help="persist learnt clauses with fewer than K literals")
        p.add_argument("--stats", choices=("json", "text"))

    p = sat_sub.add_parser("solve", help="decide satisfiability")
    add_sat_common(p)
    p.add_argument("--assume", help='scripted decisions, e.g. "v7=false,v1=true"')
    p.add_argument("--trace", metavar="PATH", help="write a JSONL event trace")
    p.add_argument("--dot", metavar="PATH",
                   help="write the first conflict's implication graph as DOT")
    p.add_argument("--plot", metavar="PATH",
                   help="render the first conflict's implication graph to an image")
    p.set_defaults(func=_cmd_sat_solve)

    p = sat_sub.add_parser("enum", help="enumerate models")
    add_sat_common(p)
    p.add_argument("--limit", type=int, default=0, help="stop after N models")
    p.set_defaults(func=_cmd_sat_enum)

    p_color = sub.add_parser("color", help="graph colouring on JSON instances")
    color_sub = p_color.add_subparsers(dest="subcommand", required=True)

    p = color_sub.add_parser("solve", help="find one colouring")
    p.add_argument("file", help="JSON instance: {colors, vertices, edges}")
    p.add_argument("--trace", metavar="PATH", help="write a JSONL event trace")
    p.add_argument("--plot", metavar="PATH", help="render the coloured graph")
    p.add_argument("--stats", choices=("json", "text"))
    p.set_defaults(func=_cmd_color_solve)

    p = color_sub.add_parser("enum", help="enumerate colourings")
    p.add_argument("file")
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--stats", choices=("json", "text"))
    p.set_defaults(func=_cmd_color_enum)

    p_gen = sub.add_parser("gen", help="generate instances")
    gen_sub = p_gen.add_subparsers(dest="subcommand", required=True)
    p = gen_sub.add_parser("3sat", help="random 3-SAT")
    p.add_argument("-n", type=int, required=True, help="variable count")
    p.add_argument("-m", type=int, required=True, help="clause count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=_cmd_gen)

    return parser


def run(argv: list[str]) -> int:
    """Parse arguments and dispatch; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
