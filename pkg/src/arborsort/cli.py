"""Command-line front end.

Exit codes: 0 success, 1 a verification or invariant check failed, 2 bad
usage or unreadable input.

Examples::

    arborsort gen bitrev 8 > p.txt
    arborsort bounds p.txt
    arborsort sort p.txt --algo par
    arborsort satisfy p.txt --method trace --output s.txt && arborsort verify s.txt
    arborsort bench --sizes 2^4..2^10 --families bitrev,random --seeds 0,1
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import adaptive_sort, bounds, geometry
from .permutation import FAMILIES, Permutation, PermutationError, generate, inverse, parse, serialize

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SATISFY_METHODS = ("quicksort", "mergesort", "trace")


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_permutation(path: str) -> Permutation:
    try:
        return parse(_read(path))
    except PermutationError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _read_points(path: str) -> geometry.PointSet:
    try:
        return geometry.from_text(_read(path))
    except geometry.GeometryError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _format(args, allowed: tuple[str, ...]) -> str:
    fmt = args.format or allowed[0]
    if fmt not in allowed:
        raise UsageError(f"{args.command} supports --format {'/'.join(allowed)}, not {fmt}")
    return fmt


def parse_sizes(text: str) -> list[int]:
    """``16,64`` or ``2^4..2^10`` (every power of two in the range), mixed freely."""

    def one(tok: str) -> int:
        tok = tok.strip()
        try:
            if "^" in tok:
                base, exp = tok.split("^")
                return int(base) ** int(exp)
            return int(tok)
        except ValueError:
            raise UsageError(f"bad size {tok!r}") from None

    sizes: list[int] = []
    for part in text.split(","):
        if not part.strip():
            continue
        if ".." in part:
            a, b = (one(x) for x in part.split("..", 1))
            if a < 1 or a & (a - 1) or b & (b - 1):
                raise UsageError(f"range {part!r} needs power-of-two endpoints")
            sizes.extend(1 << e for e in range(a.bit_length() - 1, b.bit_length()))
        else:
            sizes.append(one(part))
    if any(n < 1 for n in sizes):
        raise UsageError("sizes must be positive")
    return sizes


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


# -- commands ----------------------------------------------------------------


def cmd_gen(args) -> tuple[int, str]:
    _format(args, ("text",))
    try:
        p = generate(args.family, args.n, seed=args.seed, block=args.block)
    except PermutationError as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK, serialize(p)


def cmd_bounds(args) -> tuple[int, str]:
    fmt = _format(args, ("csv", "text"))
    p = _read_permutation(args.input)
    try:
        tree = bounds.build_tree(p, _read(args.shape).strip() if args.shape else None)
    except bounds.ShapeError as exc:
        raise UsageError(f"shape: {exc}") from None
    rep = bounds.compute_bounds(p, tree)
    if fmt == "csv":
        return EXIT_OK, bounds.bounds_to_csv(rep)
    return EXIT_OK, f"n={rep.n} ib={rep.ib_total} lib={rep.lib_total!r} lib/ib={rep.ratio!r}\n"


def _sort_problems(p: Permutation, rep) -> list[str]:
    problems = []
    if rep.output != sorted(p.entries):
        problems.append("output is not the sorted input")
    if rep.span_depth > rep.meter.accesses:
        problems.append(f"span {rep.span_depth} exceeds accesses {rep.meter.accesses}")
    if rep.ib > rep.lib + 1e-9:
        problems.append(f"ib {rep.ib} exceeds lib {rep.lib}")
    merged = inverse(p) if rep.algorithm == "partition-dual" else p
    for r in rep.trace:
        gap = geometry.missing_boundaries(merged, r)
        if gap:
            problems.append(f"merge {r.left}+{r.right} misses block boundaries {sorted(gap)[:5]}")
            break
    return problems


def cmd_sort(args) -> tuple[int, str]:
    fmt = _format(args, ("csv", "text"))
    p = _read_permutation(args.input)
    rep = adaptive_sort.run_sort(args.algo, p)
    problems = _sort_problems(p, rep)
    for msg in problems:
        print(f"sort check failed: {msg}", file=sys.stderr)
    if fmt == "csv":
        out = adaptive_sort.rows_to_csv([adaptive_sort.SortRow.from_report(rep)])
    else:
        out = "".join(f"{k}\n" for k in rep.output)
    return (EXIT_FAIL if problems else EXIT_OK), out


def cmd_satisfy(args) -> tuple[int, str]:
    fmt = _format(args, ("text", "svg"))
    p = _read_permutation(args.input)
    status = EXIT_OK
    if args.method == "quicksort":
        s = geometry.satisfy_quicksort(geometry.plot(p), args.seed)
    elif args.method == "mergesort":
        s = geometry.satisfy_mergesort(geometry.plot(p))
    else:
        rep = adaptive_sort.run_sort(args.algo, p)
        s, st = geometry.arboral_mergesort_stats(p, rep.trace)
        print(
            f"trace accesses={st.trace_keys} placed keys={st.placed_keys} "
            f"attempted={st.attempted} added={st.added}",
            file=sys.stderr,
        )
        if st.attempted > 6 * st.trace_keys or st.added > 6 * st.trace_keys:
            print("added points exceed 6x the trace accesses", file=sys.stderr)
            status = EXIT_FAIL
    out = geometry.to_text(s) if fmt == "text" else geometry.render_svg(s)
    return status, out


def cmd_verify(args) -> tuple[int, str]:
    _format(args, ("text",))
    s = _read_points(args.input)
    rep = geometry.is_satisfied(s)
    if rep.satisfied:
        return EXIT_OK, f"satisfied ({len(s)} points, {s.added_count} added)\n"
    a, b = rep.violation
    return EXIT_FAIL, f"not satisfied: empty rectangle between ({a.x}, {a.y}) and ({b.x}, {b.y})\n"


def cmd_svg(args) -> tuple[int, str]:
    _format(args, ("svg",))
    return EXIT_OK, geometry.render_svg(_read_points(args.input))


def cmd_bench(args) -> tuple[int, str]:
    _format(args, ("csv",))
    sizes = parse_sizes(args.sizes)
    families = _csv_list(args.families)
    algos = _csv_list(args.algos)
    try:
        seeds = [int(s) for s in _csv_list(args.seeds)] if args.seeds is not None else [args.seed]
    except ValueError:
        raise UsageError(f"bad seed list {args.seeds!r}") from None
    if not sizes or not families or not algos or not seeds:
        raise UsageError("bench needs at least one size, family, algorithm and seed")
    for f in families:
        if f not in FAMILIES:
            raise UsageError(f"unknown family {f!r}; expected one of {', '.join(FAMILIES)}")
    for a in algos:
        if a not in adaptive_sort.ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}; expected one of {', '.join(adaptive_sort.ALGORITHMS)}")

    rows, work_lib, lib_ib, failures = [], [], [], []
    for family in families:
        for n in sizes:
            # deterministic families do not depend on the seed: one row each
            for seed in seeds if family == "random" else [0]:
                try:
                    p = generate(family, n, seed=seed, block=args.block)
                except PermutationError as exc:
                    raise UsageError(f"{family} n={n}: {exc}") from None
                reports = {}
                for algo in algos:
                    rep = adaptive_sort.run_sort(algo, p)
                    reports[algo] = rep
                    cell = f"algo={algo} family={family} n={n} seed={seed}"
                    problems = _sort_problems(p, rep)
                    if args.witness and algo != "partition-dual":
                        s, st = geometry.arboral_mergesort_stats(p, rep.trace)
                        if not geometry.is_satisfied(s):
                            problems.append("arboral witness is not satisfied")
                        if st.attempted > 6 * st.trace_keys:
                            problems.append(f"witness uses {st.attempted} accesses > 6 x {st.trace_keys}")
                    failures += [f"{cell}: {msg}" for msg in problems]
                    rows.append(adaptive_sort.SortRow.from_report(rep, family, seed))
                    work_lib.append(rep.meter.accesses / max(rep.lib, 1.0))
                    lib_ib.append(rep.lib / rep.ib if rep.ib else math.inf)
                if "seq" in reports and "par" in reports:
                    a, b = reports["seq"], reports["par"]
                    if a.output != b.output or [r.blocks for r in a.trace] != [r.blocks for r in b.trace]:
                        failures.append(f"family={family} n={n} seed={seed}: seq and par disagree")
    for msg in failures:
        print(f"invariant failed: {msg}", file=sys.stderr)
    text = adaptive_sort.rows_to_csv(rows, {"work_lib": work_lib, "lib_ib": lib_ib})
    return (EXIT_FAIL if failures else EXIT_OK), text


# -- parser ------------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0, help="RNG seed (default 0)")
    parser.add_argument("--output", "-o", default=default, help="write to this file instead of stdout")
    parser.add_argument("--format", choices=("csv", "text", "svg"), default=default, help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arborsort", description=__doc__.split("\n\n")[0])
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen", parents=[common], help="generate a permutation")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("n", type=int)
    p.add_argument("--block", type=int, help="block size for blockbitrev (default about lg n)")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("bounds", parents=[common], help="interleave and log-interleave bounds (CSV)")
    p.add_argument("input", help="permutation file, - for stdin")
    p.add_argument("--shape", help="file with a tree shape in (. .) notation")
    p.set_defaults(run=cmd_bounds)

    p = sub.add_parser("sort", parents=[common], help="run one sort and report its costs (CSV)")
    p.add_argument("input")
    p.add_argument("--algo", choices=tuple(adaptive_sort.ALGORITHMS), default="seq")
    p.set_defaults(run=cmd_sort)

    p = sub.add_parser("satisfy", parents=[common], help="build an arborally satisfied superset")
    p.add_argument("input")
    p.add_argument("--method", choices=SATISFY_METHODS, default="mergesort")
    p.add_argument("--algo", choices=("seq", "par"), default="seq", help="sort whose trace drives --method trace")
    p.set_defaults(run=cmd_satisfy)

    p = sub.add_parser("verify", parents=[common], help="check a point set; exit 1 if unsatisfied")
    p.add_argument("input")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("svg", parents=[common], help="render a point set")
    p.add_argument("input")
    p.set_defaults(run=cmd_svg)

    p = sub.add_parser("bench", parents=[common], help="sort a grid of inputs, check invariants, emit CSV")
    p.add_argument("--sizes", required=True, help="e.g. 16,64 or 2^4..2^10")
    p.add_argument("--families", default=",".join(FAMILIES))
    p.add_argument("--seeds", help="comma-separated seeds for the random family (default: --seed)")
    p.add_argument("--algos", default="seq,par")
    p.add_argument("--block", type=int)
    p.add_argument("--witness", action="store_true", help="also build and verify the arboral witness")
    p.set_defaults(run=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, text = args.run(args)
    except UsageError as exc:
        print(f"arborsort {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
