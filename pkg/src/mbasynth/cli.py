"""Command-line entry point.

Exit codes: 0 solution found (or command succeeded), 1 not found within
the bound, 2 timed out, 3 baseline aborted on memory, 64 usage error, 74
I/O error.  ``MBASYNTH_WORKERS`` and ``MBASYNTH_CHUNK`` override the
worker-count and chunk-size defaults; explicit flags win over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import baseline, bench, codec, counting, engine
from .engine import EngineConfig, Specification, Status
from .expr import ParseError, format_word, parse_infix, parse_word, to_infix

EXIT_FOUND = 0
EXIT_NOT_FOUND = 1
EXIT_TIMED_OUT = 2
EXIT_OOM = 3
EXIT_USAGE = 64
EXIT_IO = 74

_STATUS_EXIT = {
    Status.FOUND: EXIT_FOUND,
    Status.NOT_FOUND: EXIT_NOT_FOUND,
    Status.TIMED_OUT: EXIT_TIMED_OUT,
    Status.OOM_ABORTED: EXIT_OOM,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _IoError(Exception):
    pass


def load_spec_file(path) -> Specification:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        w = data["w"]
        k = data["k"]
        pairs = tuple(
            (tuple(parse_word(x, w) for x in p["in"]), parse_word(p["out"], w))
            for p in data["pairs"]
        )
        return Specification(k=k, w=w, pairs=pairs)
    except OSError as exc:
        raise _IoError(f"cannot read spec file {path}: {exc}") from exc
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise _IoError(f"invalid spec file {path}: {exc}") from exc


def write_spec_file(path, spec: Specification) -> None:
    data = {
        "w": spec.w,
        "k": spec.k,
        "pairs": [
            {
                "in": [format_word(v, spec.w) for v in inputs],
                "out": format_word(output, spec.w),
            }
            for inputs, output in spec.pairs
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        return fallback


def _parse_range(text: str) -> range:
    lo, _, hi = text.partition("..")
    return range(int(lo), int(hi) + 1)


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("mbasynth")
    except Exception:
        return "unknown"


def build_parser() -> _Parser:
    p = _Parser(prog="mbasynth", description=__doc__)
    p.add_argument("--version", action="version", version=f"mbasynth {_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="print the expression count table")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--max-size", type=int, required=True)
    c.add_argument("--cumulative", action="store_true")

    d = sub.add_parser("decode", help="rank -> infix expression")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--size", type=int, required=True)
    d.add_argument("--rank", type=int, required=True)

    e = sub.add_parser("encode", help="infix expression -> (size, rank)")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--expr", required=True)

    s = sub.add_parser("synth", help="synthesize from a spec file")
    s.add_argument("--spec", required=True)
    s.add_argument("--max-size", type=int, default=10)
    s.add_argument("--mode", choices=("local", "shuffled"), default="local")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--chunk", type=int, default=None)
    s.add_argument("--timeout", type=float, default=None)
    s.add_argument("--json", action="store_true")

    b = sub.add_parser("baseline", help="cache-based enumeration with a report")
    b.add_argument("--spec", required=True)
    b.add_argument("--max-size", type=int, required=True)
    b.add_argument("--mem-budget", type=int, default=baseline.DEFAULT_MEMORY_BUDGET)
    b.add_argument("--report", choices=("csv", "table"), default="table")

    bn = sub.add_parser("bench", help="benchmark suite tooling")
    bsub = bn.add_subparsers(dest="bench_command", required=True)
    bg = bsub.add_parser("gen", help="generate a suite file")
    bg.add_argument("--seed", type=int, default=0)
    bg.add_argument("--out", required=True)
    bg.add_argument("--sizes", type=_parse_range, default=bench.DEFAULT_SIZES)
    bg.add_argument("--vars", type=_parse_range, default=bench.DEFAULT_VARS)
    bg.add_argument("--per-cell", type=int, default=bench.DEFAULT_PER_CELL)
    br = bsub.add_parser("run", help="run solvers over a suite")
    br.add_argument("--suite", required=True)
    br.add_argument("--solvers", default="simba")
    br.add_argument("--timeout", type=float, default=60.0)
    br.add_argument("--repeats", type=int, default=1)
    br.add_argument("--workers", type=int, default=None)
    br.add_argument("--records", required=True)
    br.add_argument("--summary-dir", default=None)
    return p


def _cmd_count(args) -> int:
    table = counting.build(args.k, args.max_size)
    print(counting.render_tsv(table, with_cumulative=args.cumulative))
    return 0


def _cmd_decode(args) -> int:
    table = counting.build(args.k, args.size)
    print(to_infix(codec.decode(args.rank, args.size, table)))
    return 0


def _cmd_encode(args) -> int:
    expr = parse_infix(args.expr, args.k)
    table = counting.build(args.k, expr.size)
    rank = codec.encode(expr, table)
    print(f"{rank.size} {rank.value}")
    return 0


def _cmd_synth(args) -> int:
    spec = load_spec_file(args.spec)
    workers = args.workers if args.workers is not None else _env_int("MBASYNTH_WORKERS", 1)
    chunk = args.chunk if args.chunk is not None else _env_int("MBASYNTH_CHUNK", engine.DEFAULT_CHUNK)
    table = counting.build(spec.k, args.max_size)
    cfg = EngineConfig(
        size_bound=args.max_size,
        mode=args.mode,
        chunk=chunk,
        workers=workers,
        time_budget=args.timeout,
    )
    outcome = engine.synthesize(spec, table, cfg)
    if args.json:
        report = engine.run_stats(outcome)
        print(json.dumps(
            {
                "status": report["status"],
                "expr": report["expr"],
                "size": report["size"],
                "rank": report["rank"],
                "per_size": report["per_size"],
            }
        ))
    elif outcome.status is Status.FOUND:
        print(to_infix(outcome.expr))
    else:
        print(outcome.status.value)
    return _STATUS_EXIT[outcome.status]


def _cmd_baseline(args) -> int:
    spec = load_spec_file(args.spec)
    outcome, stats = baseline.run_baseline(spec, args.max_size, args.mem_budget)
    print(baseline.cache_report(stats, fmt=args.report))
    if outcome.status is Status.FOUND:
        print(f"found: {to_infix(outcome.expr)} (size {outcome.size})")
    return _STATUS_EXIT[outcome.status]


def _cmd_bench_gen(args) -> int:
    suite = bench.generate_suite(
        args.seed, sizes=args.sizes, var_counts=args.vars, per_cell=args.per_cell
    )
    try:
        bench.write_suite(args.out, suite, seed=args.seed)
    except OSError as exc:
        raise _IoError(f"cannot write suite: {exc}") from exc
    print(f"wrote {len(suite)} instances to {args.out}")
    return 0


def _cmd_bench_run(args) -> int:
    try:
        suite = bench.read_suite(args.suite)
    except OSError as exc:
        raise _IoError(f"cannot read suite: {exc}") from exc
    solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    for s in solvers:
        if s not in bench.SOLVERS:
            raise _IoError(f"unknown solver {s!r}; choose from {bench.SOLVERS}")
    workers = args.workers if args.workers is not None else _env_int("MBASYNTH_WORKERS", 1)
    records, normalized = bench.run_suite(
        suite, solvers=solvers, timeout=args.timeout,
        repeats=args.repeats, workers=workers,
    )
    try:
        bench.write_records_csv(args.records, records)
        if args.summary_dir:
            bench.write_summaries(args.summary_dir, records, normalized)
    except OSError as exc:
        raise _IoError(f"cannot write results: {exc}") from exc
    found = sum(1 for r in records if r.status == "found")
    print(f"{len(records)} runs, {found} found; records in {args.records}")
    return 0


_COMMANDS = {
    "count": _cmd_count,
    "decode": _cmd_decode,
    "encode": _cmd_encode,
    "synth": _cmd_synth,
    "baseline": _cmd_baseline,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            if args.bench_command == "gen":
                return _cmd_bench_gen(args)
            return _cmd_bench_run(args)
        return _COMMANDS[args.command](args)
    except _IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParseError, ValueError, codec.RankError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
