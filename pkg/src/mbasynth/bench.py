"""Benchmark suite generation, difficulty normalization, and batch running.

Suites are grids over (target size, variable count) cells with a fixed
number of uniformly sampled ground-truth expressions per cell, each paired
with a specification of random distinct inputs.  Instance difficulty is
re-labeled after solving: the recorded size is that of the smallest known
equivalent formula, and the variable count is the highest variable index
in that formula plus one.

Randomness is derived from a single master seed through numpy's
SeedSequence (PCG64 family), keyed per instance, so suites are
byte-identical across runs and platforms.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import codec, counting
from .baseline import run_baseline
from .engine import EngineConfig, Specification, Status, synthesize
from .expr import RpnExpr, check, evaluate, format_word, parse_infix, parse_word, to_infix

DEFAULT_SIZES = range(5, 31)
DEFAULT_VARS = range(2, 11)
DEFAULT_PER_CELL = 10
DEFAULT_PAIRS = 16
GENERATOR_ID = "seedsequence-pcg64/random-v2"

SOLVERS = ("simba", "simba-rtid", "baseline")

SUITE_FORMAT = "mba-bench-suite-v1"


@dataclass(frozen=True)
class BenchInstance:
    id: str
    k: int
    w: int
    gen_size: int
    ground_truth: RpnExpr
    spec: Specification
    seed: int
    norm_size: int
    norm_vars: int
    norm_upper_bound: bool = True  # True until a solver output confirmed the label


@dataclass(frozen=True)
class RunRecord:
    instance: str
    solver: str
    status: str  # found | not_found | timed_out | oom_aborted | error
    size: int | None
    millis: float
    repeat: int


def spec_for_target(
    target: RpnExpr, k: int, rng: random.Random,
    n: int = DEFAULT_PAIRS, w: int = 32,
) -> Specification:
    """Sample n distinct random input tuples and label them by the target."""
    if k * w < 64 and n > (1 << (k * w)):
        raise ValueError(f"cannot draw {n} distinct {k}-tuples of {w}-bit words")
    pairs = []
    seen = set()
    while len(pairs) < n:
        inputs = tuple(rng.getrandbits(w) for _ in range(k))
        if inputs in seen:
            continue  # regenerate colliding tuples
        seen.add(inputs)
        pairs.append((inputs, evaluate(target, inputs, w)))
    return Specification(k=k, w=w, pairs=tuple(pairs))


def _instance_seed(master_seed: int, k: int, size: int, index: int) -> int:
    ss = np.random.SeedSequence([master_seed, k, size, index])
    return int.from_bytes(ss.generate_state(4).tobytes(), "little")


def generate_suite(
    seed: int,
    sizes=DEFAULT_SIZES,
    var_counts=DEFAULT_VARS,
    per_cell: int = DEFAULT_PER_CELL,
    n_pairs: int = DEFAULT_PAIRS,
    w: int = 32,
) -> list[BenchInstance]:
    """One suite: per_cell uniform expressions per (size, k) cell.

    Fully reproducible from the master seed.  Cells whose count table
    cannot be built (128-bit capacity) are reported and skipped.
    """
    max_size = max(sizes)
    suite: list[BenchInstance] = []
    skipped: list[tuple[int, int, str]] = []
    for k in var_counts:
        try:
            table = counting.build(k, max_size)
        except counting.CountCapacityError as exc:
            # Keep every size below the overflowing entry.
            skipped.extend((k, s, str(exc)) for s in sizes if s >= exc.s)
            table = counting.build(k, exc.s - 1)
        for s in sizes:
            if s > table.max_size:
                continue
            for idx in range(per_cell):
                iseed = _instance_seed(seed, k, s, idx)
                rng = random.Random(iseed)
                target = codec.sample_uniform(s, table, rng)
                spec = spec_for_target(target, k, rng, n=n_pairs, w=w)
                suite.append(
                    BenchInstance(
                        id=f"s{s:02d}_k{k}_i{idx:02d}",
                        k=k,
                        w=w,
                        gen_size=s,
                        ground_truth=target,
                        spec=spec,
                        seed=iseed,
                        norm_size=s,
                        norm_vars=target.max_var_index() + 1,
                    )
                )
    if skipped:
        cells = ", ".join(f"(k={k}, s={s})" for k, s, _ in skipped[:8])
        print(f"warning: skipped {len(skipped)} cells past table capacity: {cells}")
    return suite


def normalize(instance: BenchInstance, solver_exprs) -> tuple[int, int]:
    """Difficulty labels from the smallest known equivalent formula.

    Unsound solver outputs are discarded.  Among the ground truth and all
    sound outputs, the minimal formula is the one minimizing (size,
    variable count); returns (its size, its highest variable index + 1).
    """
    candidates = [instance.ground_truth]
    for e in solver_exprs:
        if check(e, instance.spec):
            candidates.append(e)
    best = min(candidates, key=lambda e: (e.size, e.max_var_index()))
    return best.size, best.max_var_index() + 1


def normalized_instance(instance: BenchInstance, solver_exprs) -> BenchInstance:
    norm_size, norm_vars = normalize(instance, solver_exprs)
    confirmed = any(check(e, instance.spec) for e in solver_exprs)
    return replace(
        instance,
        norm_size=norm_size,
        norm_vars=norm_vars,
        norm_upper_bound=not confirmed,
    )


# ---------------------------------------------------------------------------
# Suite files: one JSON object per line, preceded by a header line that
# records the master seed and generator identifier.
# ---------------------------------------------------------------------------


def write_suite(path, suite: list[BenchInstance], seed: int | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"format": SUITE_FORMAT, "generator": GENERATOR_ID}
        if seed is not None:
            header["seed"] = seed
        fh.write(json.dumps(header) + "\n")
        for inst in suite:
            rec = {
                "id": inst.id,
                "k": inst.k,
                "w": inst.w,
                "gen_size": inst.gen_size,
                "ground_truth": to_infix(inst.ground_truth),
                "pairs": [
                    {
                        "in": [format_word(v, inst.w) for v in inputs],
                        "out": format_word(output, inst.w),
                    }
                    for inputs, output in inst.spec.pairs
                ],
                "seed": inst.seed,
            }
            fh.write(json.dumps(rec) + "\n")


def read_suite(path) -> list[BenchInstance]:
    suite = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("format") == SUITE_FORMAT:
                continue
            w = rec["w"]
            target = parse_infix(rec["ground_truth"], rec["k"])
            pairs = tuple(
                (tuple(parse_word(v, w) for v in p["in"]), parse_word(p["out"], w))
                for p in rec["pairs"]
            )
            suite.append(
                BenchInstance(
                    id=rec["id"],
                    k=rec["k"],
                    w=w,
                    gen_size=rec["gen_size"],
                    ground_truth=target,
                    spec=Specification(k=rec["k"], w=w, pairs=pairs),
                    seed=rec["seed"],
                    norm_size=target.size,
                    norm_vars=target.max_var_index() + 1,
                )
            )
    return suite


# ---------------------------------------------------------------------------
# Batch runner.
# ---------------------------------------------------------------------------


def solve_instance(instance: BenchInstance, solver: str, timeout: float | None):
    """One solver run; returns (status string, expr or None, size, millis).

    Engine-backed solvers run sequentially inside the calling process so a
    suite worker pool stays flat.
    """
    t0 = time.monotonic()
    try:
        if solver in ("simba", "simba-rtid"):
            table = counting.build(instance.k, instance.gen_size)
            cfg = EngineConfig(
                size_bound=instance.gen_size,
                mode="shuffled" if solver == "simba-rtid" else "local",
                time_budget=timeout,
            )
            outcome = synthesize(instance.spec, table, cfg)
        elif solver == "baseline":
            outcome, _ = run_baseline(
                instance.spec, instance.gen_size, time_budget=timeout
            )
        else:
            raise ValueError(f"unknown solver {solver!r}")
    except Exception:
        return "error", None, None, (time.monotonic() - t0) * 1e3
    millis = (time.monotonic() - t0) * 1e3
    if outcome.status is Status.FOUND and not check(outcome.expr, instance.spec):
        return "error", None, None, millis  # refuse to record an unsound result
    return outcome.status.value, outcome.expr, outcome.size, millis


def _run_task(args):
    instance, solver, timeout, repeats = args
    records = []
    exprs = []
    for rep in range(repeats):  # repeats stay sequential: no timing contention
        status, expr, size, millis = solve_instance(instance, solver, timeout)
        records.append(RunRecord(instance.id, solver, status, size, millis, rep))
        if expr is not None:
            exprs.append(to_infix(expr))
    return records, instance.id, exprs


def run_suite(
    suite: list[BenchInstance],
    solvers=("simba",),
    timeout: float | None = 60.0,
    repeats: int = 1,
    workers: int = 1,
):
    """Run each solver on each instance; returns (records, normalized suite).

    Solver failures become status "error" records and never abort the
    sweep.  Normalization folds every sound solver output back into the
    instance labels.
    """
    tasks = [(inst, solver, timeout, repeats) for inst in suite for solver in solvers]
    solutions: dict[str, list[str]] = {inst.id: [] for inst in suite}
    records: list[RunRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    for recs, inst_id, exprs in results:
        records.extend(recs)
        solutions[inst_id].extend(exprs)
    normalized = [
        normalized_instance(inst, [parse_infix(e, inst.k) for e in solutions[inst.id]])
        for inst in suite
    ]
    return records, normalized


def write_records_csv(path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["instance", "solver", "status", "size", "millis", "repeat"])
        for r in records:
            wr.writerow(
                [r.instance, r.solver, r.status,
                 "" if r.size is None else r.size, f"{r.millis:.3f}", r.repeat]
            )


def read_records_csv(path) -> list[RunRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                RunRecord(
                    instance=row["instance"],
                    solver=row["solver"],
                    status=row["status"],
                    size=int(row["size"]) if row["size"] else None,
                    millis=float(row["millis"]),
                    repeat=int(row["repeat"]),
                )
            )
    return out


# ---------------------------------------------------------------------------
# Summaries: one CSV per figure.
# ---------------------------------------------------------------------------


def solved_curve(records, solver: str, thresholds) -> list[tuple[float, float, float]]:
    """(threshold, mean solved count, std across repeats)."""
    repeats = sorted({r.repeat for r in records}) or [0]
    rows = []
    for t in thresholds:
        counts = []
        for rep in repeats:
            counts.append(
                sum(
                    1
                    for r in records
                    if r.solver == solver and r.repeat == rep
                    and r.status == "found" and r.millis <= t * 1e3
                )
            )
        mean = statistics.fmean(counts)
        std = statistics.pstdev(counts) if len(counts) > 1 else 0.0
        rows.append((t, mean, std))
    return rows


def solved_percent_by(records, suite, key: str) -> dict[str, dict[int, float]]:
    """Solved percentage per solver, grouped by 'norm_size' or 'norm_vars'."""
    groups: dict[int, list[str]] = {}
    for inst in suite:
        groups.setdefault(getattr(inst, key), []).append(inst.id)
    solved = {}
    for r in records:
        if r.status == "found":
            solved.setdefault(r.solver, set()).add((r.instance, r.repeat))
    repeats = sorted({r.repeat for r in records}) or [0]
    out: dict[str, dict[int, float]] = {}
    for solver in sorted({r.solver for r in records}):
        by_group = {}
        for g, ids in sorted(groups.items()):
            total = len(ids) * len(repeats)
            hits = sum(
                1
                for i in ids
                for rep in repeats
                if (i, rep) in solved.get(solver, set())
            )
            by_group[g] = 100.0 * hits / total if total else 0.0
        out[solver] = by_group
    return out


def head_to_head(records, solver_a: str, solver_b: str):
    """Median speedup of A over B on instances both solved (every repeat)."""

    def per_instance_millis(solver):
        by_inst: dict[str, list[float]] = {}
        complete: dict[str, bool] = {}
        for r in records:
            if r.solver != solver:
                continue
            by_inst.setdefault(r.instance, []).append(r.millis)
            complete[r.instance] = complete.get(r.instance, True) and r.status == "found"
        return {
            i: statistics.fmean(ms)
            for i, ms in by_inst.items()
            if complete.get(i, False)
        }

    a = per_instance_millis(solver_a)
    b = per_instance_millis(solver_b)
    common = sorted(set(a) & set(b))
    if not common:
        return {"common": 0, "median_speedup": None, "a_faster_percent": None}
    speedups = [b[i] / a[i] if a[i] > 0 else float("inf") for i in common]
    faster = sum(1 for s in speedups if s > 1.0)
    return {
        "common": len(common),
        "median_speedup": statistics.median(speedups),
        "a_faster_percent": 100.0 * faster / len(common),
    }


def summarize(records, suite, thresholds=None) -> dict:
    """All figure-level summaries in one structure.

    Keys: solved_curve (per solver), solved_by_size, solved_by_vars,
    head_to_head (per ordered solver pair).
    """
    solvers = sorted({r.solver for r in records})
    if thresholds is None:
        top = max((r.millis for r in records), default=1e3) / 1e3
        thresholds = [top * i / 50 for i in range(1, 51)]
    return {
        "solved_curve": {
            solver: solved_curve(records, solver, thresholds) for solver in solvers
        },
        "solved_by_size": solved_percent_by(records, suite, "norm_size"),
        "solved_by_vars": solved_percent_by(records, suite, "norm_vars"),
        "head_to_head": {
            (a, b): head_to_head(records, a, b)
            for a in solvers
            for b in solvers
            if a != b
        },
    }


def write_summaries(out_dir, records, suite, thresholds=None) -> None:
    import os

    os.makedirs(out_dir, exist_ok=True)
    summary = summarize(records, suite, thresholds)
    with open(os.path.join(out_dir, "solved_curve.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["solver", "threshold_secs", "solved_mean", "solved_std"])
        for solver, rows in summary["solved_curve"].items():
            for t, mean, std in rows:
                wr.writerow([solver, f"{t:.4f}", f"{mean:.2f}", f"{std:.3f}"])
    for key, name in (
        ("solved_by_size", "solved_by_size.csv"),
        ("solved_by_vars", "solved_by_vars.csv"),
    ):
        with open(os.path.join(out_dir, name), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["solver", key.removeprefix("solved_by_"), "solved_percent"])
            for solver, groups in summary[key].items():
                for g, pct in groups.items():
                    wr.writerow([solver, g, f"{pct:.1f}"])
    with open(os.path.join(out_dir, "head_to_head.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["solver_a", "solver_b", "common", "median_speedup", "a_faster_percent"])
        for (a, b), h in summary["head_to_head"].items():
            wr.writerow(
                [a, b, h["common"],
                 "" if h["median_speedup"] is None else f"{h['median_speedup']:.3f}",
                 "" if h["a_faster_percent"] is None else f"{h['a_faster_percent']:.1f}"]
            )
