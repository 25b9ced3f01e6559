"""Cache-free bottom-up synthesis by rank enumeration.

For sizes 1..C and each operator block in the fixed slot order, the engine
maps a decode-evaluate-discard body over the block's rank range, split
into contiguous chunks.  Nothing is stored per candidate; the only shared
mutable state is a single solution cell merged with keep-the-minimum-rank
semantics, so results are identical across worker counts and runs.

Chunks are dispatched in ascending rank order in waves of ``workers``
tasks; the solution cell is polled between waves.  In local mode a hit
ends the block immediately (later chunks hold only larger ranks); in
shuffled mode the remaining chunks of the block still run so the reported
rank stays the block minimum regardless of chunking.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from . import counting
from .codec import SHUFFLE_MULTIPLIER, Decoder, ShuffleParams
from .counting import CountTable
from .expr import DEFAULT_WIDTH, RpnExpr, check, eval_tokens, validate_width

DEFAULT_CHUNK = 1 << 16


class Status(Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    TIMED_OUT = "timed_out"
    # Emitted only by the cache-based baseline when its projected storage
    # exceeds the memory budget; the cache-free engine never aborts.
    OOM_ABORTED = "oom_aborted"


@dataclass(frozen=True)
class Specification:
    """n input-output pairs over k variables of w-bit words.

    Inputs must be pairwise distinct; a candidate is sound when it matches
    every pair.
    """

    k: int
    w: int
    pairs: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"variable count must be >= 1, got {self.k}")
        validate_width(self.w)
        if not self.pairs:
            raise ValueError("specification needs at least one pair")
        limit = 1 << self.w
        seen = set()
        for inputs, output in self.pairs:
            if len(inputs) != self.k:
                raise ValueError(
                    f"input tuple {inputs} has {len(inputs)} components, expected {self.k}"
                )
            for v in (*inputs, output):
                if not 0 <= v < limit:
                    raise ValueError(f"value {v} does not fit in {self.w} bits")
            if inputs in seen:
                raise ValueError(f"duplicate input tuple {inputs}")
            seen.add(inputs)

    @property
    def n(self) -> int:
        return len(self.pairs)

    @classmethod
    def of(cls, pairs, k: int, w: int = DEFAULT_WIDTH) -> "Specification":
        return cls(k=k, w=w, pairs=tuple((tuple(i), o) for i, o in pairs))


@dataclass(frozen=True)
class EngineConfig:
    size_bound: int
    mode: str = "local"
    chunk: int = DEFAULT_CHUNK
    workers: int = 1
    time_budget: float | None = None

    def __post_init__(self):
        if self.size_bound < 1:
            raise ValueError(f"size bound must be >= 1, got {self.size_bound}")
        if self.chunk < 1:
            raise ValueError(f"chunk must be >= 1, got {self.chunk}")
        if self.mode not in ("local", "shuffled"):
            raise ValueError(f"mode must be 'local' or 'shuffled', got {self.mode!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SizeStats:
    size: int
    candidates: int
    millis: float


@dataclass(frozen=True)
class SynthesisOutcome:
    status: Status
    expr: RpnExpr | None = None
    size: int | None = None
    rank: int | None = None
    stats: tuple[SizeStats, ...] = field(default_factory=tuple)


class _EvalContext:
    """Per-worker immutable state: the table plus the spec, pre-unpacked."""

    def __init__(self, table: CountTable, spec: Specification):
        self.table = table
        self.decoder = Decoder(table)
        self.mask = (1 << spec.w) - 1
        self.pairs = spec.pairs
        self.first_in, self.first_out = spec.pairs[0]
        self.stack = [0] * (table.max_size // 2 + 2)


def _scan_range(ctx: _EvalContext, size: int, offset: int, block_total: int,
                start: int, stop: int, shuffled: bool):
    """Decode-evaluate-discard local indices [start, stop) of one block.

    Returns (visited, best_rank, best_tokens); best_rank is the minimum
    in-size rank among candidates matching the whole spec, or None.
    """
    decode_into = ctx.decoder.decode_into
    mask = ctx.mask
    pairs = ctx.pairs
    first_in = ctx.first_in
    first_out = ctx.first_out
    stack = ctx.stack
    best_rank = None
    best_tokens = None
    mult = SHUFFLE_MULTIPLIER
    for i in range(start, stop):
        n = offset + (i * mult % block_total if shuffled else i)
        buf = decode_into(n, size)
        if eval_tokens(buf, size, first_in, mask, stack) != first_out:
            continue
        for inputs, output in pairs:
            if eval_tokens(buf, size, inputs, mask, stack) != output:
                break
        else:
            if best_rank is None or n < best_rank:
                best_rank = n
                best_tokens = tuple(buf[:size])
    return stop - start, best_rank, best_tokens


# Pool workers keep their context in a module global, installed by the
# initializer at fork time; tasks then carry only a few integers.
_WORKER_CTX: _EvalContext | None = None


def _init_worker(k: int, max_size: int, w: int, pairs) -> None:
    global _WORKER_CTX
    table = counting.build(k, max_size)
    _WORKER_CTX = _EvalContext(table, Specification(k=k, w=w, pairs=pairs))


def _scan_task(task):
    size, offset, block_total, start, stop, shuffled = task
    return _scan_range(_WORKER_CTX, size, offset, block_total, start, stop, shuffled)


def _blocks_for_size(table: CountTable, s: int):
    """(offset, count) per operator block, in slot order; size 1 is the
    single variable block."""
    if s == 1:
        return [(0, table.k)]
    out = []
    offset = 0
    for op in range(8):
        count = table.count(s, op)
        if count:
            out.append((offset, count))
        offset += count
    return out


def synthesize(spec: Specification, table: CountTable, cfg: EngineConfig) -> SynthesisOutcome:
    """Search sizes 1..C in order and return the first solution found.

    Sizes are exhausted in increasing order and operator blocks in slot
    order, so a Found result is size-minimal; within the winning block the
    reported candidate is the one of minimum rank.
    """
    if spec.k != table.k:
        raise ValueError(f"spec has k={spec.k} but table was built for k={table.k}")
    if cfg.size_bound > table.max_size:
        raise ValueError(
            f"size bound {cfg.size_bound} exceeds table extent {table.max_size}"
        )
    shuffled = cfg.mode == "shuffled"
    deadline = None
    if cfg.time_budget is not None:
        deadline = time.monotonic() + cfg.time_budget

    executor = None
    if cfg.workers > 1:
        executor = ProcessPoolExecutor(
            max_workers=cfg.workers,
            initializer=_init_worker,
            initargs=(spec.k, table.max_size, spec.w, spec.pairs),
        )
    ctx = _EvalContext(table, spec)
    stats: list[SizeStats] = []

    def finish(status, expr=None, size=None, rank=None):
        return SynthesisOutcome(status, expr, size, rank, tuple(stats))

    try:
        for s in range(1, cfg.size_bound + 1):
            t0 = time.perf_counter()
            visited = 0
            hit_rank = None
            hit_tokens = None
            for offset, total in _blocks_for_size(table, s):
                if shuffled:
                    ShuffleParams(modulus=total)  # fail fast on a bad modulus
                tasks = [
                    (s, offset, total, a, min(a + cfg.chunk, total), shuffled)
                    for a in range(0, total, cfg.chunk)
                ]
                block_rank = None
                block_tokens = None
                i = 0
                while i < len(tasks):
                    wave = tasks[i : i + cfg.workers]
                    i += len(wave)
                    if executor is None:
                        results = [_scan_range(ctx, *t) for t in wave]
                    else:
                        results = list(executor.map(_scan_task, wave))
                    for count, rank, tokens in results:
                        visited += count
                        if rank is not None and (block_rank is None or rank < block_rank):
                            block_rank = rank
                            block_tokens = tokens
                    if block_rank is not None and not shuffled:
                        break  # remaining chunks hold larger ranks only
                    # A recorded hit always finishes its block (bounded
                    # work): a timeout must never mask a found solution.
                    if block_rank is None and deadline is not None \
                            and time.monotonic() > deadline:
                        stats.append(
                            SizeStats(s, visited, (time.perf_counter() - t0) * 1e3)
                        )
                        return finish(Status.TIMED_OUT)
                if block_rank is not None:
                    hit_rank = block_rank
                    hit_tokens = block_tokens
                    break  # solution cell hit: no further blocks or sizes
            stats.append(SizeStats(s, visited, (time.perf_counter() - t0) * 1e3))
            if hit_rank is not None:
                expr = RpnExpr(hit_tokens)
                if not check(expr, spec):  # re-verify outside the parallel path
                    raise RuntimeError(
                        f"internal error: candidate rank {hit_rank} failed re-verification"
                    )
                return finish(Status.FOUND, expr, s, hit_rank)
            if deadline is not None and time.monotonic() > deadline:
                return finish(Status.TIMED_OUT)
        return finish(Status.NOT_FOUND)
    finally:
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)


def enumerate_all(size: int, table: CountTable, visitor=None) -> int:
    """Visit the decode of every rank at ``size`` once; returns the count.

    Test hook exposing the sweep without a specification.
    """
    decoder = Decoder(table)
    total = table.total(size)
    if visitor is None:
        for n in range(total):
            decoder.decode_into(n, size)
    else:
        for n in range(total):
            buf = decoder.decode_into(n, size)
            visitor(RpnExpr(tuple(buf[:size])))
    return total


def run_stats(outcome: SynthesisOutcome) -> dict:
    """Summary report: per-size counts, throughput, and total wall-clock.

    Everything except the timing fields is identical across reruns.
    """
    total_candidates = sum(s.candidates for s in outcome.stats)
    total_millis = sum(s.millis for s in outcome.stats)
    per_second = total_candidates / (total_millis / 1e3) if total_millis > 0 else 0.0
    return {
        "status": outcome.status.value,
        "expr": str(outcome.expr) if outcome.expr is not None else None,
        "size": outcome.size,
        "rank": str(outcome.rank) if outcome.rank is not None else None,
        "per_size": [
            {"size": s.size, "candidates": s.candidates, "millis": round(s.millis, 3)}
            for s in outcome.stats
        ],
        "total_candidates": total_candidates,
        "total_millis": round(total_millis, 3),
        "candidates_per_second": round(per_second, 1),
    }
