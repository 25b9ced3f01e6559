"""Cache-based bottom-up enumerator used as the comparison point.

Candidates of size s are built by combining cached representatives of
smaller sizes under all eight operators; a candidate is stored only when
its observational-behavior vector is new.  Memory is modeled as one
behavior vector per stored entry (n * w / 8 bytes), which is the figure
that dominates on real accelerator runs; representative expressions are
tracked separately and excluded from the budget test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import counting
from .engine import SizeStats, Specification, Status, SynthesisOutcome
from .expr import Op, RpnExpr, check, op_token

DEFAULT_MEMORY_BUDGET = 2_500_000_000  # bytes

_UNARY_SLOTS = (int(Op.NOT), int(Op.NEG))
_COMM_SLOTS = (int(Op.AND), int(Op.OR), int(Op.XOR), int(Op.ADD), int(Op.MUL))


def entry_bytes(n: int, w: int) -> int:
    """Modeled bytes per cache entry: one n-vector of w-bit words."""
    return n * w // 8


def modeled_bytes(entries: int, n: int, w: int) -> int:
    return entries * entry_bytes(n, w)


def format_mem(nbytes: int) -> str:
    """Humanized decimal units, matching the report layout: '<1 MB',
    '7.4 MB', '2.1 GB'."""
    if nbytes < 1_000_000:
        return "<1 MB"
    if nbytes < 1_000_000_000:
        return f"{nbytes / 1e6:.1f} MB"
    return f"{nbytes / 1e9:.1f} GB"


@dataclass(frozen=True)
class CacheSizeRow:
    size: int
    stored: int  # entries newly stored at this size
    stored_cum: int
    candidates: int  # candidates generated at this size (duplicates included)
    modeled_bytes: int  # cumulative behavior storage after this size
    millis: float


@dataclass(frozen=True)
class CacheStats:
    k: int
    n: int
    w: int
    rows: tuple[CacheSizeRow, ...]
    oom_at: int | None = None
    expr_tokens_total: int = 0  # representative storage, outside the budget

    def stored_cum(self) -> int:
        return self.rows[-1].stored_cum if self.rows else 0


def _apply_unary(slot: int, beh, mask: int):
    if slot == 0:  # NOT
        return tuple(v ^ mask for v in beh)
    return tuple(-v & mask for v in beh)  # NEG


def _apply_binary(slot: int, lhs, rhs, mask: int):
    if slot == 1:
        return tuple(a & b for a, b in zip(lhs, rhs))
    if slot == 2:
        return tuple(a | b for a, b in zip(lhs, rhs))
    if slot == 3:
        return tuple(a ^ b for a, b in zip(lhs, rhs))
    if slot == 5:
        return tuple((a + b) & mask for a, b in zip(lhs, rhs))
    if slot == 6:
        return tuple((a - b) & mask for a, b in zip(lhs, rhs))
    return tuple(a * b & mask for a, b in zip(lhs, rhs))  # MUL


def run_baseline(
    spec: Specification,
    size_bound: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    time_budget: float | None = None,
) -> tuple[SynthesisOutcome, CacheStats]:
    """Bottom-up enumeration with behavior-vector deduplication.

    Returns Found at the first size whose candidates produce the spec's
    output vector, NotFound when the bound is exhausted, or OOM-aborted
    (with ``oom_at`` set) when modeled storage exceeds the budget.  The
    optional wall-clock budget is polled between candidate batches, never
    mid-candidate.
    """
    if size_bound < 1:
        raise ValueError(f"size bound must be >= 1, got {size_bound}")
    mask = (1 << spec.w) - 1
    target = tuple(output for _, output in spec.pairs)
    per_entry = entry_bytes(spec.n, spec.w)
    deadline = None if time_budget is None else time.monotonic() + time_budget
    timed_out = False

    # entries[s] keeps (behavior, tokens) insertion-ordered per size.
    entries: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = [
        [] for _ in range(size_bound + 1)
    ]
    seen: set[tuple[int, ...]] = set()
    rows: list[CacheSizeRow] = []
    stored_cum = 0
    tokens_total = 0
    oom_at = None
    solution: tuple[tuple[int, ...], int] | None = None  # (tokens, size)

    for s in range(1, size_bound + 1):
        t0 = time.perf_counter()
        candidates = 0
        stored_new = 0

        def consider(behavior, tokens):
            nonlocal candidates, stored_new, stored_cum, tokens_total
            nonlocal solution, oom_at, timed_out
            candidates += 1
            if deadline is not None and candidates & 0xFFF == 0:
                if time.monotonic() > deadline:
                    timed_out = True
                    return True
            # A match is a result even when it would not fit in the cache.
            if behavior == target:
                solution = (tokens, s)
                return True
            if behavior in seen:
                return False
            if (stored_cum + 1) * per_entry > memory_budget:
                oom_at = s
                return True
            seen.add(behavior)
            entries[s].append((behavior, tokens))
            stored_new += 1
            stored_cum += 1
            tokens_total += len(tokens)
            return False

        done = False
        if s == 1:
            for i in range(spec.k):
                behavior = tuple(inputs[i] for inputs, _ in spec.pairs)
                if consider(behavior, (i,)):
                    done = True
                    break
        else:
            for slot in range(8):
                tok = op_token(Op(slot))
                if slot in _UNARY_SLOTS:
                    for beh, toks in entries[s - 1]:
                        if consider(_apply_unary(slot, beh, mask), toks + (tok,)):
                            done = True
                            break
                else:
                    top = (s - 1) // 2 if slot in _COMM_SLOTS else s - 2
                    for j in range(1, top + 1):
                        for lb, lt in entries[j]:
                            for rb, rt in entries[s - 1 - j]:
                                if consider(
                                    _apply_binary(slot, lb, rb, mask), lt + rt + (tok,)
                                ):
                                    done = True
                                    break
                            if done:
                                break
                        if done:
                            break
                if done:
                    break

        rows.append(
            CacheSizeRow(
                size=s,
                stored=stored_new,
                stored_cum=stored_cum,
                candidates=candidates,
                modeled_bytes=stored_cum * per_entry,
                millis=(time.perf_counter() - t0) * 1e3,
            )
        )
        if solution is not None or oom_at is not None or timed_out:
            break
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            break

    stats = CacheStats(
        k=spec.k,
        n=spec.n,
        w=spec.w,
        rows=tuple(rows),
        oom_at=oom_at,
        expr_tokens_total=tokens_total,
    )
    engine_stats = tuple(
        SizeStats(r.size, r.candidates, r.millis) for r in rows
    )
    if solution is not None:
        tokens, size = solution
        expr = RpnExpr(tokens)
        if not check(expr, spec):
            raise RuntimeError("internal error: cached solution failed re-verification")
        outcome = SynthesisOutcome(Status.FOUND, expr, size, None, engine_stats)
    elif oom_at is not None:
        outcome = SynthesisOutcome(Status.OOM_ABORTED, stats=engine_stats)
    elif timed_out:
        outcome = SynthesisOutcome(Status.TIMED_OUT, stats=engine_stats)
    else:
        outcome = SynthesisOutcome(Status.NOT_FOUND, stats=engine_stats)
    return outcome, stats


def project_oom_size(
    cum_entries_by_size: list[tuple[int, int]],
    n: int,
    w: int,
    budget: int,
    horizon: int = 64,
) -> int | None:
    """First size whose modeled cumulative storage exceeds the budget.

    ``cum_entries_by_size`` is (size, cumulative entries), ascending.  When
    no observed size exceeds the budget, per-size growth is extrapolated
    geometrically from the last two observations up to ``horizon``.
    """
    if not cum_entries_by_size:
        return None
    for s, cum in cum_entries_by_size:
        if modeled_bytes(cum, n, w) > budget:
            return s
    sizes = [s for s, _ in cum_entries_by_size]
    cums = [c for _, c in cum_entries_by_size]
    if len(cums) < 2 or sizes[-1] != sizes[-2] + 1 or cums[-1] <= cums[-2]:
        return None
    new_last = cums[-1] - cums[-2]
    prev_new = cums[-2] - (cums[-3] if len(cums) > 2 else 0)
    growth = new_last / max(prev_new, 1)
    cum = cums[-1]
    s = sizes[-1]
    while s < horizon:
        s += 1
        new_last = max(int(new_last * growth), 1)
        cum += new_last
        if modeled_bytes(cum, n, w) > budget:
            return s
    return None


def cache_report(stats: CacheStats, fmt: str = "table") -> str:
    """Render per-size cache growth with the standard columns.

    Columns: Size, #MBA (all canonical expressions up to the size), #VFB
    cache (stored entries), VFB mem (modeled), % cached, and cumulative
    time.  The time column is hardware-dependent and is reported, never
    compared.
    """
    if not stats.rows:
        return ""
    table = counting.build(stats.k, stats.rows[-1].size)
    header = [
        "Size",
        "#MBA",
        "#VFB cache",
        "VFB mem",
        "% cached",
        "VFB cum. time (s; hardware-dependent)",
    ]
    body = []
    cum_ms = 0.0
    for row in stats.rows:
        cum_ms += row.millis
        mba = table.cumulative_total(row.size)
        pct = 100.0 * row.stored_cum / mba if mba else 0.0
        cells = [
            str(row.size),
            f"{mba:,}",
            f"{row.stored_cum:,}",
            format_mem(row.modeled_bytes),
            f"{pct:.1f}%",
            f"{cum_ms / 1e3:.1f}",
        ]
        if stats.oom_at == row.size:
            cells = [str(row.size), f"{mba:,}", "OOM", "OOM", "OOM", "OOM"]
        body.append(cells)
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(c.replace(",", "") for c in cells) for cells in body]
        return "\n".join(lines)
    widths = [max(len(header[i]), *(len(cells[i]) for cells in body)) for i in range(len(header))]
    lines = ["  ".join(h.rjust(widths[i]) for i, h in enumerate(header))]
    for cells in body:
        lines.append("  ".join(c.rjust(widths[i]) for i, c in enumerate(cells)))
    return "\n".join(lines)
