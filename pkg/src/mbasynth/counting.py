"""The table of canonical expression counts per size and top operator.

``T[s][op]`` counts canonical RPN expressions of size ``s`` whose top-level
operator sits in slot ``op`` (the fixed :class:`~mbasynth.expr.Op` order);
slot 8 holds the total across all operators.  "Canonical" means every
commutative node has left-subtree size <= right-subtree size; at the
equal-size split all ordered pairs of children are counted.

The recurrence:

    T[1][8]    = k                                   (one per variable)
    T[s][un]   = T[s-1][8]                            for NOT and NEG
    T[s][comm] = sum_{j=1..(s-1)//2} T[j][8] * T[s-1-j][8]
    T[s][SUB]  = sum_{j=1..s-2}      T[j][8] * T[s-1-j][8]
    T[s][8]    = 2*T[s][un] + 5*T[s][comm] + T[s][SUB]

Entries are capped at 128 bits so that rank arithmetic stays within a
fixed register width on any backend; the build fails loudly on overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Op

TOTAL_SLOT = 8
MAX_COUNT = (1 << 128) - 1

_UNARY_SLOTS = (int(Op.NOT), int(Op.NEG))
_COMM_SLOTS = (int(Op.AND), int(Op.OR), int(Op.XOR), int(Op.ADD), int(Op.MUL))
_SUB_SLOT = int(Op.SUB)


class CountCapacityError(OverflowError):
    """A table entry exceeded the 128-bit capacity."""

    def __init__(self, s: int, op: int, value: int):
        super().__init__(
            f"count T[{s}][{op}] = {value} exceeds 128-bit capacity"
        )
        self.s = s
        self.op = op


@dataclass(frozen=True)
class CountTable:
    """Immutable count table for k variables up to ``max_size``.

    Built once, then shared read-only by any number of workers.
    """

    k: int
    max_size: int
    rows: tuple[tuple[int, ...], ...]  # rows[s][op], s in 0..max_size (row 0 unused)
    cumulative: tuple[int, ...]  # cumulative[s] = sum of totals for sizes 1..s

    def count(self, s: int, op: int) -> int:
        """T[s][op]; ``op`` may be 0..7 or TOTAL_SLOT (8)."""
        self._check_size(s)
        return self.rows[s][op]

    def total(self, s: int) -> int:
        self._check_size(s)
        return self.rows[s][TOTAL_SLOT]

    def cumulative_total(self, s: int) -> int:
        """Sum of totals over sizes 1..s."""
        self._check_size(s)
        return self.cumulative[s]

    def operator_offset(self, s: int, op: int) -> int:
        """Rank offset of slot ``op`` at size s: counts in all earlier slots."""
        self._check_size(s)
        if s < 2:
            raise ValueError("operator blocks exist only for sizes >= 2")
        row = self.rows[s]
        acc = 0
        for slot in range(op):
            acc += row[slot]
        return acc

    def _check_size(self, s: int):
        if not 1 <= s <= self.max_size:
            raise ValueError(f"size {s} outside table extent 1..{self.max_size}")


def build(k: int, max_size: int) -> CountTable:
    """Build the count table for k variables up to ``max_size``.

    Raises :class:`CountCapacityError` naming the first (s, op) entry that
    exceeds 128 bits; no silent wraparound.
    """
    if k < 1:
        raise ValueError(f"variable count must be >= 1, got {k}")
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    rows = [[0] * 9 for _ in range(max_size + 1)]
    rows[1][TOTAL_SLOT] = k
    for s in range(2, max_size + 1):
        row = rows[s]
        unary = rows[s - 1][TOTAL_SLOT]
        comm = 0
        for j in range(1, (s - 1) // 2 + 1):
            comm += rows[j][TOTAL_SLOT] * rows[s - 1 - j][TOTAL_SLOT]
        sub = 0
        for j in range(1, s - 1):
            sub += rows[j][TOTAL_SLOT] * rows[s - 1 - j][TOTAL_SLOT]
        for slot in _UNARY_SLOTS:
            row[slot] = unary
        for slot in _COMM_SLOTS:
            row[slot] = comm
        row[_SUB_SLOT] = sub
        row[TOTAL_SLOT] = 2 * unary + 5 * comm + sub
        for op in range(9):
            if row[op] > MAX_COUNT:
                raise CountCapacityError(s, op, row[op])
    cumulative = [0] * (max_size + 1)
    acc = 0
    for s in range(1, max_size + 1):
        acc += rows[s][TOTAL_SLOT]
        cumulative[s] = acc
    return CountTable(
        k=k,
        max_size=max_size,
        rows=tuple(tuple(r) for r in rows),
        cumulative=tuple(cumulative),
    )


def cumulative_total(table: CountTable, s: int) -> int:
    return table.cumulative_total(s)


def operator_offset(table: CountTable, s: int, op: int) -> int:
    return table.operator_offset(s, op)


def render_tsv(table: CountTable, with_cumulative: bool = False) -> str:
    """TSV rows: size, the 8 per-slot counts, total, optional cumulative."""
    header = ["size"] + [op.name.lower() for op in Op] + ["total"]
    if with_cumulative:
        header.append("cumulative")
    lines = ["\t".join(header)]
    for s in range(1, table.max_size + 1):
        cells = [str(s)] + [str(table.rows[s][op]) for op in range(9)]
        if with_cumulative:
            cells.append(str(table.cumulative[s]))
        lines.append("\t".join(cells))
    return "\n".join(lines)
