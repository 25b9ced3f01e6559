"""Bijection between ranks and canonical expressions of a given size.

For each size s the integers 0..T[s][8]-1 map one-to-one onto the canonical
RPN expressions of size s.  Decoding locates the top operator by scanning
the per-slot cumulative sums in the fixed slot order, then (for binary
operators) the left-subtree size j by scanning the per-split products
T[j][8] * T[s-1-j][8]; the remainder splits into left and right child
ranks by divmod.  Consecutive ranks inside one split therefore share the
same left subtree until the right-child rank wraps, which keeps
neighbouring workers on nearly identical execution paths.

Decoding is iterative over an explicit agenda of (position, size, rank)
frames, bounded by s frames, so per-candidate cost stays flat and the hot
loop allocates nothing after warmup.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import NamedTuple

from .counting import TOTAL_SLOT, CountTable
from .expr import Op, RpnExpr, op_token

# Default multiplier for the rank permutation used by the shuffled engine
# mode; an odd constant borrowed from a common integer hash finalizer.
SHUFFLE_MULTIPLIER = 2246822507

_SUB_SLOT = int(Op.SUB)
_UNARY_SLOTS = (int(Op.NOT), int(Op.NEG))


class Rank(NamedTuple):
    value: int
    size: int


class RankError(ValueError):
    """Rank is outside 0..T[s][8]-1 for the requested size."""


class CanonicalityError(ValueError):
    """A commutative node has left-subtree size > right-subtree size."""


class Decoder:
    """Reusable decode scratch bound to one table.

    Not safe for concurrent use; each worker owns its own instance.  The
    returned buffer is reused across calls.

    The hot loop scans precomputed cumulative boundaries (per-size slot
    prefix sums and split-product prefix sums) so locating the operator
    and the left-subtree size costs only integer comparisons, with no
    arithmetic on the wide counts per step.
    """

    def __init__(self, table: CountTable):
        self.table = table
        self.rows = table.rows
        rows = table.rows
        n = table.max_size
        self._buf = [0] * n
        self._apos = [0] * n
        self._asize = [0] * n
        self._arank = [0] * n
        # slot_cums[s][op] = T[s][0] + ... + T[s][op]
        slot_cums: list = [None, None]
        # split_cums[s][j] = sum_{j'=1..j} T[j'][8] * T[s-1-j'][8], index 0 = 0
        split_cums: list = [None, None]
        for s in range(2, n + 1):
            acc = 0
            cums = []
            for op in range(8):
                acc += rows[s][op]
                cums.append(acc)
            slot_cums.append(tuple(cums))
            acc = 0
            prods = [0]
            for j in range(1, s - 1):
                acc += rows[j][8] * rows[s - 1 - j][8]
                prods.append(acc)
            split_cums.append(tuple(prods))
        self._slot_cums = slot_cums
        self._split_cums = split_cums

    def decode_into(self, rank: int, size: int) -> list[int]:
        """Fill and return the internal token buffer (first ``size`` slots)."""
        rows = self.rows
        slot_cums = self._slot_cums
        split_cums = self._split_cums
        buf = self._buf
        apos = self._apos
        asize = self._asize
        arank = self._arank
        apos[0] = 0
        asize[0] = size
        arank[0] = rank
        depth = 1
        while depth:
            depth -= 1
            pos = apos[depth]
            sz = asize[depth]
            r = arank[depth]
            while sz > 1:
                cums = slot_cums[sz]
                op = 0
                while r >= cums[op]:
                    op += 1
                if op:
                    r -= cums[op - 1]
                buf[pos + sz - 1] = -(op + 1)
                if op == 0 or op == 4:  # NOT, NEG
                    sz -= 1
                    continue
                prods = split_cums[sz]
                j = 1
                while r >= prods[j]:
                    j += 1
                r -= prods[j - 1]
                rt = rows[sz - 1 - j][8]
                q, rr = divmod(r, rt)
                apos[depth] = pos + j
                asize[depth] = sz - 1 - j
                arank[depth] = rr
                depth += 1
                sz = j
                r = q
            if sz == 1:
                buf[pos] = r
        return buf


def decode(rank: int, size: int, table: CountTable) -> RpnExpr:
    """The expression at ``rank`` among canonical expressions of ``size``."""
    total = table.total(size)
    if not 0 <= rank < total:
        raise RankError(
            f"rank {rank} out of range for size {size} (total {total})"
        )
    buf = Decoder(table).decode_into(rank, size)
    return RpnExpr(tuple(buf[:size]))


def encode(expr: RpnExpr, table: CountTable) -> Rank:
    """Rank of a canonical expression; inverse of :func:`decode`.

    Raises :class:`CanonicalityError` identifying the violating node when a
    commutative operator has a larger left subtree than right subtree.
    """
    tokens = expr.tokens
    size = len(tokens)
    if size > table.max_size:
        raise ValueError(
            f"expression size {size} exceeds table extent {table.max_size}"
        )
    for tok in tokens:
        if tok >= table.k:
            raise ValueError(f"variable x{tok} out of range for k={table.k}")

    # Subtree spans: for the node ending at position i, left child spans
    # [left_start[i], right_start[i]) and right child [right_start[i], i).
    left_start = [0] * size
    right_start = [0] * size
    stack: list[int] = []
    for i, tok in enumerate(tokens):
        if tok >= 0:
            left_start[i] = i
            stack.append(i)
        elif tok in (-1, -5):
            child = stack.pop()
            left_start[i] = left_start[child]
            stack.append(i)
        else:
            right = stack.pop()
            left = stack.pop()
            left_start[i] = left_start[left]
            right_start[i] = left_start[right]
            stack.append(i)

    rows = table.rows

    def rank_of(start: int, end: int) -> int:
        sz = end - start
        if sz == 1:
            return tokens[start]
        op = -tokens[end - 1] - 1
        offset = table.operator_offset(sz, op)
        if op in _UNARY_SLOTS:
            return offset + rank_of(start, end - 1)
        rs = right_start[end - 1]
        j = rs - start
        right_sz = end - 1 - rs
        if op != _SUB_SLOT and j > right_sz:
            raise CanonicalityError(
                f"commutative node at position {end - 1} has left size {j} "
                f"> right size {right_sz}"
            )
        block = 0
        for jj in range(1, j):
            block += rows[jj][TOTAL_SLOT] * rows[sz - 1 - jj][TOTAL_SLOT]
        n2 = rank_of(start, rs) * rows[right_sz][TOTAL_SLOT] + rank_of(rs, end - 1)
        return offset + block + n2

    return Rank(rank_of(0, size), size)


@dataclass(frozen=True)
class ShuffleParams:
    """Modular-multiplication permutation of a block's local indices.

    The multiplier must be coprime with the modulus or the map is not a
    bijection; this is verified at construction rather than assumed.
    """

    modulus: int
    multiplier: int = SHUFFLE_MULTIPLIER

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        g = math.gcd(self.multiplier, self.modulus)
        if g != 1:
            raise ValueError(
                f"multiplier {self.multiplier} and modulus {self.modulus} "
                f"share factor {g}; permutation would not be a bijection"
            )


def shuffle(i: int, params: ShuffleParams) -> int:
    """Permuted index (i * multiplier) mod modulus."""
    if not 0 <= i < params.modulus:
        raise ValueError(f"index {i} out of range for modulus {params.modulus}")
    return i * params.multiplier % params.modulus


def sample_uniform(size: int, table: CountTable, rng: random.Random) -> RpnExpr:
    """Decode a uniform rank: exactly uniform over canonical expressions."""
    total = table.total(size)
    if total < 1:
        raise ValueError(f"no expressions of size {size}")
    return decode(rng.randrange(total), size, table)
