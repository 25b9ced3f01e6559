"""Independent brute-force oracles used to cross-check the fast paths.

These enumerate canonical expressions by direct structural recursion and
search by direct evaluation; they never touch the counting table or the
rank codec, so agreement with them is meaningful evidence.
"""

from __future__ import annotations

from mbasynth.expr import Op, eval_tokens, op_token

_UNARY = (Op.NOT, Op.NEG)
_COMM = (Op.AND, Op.OR, Op.XOR, Op.ADD, Op.MUL)

_memo: dict[tuple[int, int], list[tuple[int, ...]]] = {}


def canonical_exprs(k: int, s: int) -> list[tuple[int, ...]]:
    """All canonical RPN token tuples of size s over k variables.

    Commutative nodes take left-subtree size <= right-subtree size; the
    equal-size split keeps both orderings.
    """
    key = (k, s)
    if key in _memo:
        return _memo[key]
    if s == 1:
        out = [(i,) for i in range(k)]
    else:
        out = []
        for op in _UNARY:
            tok = op_token(op)
            out.extend(child + (tok,) for child in canonical_exprs(k, s - 1))
        for op in _COMM:
            tok = op_token(op)
            for j in range(1, (s - 1) // 2 + 1):
                for left in canonical_exprs(k, j):
                    for right in canonical_exprs(k, s - 1 - j):
                        out.append(left + right + (tok,))
        tok = op_token(Op.SUB)
        for j in range(1, s - 1):
            for left in canonical_exprs(k, j):
                for right in canonical_exprs(k, s - 1 - j):
                    out.append(left + right + (tok,))
    _memo[key] = out
    return out


def count_by_top_slot(k: int, s: int) -> list[int]:
    """Expression counts grouped by the top operator's slot (len 8)."""
    counts = [0] * 8
    for tokens in canonical_exprs(k, s):
        if tokens[-1] < 0:
            counts[-tokens[-1] - 1] += 1
    return counts


def min_size_solution(spec, size_cap: int):
    """Smallest size with a matching expression, by direct search.

    Returns (size, tokens) or None if nothing matches up to the cap.
    """
    mask = (1 << spec.w) - 1
    pairs = spec.pairs
    for s in range(1, size_cap + 1):
        stack = [0] * (s // 2 + 2)
        for tokens in canonical_exprs(spec.k, s):
            for inputs, output in pairs:
                if eval_tokens(tokens, s, inputs, mask, stack) != output:
                    break
            else:
                return s, tokens
    return None
