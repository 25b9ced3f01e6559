"""Expression representation and bit-exact semantics over w-bit words.

An expression is a token sequence in reverse Polish notation (RPN).  The
token alphabet is the k variables plus two unary operators (bitwise NOT,
arithmetic negation) and six binary operators (AND, OR, XOR, ADD, SUB,
MUL).  All arithmetic wraps modulo 2**w; bitwise operators act per bit.

Tokens are packed into plain ints for speed: a variable reference is its
(non-negative) index, an operator is ``-(slot + 1)`` where ``slot`` is the
operator's position in the fixed :class:`Op` order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

DEFAULT_WIDTH = 32
MAX_WIDTH = 64


class Op(IntEnum):
    """Operator slots in the fixed enumeration order."""

    NOT = 0
    AND = 1
    OR = 2
    XOR = 3
    NEG = 4
    ADD = 5
    SUB = 6
    MUL = 7


UNARY_OPS = (Op.NOT, Op.NEG)
BINARY_OPS = (Op.AND, Op.OR, Op.XOR, Op.ADD, Op.SUB, Op.MUL)
# SUB is the only non-commutative binary operator.
COMMUTATIVE_OPS = frozenset((Op.AND, Op.OR, Op.XOR, Op.ADD, Op.MUL))

INFIX_SYMBOL = {
    Op.NOT: "~",
    Op.AND: "&",
    Op.OR: "|",
    Op.XOR: "^",
    Op.NEG: "-",
    Op.ADD: "+",
    Op.SUB: "-",
    Op.MUL: "*",
}

# RPN text spellings.  Unary minus gets its own spelling because a bare "-"
# would make postfix text ambiguous (e.g. "x0 x1 - -").
RPN_SYMBOL = {
    Op.NOT: "~",
    Op.AND: "&",
    Op.OR: "|",
    Op.XOR: "^",
    Op.NEG: "neg",
    Op.ADD: "+",
    Op.SUB: "-",
    Op.MUL: "*",
}
_RPN_LOOKUP = {sym: op for op, sym in RPN_SYMBOL.items()}


def op_token(op: Op) -> int:
    return -(int(op) + 1)


def var_token(index: int) -> int:
    return index


def is_op_token(tok: int) -> bool:
    return tok < 0


def token_op(tok: int) -> Op:
    return Op(-tok - 1)


def token_arity(tok: int) -> int:
    if tok >= 0:
        return 0
    return 1 if tok in (-1, -5) else 2


_TOK_NOT = op_token(Op.NOT)
_TOK_NEG = op_token(Op.NEG)


class MalformedRpnError(ValueError):
    """Token sequence is not a valid reverse Polish program."""


class InputArityError(ValueError):
    """A variable index is out of range for the supplied input tuple."""


class ParseError(ValueError):
    """Infix or RPN text could not be parsed."""

    def __init__(self, message: str, position: int):
        super().__init__(f"at position {position}: {message}")
        self.position = position


def validate_width(w: int) -> int:
    if not 1 <= w <= MAX_WIDTH:
        raise ValueError(f"bit width must be in 1..{MAX_WIDTH}, got {w}")
    return w


@dataclass(frozen=True)
class RpnExpr:
    """A validated RPN token sequence; ``size`` is the token count."""

    tokens: tuple[int, ...]

    def __post_init__(self):
        depth = 0
        for pos, tok in enumerate(self.tokens):
            need = token_arity(tok)
            if depth < need:
                raise MalformedRpnError(
                    f"stack underflow at token {pos} (depth {depth}, arity {need})"
                )
            depth += 1 - need
        if depth != 1:
            raise MalformedRpnError(
                f"program leaves {depth} values on the stack, expected 1"
            )

    @property
    def size(self) -> int:
        return len(self.tokens)

    def max_var_index(self) -> int:
        """Highest variable index referenced; -1 if none (cannot happen)."""
        return max(tok for tok in self.tokens if tok >= 0)

    def __str__(self) -> str:
        return to_infix(self)


def evaluate(expr: RpnExpr, inputs: tuple[int, ...], width: int = DEFAULT_WIDTH) -> int:
    """Run the stack interpreter on one input tuple.

    Arithmetic wraps modulo 2**width; NEG is two's-complement negation and
    NOT is bitwise complement.  Pure and deterministic.
    """
    validate_width(width)
    mask = (1 << width) - 1
    return eval_tokens(expr.tokens, len(expr.tokens), inputs, mask)


def eval_tokens(tokens, size: int, inputs, mask: int, stack: list | None = None) -> int:
    """Interpreter core over a raw token buffer (first ``size`` entries).

    The caller may pass a preallocated ``stack`` (capacity >= size//2 + 1)
    to keep the hot loop allocation-free.
    """
    if stack is None:
        stack = [0] * (size // 2 + 2)
    sp = 0
    nin = len(inputs)
    for i in range(size):
        t = tokens[i]
        if t >= 0:
            if t >= nin:
                raise InputArityError(
                    f"variable x{t} but input has {nin} component(s)"
                )
            stack[sp] = inputs[t]
            sp += 1
        elif t == -2:  # AND
            sp -= 1
            stack[sp - 1] &= stack[sp]
        elif t == -4:  # XOR
            sp -= 1
            stack[sp - 1] ^= stack[sp]
        elif t == -6:  # ADD
            sp -= 1
            stack[sp - 1] = (stack[sp - 1] + stack[sp]) & mask
        elif t == -3:  # OR
            sp -= 1
            stack[sp - 1] |= stack[sp]
        elif t == -1:  # NOT
            stack[sp - 1] ^= mask
        elif t == -5:  # NEG
            stack[sp - 1] = -stack[sp - 1] & mask
        elif t == -7:  # SUB
            sp -= 1
            stack[sp - 1] = (stack[sp - 1] - stack[sp]) & mask
        else:  # MUL
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp] & mask
    return stack[0]


def check(expr: RpnExpr, spec) -> bool:
    """True iff the expression matches every input-output pair of the spec.

    Short-circuits on the first mismatch; the pair order is observable only
    through timing, never through the result.
    """
    if spec.k <= expr.max_var_index():
        raise InputArityError(
            f"expression uses x{expr.max_var_index()} but spec has k={spec.k}"
        )
    mask = (1 << spec.w) - 1
    tokens = expr.tokens
    size = len(tokens)
    stack = [0] * (size // 2 + 2)
    for inputs, output in spec.pairs:
        if eval_tokens(tokens, size, inputs, mask, stack) != output:
            return False
    return True


def observational_behavior(expr: RpnExpr, spec) -> tuple[int, ...]:
    """The output vector (e(x_1), ..., e(x_n)) in specification order."""
    mask = (1 << spec.w) - 1
    tokens = expr.tokens
    size = len(tokens)
    stack = [0] * (size // 2 + 2)
    return tuple(
        eval_tokens(tokens, size, inputs, mask, stack) for inputs, _ in spec.pairs
    )


# ---------------------------------------------------------------------------
# Text serialization.
#
# Infix output is fully parenthesized: variables `x0..x{k-1}`, unary `~(E)`
# and `-(E)`, binary `(L op R)`.  The parser additionally accepts redundant
# parentheses and standard precedence: unary > `*` > `+`/`-` > `&`/`^`/`|`
# (the bitwise level is left-associative).
# ---------------------------------------------------------------------------


def to_infix(expr: RpnExpr) -> str:
    stack: list[str] = []
    for tok in expr.tokens:
        if tok >= 0:
            stack.append(f"x{tok}")
        else:
            op = token_op(tok)
            if op in UNARY_OPS:
                child = stack.pop()
                # Drop the child's own outer parens: ~((a & b)) -> ~(a & b).
                if child.startswith("(") and child.endswith(")"):
                    child = child[1:-1]
                stack.append(f"{INFIX_SYMBOL[op]}({child})")
            else:
                right = stack.pop()
                left = stack.pop()
                stack.append(f"({left} {INFIX_SYMBOL[op]} {right})")
    return stack[0]


def to_rpn_text(expr: RpnExpr) -> str:
    """Whitespace-separated postfix tokens, e.g. ``x0 x1 & ~``."""
    parts = []
    for tok in expr.tokens:
        parts.append(f"x{tok}" if tok >= 0 else RPN_SYMBOL[token_op(tok)])
    return " ".join(parts)


def parse_rpn_text(text: str, k: int) -> RpnExpr:
    tokens: list[int] = []
    pos = 0
    for word in text.split():
        pos = text.index(word, pos)
        if word.startswith("x") and word[1:].isdigit():
            idx = int(word[1:])
            if idx >= k:
                raise ParseError(f"variable x{idx} out of range for k={k}", pos)
            tokens.append(idx)
        elif word in _RPN_LOOKUP:
            tokens.append(op_token(_RPN_LOOKUP[word]))
        else:
            raise ParseError(f"unknown token {word!r}", pos)
        pos += len(word)
    if not tokens:
        raise ParseError("empty expression", 0)
    try:
        return RpnExpr(tuple(tokens))
    except MalformedRpnError as exc:
        raise ParseError(str(exc), len(text)) from exc


class _InfixParser:
    """Recursive-descent parser for the infix grammar."""

    _BITWISE = {"&": Op.AND, "|": Op.OR, "^": Op.XOR}
    _ADDITIVE = {"+": Op.ADD, "-": Op.SUB}

    def __init__(self, text: str, k: int):
        self.text = text
        self.k = k
        self.pos = 0

    def parse(self) -> RpnExpr:
        tokens = self._bitwise()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ParseError("expected end of input or binary operator", self.pos)
        return RpnExpr(tuple(tokens))

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _bitwise(self) -> list[int]:
        tokens = self._additive()
        while self._peek() in self._BITWISE:
            op = self._BITWISE[self.text[self.pos]]
            self.pos += 1
            tokens += self._additive()
            tokens.append(op_token(op))
        return tokens

    def _additive(self) -> list[int]:
        tokens = self._multiplicative()
        while True:
            ch = self._peek()
            if ch not in self._ADDITIVE:
                return tokens
            op = self._ADDITIVE[ch]
            self.pos += 1
            tokens += self._multiplicative()
            tokens.append(op_token(op))

    def _multiplicative(self) -> list[int]:
        tokens = self._unary()
        while self._peek() == "*":
            self.pos += 1
            tokens += self._unary()
            tokens.append(op_token(Op.MUL))
        return tokens

    def _unary(self) -> list[int]:
        ch = self._peek()
        if ch == "~":
            self.pos += 1
            return self._unary() + [_TOK_NOT]
        if ch == "-":
            self.pos += 1
            return self._unary() + [_TOK_NEG]
        return self._atom()

    def _atom(self) -> list[int]:
        ch = self._peek()
        if ch == "(":
            self.pos += 1
            tokens = self._bitwise()
            if self._peek() != ")":
                raise ParseError("expected ')'", self.pos)
            self.pos += 1
            return tokens
        if ch == "x":
            start = self.pos
            self.pos += 1
            digits = ""
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                digits += self.text[self.pos]
                self.pos += 1
            if not digits:
                raise ParseError("expected variable index after 'x'", start)
            idx = int(digits)
            if idx >= self.k:
                raise ParseError(f"variable x{idx} out of range for k={self.k}", start)
            return [idx]
        raise ParseError("expected variable, unary operator, or '('", self.pos)


def parse_infix(text: str, k: int) -> RpnExpr:
    """Parse infix text into an expression over k variables."""
    return _InfixParser(text, k).parse()


# ---------------------------------------------------------------------------
# Hex word formatting for the on-disk file formats.
# ---------------------------------------------------------------------------


def format_word(value: int, w: int) -> str:
    """0x-prefixed, zero-padded to the width's hex-digit count."""
    return f"0x{value:0{(w + 3) // 4}x}"


def parse_word(text: str, w: int) -> int:
    if not text.startswith("0x"):
        raise ValueError(f"hex word must be 0x-prefixed, got {text!r}")
    value = int(text, 16)
    if value >= 1 << w:
        raise ValueError(f"{text} does not fit in {w} bits")
    return value
