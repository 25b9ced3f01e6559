"""Cache-free enumerative synthesis of mixed boolean-arithmetic expressions.

The package enumerates candidate expressions by unranking integers through
a counting-table bijection, evaluates each against an input-output
specification, and discards it, so memory stays flat no matter how deep
the search goes.  A cache-based enumerator is included as the comparison
baseline, plus a benchmark generation and batch-run harness.
"""

from .codec import Rank, ShuffleParams, decode, encode, sample_uniform, shuffle
from .counting import CountCapacityError, CountTable, build
from .engine import (
    EngineConfig,
    Specification,
    Status,
    SynthesisOutcome,
    enumerate_all,
    run_stats,
    synthesize,
)
from .expr import (
    Op,
    RpnExpr,
    check,
    evaluate,
    observational_behavior,
    parse_infix,
    to_infix,
)

__all__ = [
    "CountCapacityError",
    "CountTable",
    "EngineConfig",
    "Op",
    "Rank",
    "RpnExpr",
    "ShuffleParams",
    "Specification",
    "Status",
    "SynthesisOutcome",
    "build",
    "check",
    "decode",
    "encode",
    "enumerate_all",
    "evaluate",
    "observational_behavior",
    "parse_infix",
    "run_stats",
    "sample_uniform",
    "shuffle",
    "synthesize",
    "to_infix",
]
