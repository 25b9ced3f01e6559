import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from mbasynth import counting
from mbasynth.codec import (
    SHUFFLE_MULTIPLIER,
    CanonicalityError,
    Rank,
    RankError,
    ShuffleParams,
    decode,
    encode,
    sample_uniform,
    shuffle,
)
from mbasynth.expr import Op, RpnExpr, op_token, parse_infix

from oracles import canonical_exprs


def test_decode_base_case_is_variable(table_k3):
    assert decode(2, 1, table_k3).tokens == (2,)
    assert decode(0, 1, table_k3).tokens == (0,)


def test_decode_hand_examples_k2(table_k2):
    assert decode(0, 2, table_k2).tokens == (0, op_token(Op.NOT))
    assert decode(2, 2, table_k2).tokens == (0, op_token(Op.NEG))
    assert decode(5, 3, table_k2).tokens == (0, 1, op_token(Op.AND))


def test_decode_rejects_out_of_range(table_k2):
    with pytest.raises(RankError):
        decode(table_k2.total(3), 3, table_k2)
    with pytest.raises(RankError):
        decode(-1, 2, table_k2)


def test_decode_output_length_is_exactly_size(table_k3):
    rng = random.Random(3)
    for s in range(1, 9):
        total = table_k3.total(s)
        for _ in range(50):
            e = decode(rng.randrange(total), s, table_k3)
            assert e.size == s


def test_encode_examples(table_k2):
    assert encode(parse_infix("(x0 & x1)", 2), table_k2) == Rank(5, 3)
    assert encode(parse_infix("(x1 & x0)", 2), table_k2) == Rank(6, 3)


def test_encode_rejects_non_canonical(table_k3):
    # left subtree (size 3) larger than right (size 1) under a commutative op
    bad = parse_infix("((x0 & x1) ^ x2)", 3)
    with pytest.raises(CanonicalityError) as exc:
        encode(bad, table_k3)
    assert "position" in str(exc.value)
    # subtraction is non-commutative: any split encodes
    ok = parse_infix("((x0 & x1) - x2)", 3)
    assert decode(encode(ok, table_k3).value, 5, table_k3) == ok


def test_encode_rejects_out_of_range_variable(table_k2):
    with pytest.raises(ValueError):
        encode(RpnExpr((0, 1, op_token(Op.AND))), counting.build(1, 3))


@pytest.mark.parametrize("k", [1, 2])
def test_round_trip_exhaustive(k):
    table = counting.build(k, 6)
    for s in range(1, 7):
        for n in range(table.total(s)):
            assert encode(decode(n, s, table), table) == Rank(n, s)


@pytest.mark.parametrize("k,smax", [(1, 6), (2, 6), (3, 5)])
def test_decode_bijective_onto_naive_set(k, smax):
    table = counting.build(k, smax)
    for s in range(1, smax + 1):
        total = table.total(s)
        decoded = {decode(n, s, table).tokens for n in range(total)}
        assert len(decoded) == total
        assert decoded == set(canonical_exprs(k, s))


def test_locality_consecutive_ranks_share_left_subtree(table_k3):
    """Inside a binary block at one split, bumping the rank only changes
    the right subtree while the left-child index stays put."""
    s = 6
    rows = table_k3.rows
    checked = 0
    for op in (Op.AND, Op.OR, Op.XOR, Op.ADD, Op.SUB, Op.MUL):
        offset = table_k3.operator_offset(s, op)
        top = (s - 1) // 2 if op != Op.SUB else s - 2
        for j in range(1, top + 1):
            right_total = rows[s - 1 - j][8]
            block = rows[j][8] * right_total
            for local in range(block - 1):
                if local // right_total != (local + 1) // right_total:
                    continue  # right child wrapped; left index advances
                a = decode(offset + local, s, table_k3).tokens
                b = decode(offset + local + 1, s, table_k3).tokens
                assert a[:j] == b[:j]
                checked += 1
            offset += block
    assert checked > 1000


# --- shuffle ----------------------------------------------------------------


def test_shuffle_zero_fixed_point():
    assert shuffle(0, ShuffleParams(modulus=16)) == 0


def test_shuffle_is_permutation_modulus_16():
    params = ShuffleParams(modulus=16)
    assert math.gcd(SHUFFLE_MULTIPLIER, 16) == 1
    outputs = sorted(shuffle(i, params) for i in range(16))
    assert outputs == list(range(16))


def test_shuffle_rejects_shared_factor():
    factor = 15809  # prime factor of the multiplier
    assert SHUFFLE_MULTIPLIER % factor == 0
    with pytest.raises(ValueError):
        ShuffleParams(modulus=factor * 2)
    # coprime moduli construct fine
    ShuffleParams(modulus=factor + 1)


def test_shuffle_rejects_out_of_range_index():
    with pytest.raises(ValueError):
        shuffle(16, ShuffleParams(modulus=16))


def test_shuffled_decode_covers_same_expression_set(table_k2):
    for s in range(1, 6):
        total = table_k2.total(s)
        params = ShuffleParams(modulus=total)
        plain = {decode(n, s, table_k2).tokens for n in range(total)}
        permuted = {
            decode(shuffle(i, params), s, table_k2).tokens for i in range(total)
        }
        assert plain == permuted


# --- uniform sampling -------------------------------------------------------


def test_sample_uniform_base_case_frequencies(table_k3):
    rng = random.Random(99)
    counts = Counter(sample_uniform(1, table_k3, rng).tokens[0] for _ in range(30_000))
    for i in range(3):
        assert abs(counts[i] - 10_000) < 500


def test_sample_uniform_size3_k2_hits_all_32(table_k2):
    rng = random.Random(5)
    counts = Counter(sample_uniform(3, table_k2, rng).tokens for _ in range(16_000))
    assert len(counts) == 32
    for c in counts.values():
        assert abs(c - 500) < 150


def test_sample_uniform_size_is_exact(table_k5):
    rng = random.Random(1)
    for s in (1, 4, 9):
        for _ in range(20):
            assert sample_uniform(s, table_k5, rng).size == s


@settings(max_examples=60)
@given(st.integers(min_value=0, max_value=10**9))
def test_round_trip_sampled_large(n):
    table = counting.build(5, 10)
    rank = n % table.total(10)
    assert encode(decode(rank, 10, table), table) == Rank(rank, 10)
