import pytest

from mbasynth import counting
from mbasynth.counting import CountCapacityError, CountTable, TOTAL_SLOT, build
from mbasynth.expr import Op

from oracles import count_by_top_slot


def test_size_one_lives_only_in_total():
    t = build(5, 1)
    assert t.total(1) == 5
    assert all(t.count(1, op) == 0 for op in range(8))


def test_recurrence_hand_evaluated_k2_s3():
    t = build(2, 3)
    # unary 2*4, five commutative ops 5*4, subtraction 4
    assert t.count(3, Op.NOT) == 4
    assert t.count(3, Op.NEG) == 4
    for op in (Op.AND, Op.OR, Op.XOR, Op.ADD, Op.MUL):
        assert t.count(3, op) == 4
    assert t.count(3, Op.SUB) == 4
    assert t.total(3) == 32


def test_unary_slots_equal_previous_total():
    t = build(3, 8)
    for s in range(2, 9):
        assert t.count(s, Op.NOT) == t.total(s - 1)
        assert t.count(s, Op.NEG) == t.total(s - 1)


def test_total_is_weighted_slot_sum():
    t = build(4, 8)
    for s in range(2, 9):
        assert t.total(s) == sum(t.count(s, op) for op in range(8))


def test_cumulative_totals_small_cells():
    assert build(3, 2).cumulative_total(2) == 9
    assert build(3, 5).cumulative_total(5) == 2451
    assert build(5, 10).cumulative_total(10) == 438_822_815
    assert build(8, 9).cumulative_total(9) == 383_703_544


def test_operator_offset_examples():
    t = build(2, 3)
    assert t.operator_offset(3, Op.AND) == 4
    assert t.operator_offset(3, Op.NOT) == 0
    assert build(4, 7).operator_offset(7, Op.NOT) == 0
    assert t.operator_offset(3, Op.NEG) == 16  # NOT + AND + OR + XOR blocks


def test_operator_offset_rejects_size_one():
    t = build(2, 3)
    with pytest.raises(ValueError):
        t.operator_offset(1, Op.NOT)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_counts_match_naive_enumeration(k):
    t = build(k, 7)
    for s in range(1, 8):
        naive = count_by_top_slot(k, s)
        if s == 1:
            assert t.total(1) == k
            continue
        for op in range(8):
            assert t.count(s, op) == naive[op], (k, s, op)
        assert t.total(s) == sum(naive)


def test_monotonicity():
    tables = {k: build(k, 10) for k in (2, 3, 4)}
    for k, t in tables.items():
        for s in range(2, 10):
            assert t.total(s + 1) > t.total(s)
    for s in range(1, 11):
        assert tables[3].total(s) > tables[2].total(s)
        assert tables[4].total(s) > tables[3].total(s)


def test_capacity_error_names_entry():
    # k=10 stays under 128 bits through size 30 but blows past it well
    # before size 60.
    with pytest.raises(CountCapacityError) as exc:
        build(10, 60)
    assert exc.value.s > 30
    assert 0 <= exc.value.op <= 8


def test_build_validates_arguments():
    with pytest.raises(ValueError):
        build(0, 5)
    with pytest.raises(ValueError):
        build(2, 0)


def test_size_outside_extent_rejected():
    t = build(2, 4)
    with pytest.raises(ValueError):
        t.total(5)
    with pytest.raises(ValueError):
        t.cumulative_total(0)


def test_module_level_wrappers():
    t = build(2, 3)
    assert counting.cumulative_total(t, 3) == t.cumulative_total(3)
    assert counting.operator_offset(t, 3, Op.AND) == 4


def test_render_tsv_layout():
    t = build(5, 10)
    out = counting.render_tsv(t, with_cumulative=True)
    lines = out.splitlines()
    assert lines[0].split("\t")[0] == "size"
    last = lines[-1].split("\t")
    assert last[0] == "10"
    assert last[-1] == "438822815"


def test_table_is_frozen():
    t = build(2, 3)
    assert isinstance(t, CountTable)
    with pytest.raises(AttributeError):
        t.k = 3
    assert t.rows[1][TOTAL_SLOT] == 2
