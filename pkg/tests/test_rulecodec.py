import pytest

from tmspace.rulecodec import (
    LEFT,
    RIGHT,
    MachineDescriptor,
    SpaceParams,
    TransitionEntry,
    decode,
    encode,
    enumerate_rules,
    space_size,
    table_digits,
    twin,
)

P22 = SpaceParams(2, 2)
P32 = SpaceParams(3, 2)


def test_space_sizes():
    assert space_size(P22) == 4096
    assert space_size(P32) == 2_985_984
    assert space_size(SpaceParams(4, 2)) == 4_294_967_296


def test_enumerate_rules_covers_space():
    rules = enumerate_rules(P22)
    assert rules[0] == 0
    assert rules[-1] == 4095
    assert len(rules) == 4096


def test_decode_produces_full_table():
    machine = decode(2506, P22)
    assert set(machine.table) == {(1, 0), (1, 1), (2, 0), (2, 1)}
    # the blank-cell entry of the start state
    entry = machine.table[(1, 0)]
    assert entry == TransitionEntry(write=1, move=RIGHT, next_state=2)


def test_digit_layout_is_msd_first_states_ascending_colors_descending():
    # base 8, digits (1,1),(1,0),(2,1),(2,0) msd first
    digits = table_digits(2506, P22)
    assert digits == [4, 7, 1, 2]
    assert 2506 == ((4 * 8 + 7) * 8 + 1) * 8 + 2
    machine = decode(2506, P22)
    # digit = ((next-1)*k + write)*2 + (move == R)
    d = digits[1]  # pair (1, 0)
    entry = machine.table[(1, 0)]
    packed = ((entry.next_state - 1) * 2 + entry.write) * 2 + (
        1 if entry.move == RIGHT else 0
    )
    assert packed == d


def test_encode_inverts_decode_over_sample():
    for rule in range(0, 4096, 37):
        assert encode(decode(rule, P22)) == rule
    for rule in (0, 599063, 666364, 2_985_983):
        assert encode(decode(rule, P32)) == rule


def test_decode_rejects_out_of_range():
    with pytest.raises(ValueError):
        decode(4096, P22)
    with pytest.raises(ValueError):
        decode(-1, P22)


def test_encode_rejects_damaged_tables():
    machine = decode(100, P22)
    missing = dict(machine.table)
    del missing[(2, 1)]
    with pytest.raises(ValueError):
        encode(MachineDescriptor(params=P22, rule_number=-1, table=missing))
    bad_move = dict(machine.table)
    bad_move[(1, 0)] = TransitionEntry(write=0, move="U", next_state=1)
    with pytest.raises(ValueError):
        encode(MachineDescriptor(params=P22, rule_number=-1, table=bad_move))


def test_twin_swaps_non_initial_states():
    assert twin(599063, P32, {2: 3, 3: 2}) == 666364
    assert twin(666364, P32, {2: 3, 3: 2}) == 599063


def test_twin_is_identity_for_identity_permutation():
    for rule in (0, 17, 4095):
        assert twin(rule, P22, {}) == rule


def test_twin_must_fix_start_state():
    with pytest.raises(ValueError):
        twin(0, P22, {1: 2, 2: 1})


def test_twin_tables_agree_up_to_relabeling():
    perm = {2: 3, 3: 2}
    original = decode(599063, P32)
    relabeled = decode(twin(599063, P32, perm), P32)
    full = {1: 1, 2: 3, 3: 2}
    for (state, color), entry in original.table.items():
        mirrored = relabeled.table[(full[state], color)]
        assert mirrored.write == entry.write
        assert mirrored.move == entry.move
        assert mirrored.next_state == full[entry.next_state]
