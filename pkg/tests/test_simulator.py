import pytest

from tmspace.rulecodec import SpaceParams, decode
from tmspace.simulator import (
    decode_output,
    detect_divergence_fast,
    encode_input,
    run,
    trace,
    trace_grid,
)

P22 = SpaceParams(2, 2)


def run22(rule: int, x: int, bound: int = 1000):
    return run(decode(rule, P22), x, bound)


def test_unary_input_encoding():
    assert encode_input(0) == (1,)
    assert encode_input(3) == (1, 1, 1, 1)
    with pytest.raises(ValueError):
        encode_input(-1)


def test_binary_output_decoding_is_rightmost_lsb():
    assert decode_output((1, 0, 1)) == 5
    assert decode_output((0, 0, 0)) == 0
    assert decode_output(encode_input(4)) == 31


def test_immediate_dropper_has_runtime_one_and_space_one():
    # rule 1536 maps (1,1) -> write 1, move Right: halts in one step
    machine = decode(1536, P22)
    assert machine.table[(1, 1)].move == "R"
    for x in (0, 3, 20):
        record = run(machine, x)
        assert record.halted
        assert record.runtime == 1
        assert record.space == 1
        assert record.output_value == (1 << (x + 1)) - 1
        assert record.output_tape == encode_input(x)


def test_known_runtime_sequences():
    assert [run22(2240, x).runtime for x in range(6)] == [5, 5, 9, 9, 13, 13]
    assert [run22(2205, x).runtime for x in range(6)] == [3, 7, 17, 27, 37, 47]
    assert [run22(378, x).runtime for x in range(6)] == [5, 13, 29, 61, 125, 253]


def test_halting_runtimes_are_odd():
    # off-edge halting forces an odd step count; spot-check a stride
    for rule in range(0, 4096, 111):
        for x in (0, 1, 5):
            record = run22(rule, x)
            if record.halted:
                assert record.runtime % 2 == 1


def test_divergent_record_shape():
    record = run22(0, 0)  # (1,*) -> move Left forever
    assert not record.halted
    assert record.runtime == -1
    assert record.space == -1
    assert record.output_tape is None
    assert record.output_value == -1


def test_trace_starts_at_input_and_ends_at_output():
    record = run22(378, 3)
    frames = trace(decode(378, P22), 3)
    assert frames[0] == encode_input(3)
    assert len(frames) == record.runtime + 1
    assert frames[-1] == record.output_tape


def test_trace_grid_rows_have_equal_width():
    rows = trace_grid(decode(378, P22), 4)
    assert len(set(map(len, rows))) == 1
    assert rows[0].endswith("11111")


def test_step_bound_validation():
    with pytest.raises(ValueError):
        run22(0, 0, 0)
    with pytest.raises(ValueError):
        detect_divergence_fast(decode(0, P22), 0, 0)


def test_fast_detector_matches_plain_run_on_halting_machines():
    # both routes must report byte-identical records when the machine halts
    for rule in range(0, 4096, 53):
        for x in (0, 2, 7):
            plain = run22(rule, x)
            fast = detect_divergence_fast(decode(rule, P22), x, 1000)
            if plain.halted or fast.halted:
                assert plain == fast


def test_fast_detector_divergence_claims_survive_deeper_plain_runs():
    # a divergence certificate is a proof: no deeper bound may refute it
    checked = 0
    for rule in range(0, 4096, 53):
        fast = detect_divergence_fast(decode(rule, P22), 4, 1000)
        if not fast.halted:
            deep = run22(rule, 4, 50_000)
            assert not deep.halted
            checked += 1
    assert checked > 20


def test_fast_detector_certificate_can_fire_before_the_bound():
    # the all-Left machine cycles immediately; certificate needs few steps
    record = detect_divergence_fast(decode(0, P22), 0, 10**9)
    assert not record.halted
