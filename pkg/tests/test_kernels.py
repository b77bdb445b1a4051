import numpy as np

from tmspace import _kernels
from tmspace.rulecodec import SpaceParams, decode
from tmspace.simulator import run


def batch(rules, inputs, bound, states=2):
    rules = np.asarray(rules, dtype=np.int64)
    inputs = np.asarray(inputs, dtype=np.int64)
    runtimes = np.empty((rules.size, inputs.size), dtype=np.int32)
    spaces = np.empty_like(runtimes)
    outs = np.empty((rules.size, inputs.size), dtype=np.int64)
    _kernels.run_batch(states, rules, inputs, bound, runtimes, spaces, outs)
    return runtimes, spaces, outs


def test_batch_agrees_with_reference_semantics():
    params = SpaceParams(2, 2)
    rules = list(range(0, 4096, 97))
    inputs = list(range(9))
    runtimes, spaces, outs = batch(rules, inputs, 1000)
    for a, rule in enumerate(rules):
        machine = decode(rule, params)
        for b, x in enumerate(inputs):
            record = run(machine, x, 1000)
            assert runtimes[a, b] == record.runtime
            assert spaces[a, b] == record.space
            if record.halted:
                assert outs[a, b] == record.output_value
            else:
                assert outs[a, b] == _kernels.OUT_DIVERGENT


def test_batch_agrees_with_reference_in_three_state_space():
    params = SpaceParams(3, 2)
    rules = [599063, 666364, 0, 12345, 2_985_983]
    inputs = [0, 1, 2, 3]
    runtimes, spaces, outs = batch(rules, inputs, 1000, states=3)
    for a, rule in enumerate(rules):
        machine = decode(rule, params)
        for b, x in enumerate(inputs):
            record = run(machine, x, 1000)
            assert runtimes[a, b] == record.runtime
            assert spaces[a, b] == record.space


def test_wide_outputs_are_marked_not_truncated():
    # identity dropper at input 63 leaves 64 one-bits: too wide for int64
    runtimes, spaces, outs = batch([1536], [62, 63], 1000)
    assert outs[0, 0] == (1 << 63) - 1  # exactly the int64 maximum
    assert outs[0, 1] == _kernels.OUT_WIDE
    runtime, space, touched, tape = _kernels.run_single(2, 1536, 63, 1000)
    assert runtime == 1
    assert _kernels.output_value(tape, touched) == (1 << 64) - 1


def test_inputs_larger_than_the_bound_are_initialized_correctly():
    # n+1 input cells exceed the small step-bound buffer; it must grow
    runtimes, spaces, outs = batch([1536], [100], 50)
    assert runtimes[0, 0] == 1
    assert outs[0, 0] == _kernels.OUT_WIDE
    runtime, space, touched, tape = _kernels.run_single(2, 1536, 100, 50)
    assert _kernels.output_value(tape, touched) == (1 << 101) - 1


def test_output_value_reads_tape_little_endian():
    tape = np.zeros(16, dtype=np.uint8)
    tape[[0, 2, 5]] = 1
    assert _kernels.output_value(tape, 5) == 0b100101
    assert _kernels.output_value(tape, 15) == 0b100101
    assert _kernels.output_value(np.zeros(4, dtype=np.uint8), 3) == 0


def test_run_single_matches_batch_results():
    rules = [378, 1351, 2240, 2205]
    runtimes, spaces, outs = batch(rules, list(range(6)), 1000)
    for a, rule in enumerate(rules):
        for x in range(6):
            runtime, space, touched, tape = _kernels.run_single(2, rule, x, 1000)
            assert runtime == runtimes[a, x]
            assert space == spaces[a, x]
            if runtime >= 0 and outs[a, x] >= 0:
                assert _kernels.output_value(tape, touched) == outs[a, x]
