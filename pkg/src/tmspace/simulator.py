"""Small-step semantics for one-sided-tape machines with unary input.

Conventions, fixed across the project:

- The tape is unlimited to the left and ends at a fixed right edge.
  Cell positions count leftward from the edge, position 0 = rightmost.
- Input n is written as n+1 black cells flush against the right edge.
- The head starts on the rightmost cell in state 1.
- One step = read, write, move, change state.  The machine halts when
  the head sits on the rightmost cell and the entry says move Right;
  that step is counted (so immediate droppers have runtime 1) and its
  write is applied before the head leaves.
- Output is the final tape read as a binary numeral, rightmost cell
  least significant.
- Runtime and space are -1 when the machine does not halt within the
  step bound.  Space is the leftmost position index the head reached,
  clamped to a minimum of 1.

Divergence is a value here, never an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .rulecodec import MachineDescriptor, RIGHT

Tape = Tuple[int, ...]


@dataclass(frozen=True)
class RunRecord:
    """Result of running one machine on one input."""

    rule_number: int
    input: int
    halted: bool
    runtime: int
    space: int
    output_tape: Optional[Tape]
    output_value: int
    step_bound: int


def encode_input(n: int) -> Tape:
    """Unary input: n becomes n+1 black cells at the right edge."""
    if n < 0:
        raise ValueError(f"input must be a natural number, got {n}")
    return (1,) * (n + 1)


def decode_output(tape: Tape) -> int:
    """Binary value of a tape, rightmost cell least significant."""
    value = 0
    for cell in tape:
        value = (value << 1) | cell
    return value


def _compiled_table(machine: MachineDescriptor):
    """Flatten the table to a dense list indexed by (state-1)*k + color."""
    k = machine.params.colors
    flat = [None] * (machine.params.states * k)
    for (state, color), entry in machine.table.items():
        flat[(state - 1) * k + color] = (
            entry.write,
            1 if entry.move == RIGHT else 0,
            entry.next_state,
        )
    return flat


def _tape_tuple(bits: int, extent: int) -> Tape:
    """Cells 0..extent as a tuple, leftmost cell first."""
    return tuple((bits >> p) & 1 for p in range(extent, -1, -1))


def run(machine: MachineDescriptor, input: int, step_bound: int = 1000) -> RunRecord:
    """Plain step-by-step execution up to step_bound."""
    if step_bound < 1:
        raise ValueError(f"step_bound must be >= 1, got {step_bound}")
    flat = _compiled_table(machine)
    k = machine.params.colors
    tape = (1 << (input + 1)) - 1
    pos = 0
    head_max = 0
    state = 1
    for step in range(1, step_bound + 1):
        color = (tape >> pos) & 1
        write, move_right, state = flat[(state - 1) * k + color]
        if write:
            tape |= 1 << pos
        else:
            tape &= ~(1 << pos)
        if move_right:
            if pos == 0:
                out = _tape_tuple(tape, max(head_max, input))
                return RunRecord(
                    rule_number=machine.rule_number,
                    input=input,
                    halted=True,
                    runtime=step,
                    space=max(1, head_max),
                    output_tape=out,
                    output_value=tape,
                    step_bound=step_bound,
                )
            pos -= 1
        else:
            pos += 1
            if pos > head_max:
                head_max = pos
    return RunRecord(
        rule_number=machine.rule_number,
        input=input,
        halted=False,
        runtime=-1,
        space=-1,
        output_tape=None,
        output_value=-1,
        step_bound=step_bound,
    )


def trace(machine: MachineDescriptor, input: int, step_bound: int = 1000) -> List[Tape]:
    """Tape after every step, starting with the input configuration.

    Length is min(runtime, step_bound) + 1; for a halting run the last
    element equals the output tape.
    """
    flat = _compiled_table(machine)
    k = machine.params.colors
    tape = (1 << (input + 1)) - 1
    pos = 0
    extent = input
    state = 1
    frames = [_tape_tuple(tape, extent)]
    for _ in range(step_bound):
        color = (tape >> pos) & 1
        write, move_right, state = flat[(state - 1) * k + color]
        if write:
            tape |= 1 << pos
        else:
            tape &= ~(1 << pos)
        halted = False
        if move_right:
            if pos == 0:
                halted = True
            else:
                pos -= 1
        else:
            pos += 1
            extent = max(extent, pos)
        frames.append(_tape_tuple(tape, extent))
        if halted:
            break
    return frames


def trace_grid(machine: MachineDescriptor, input: int, step_bound: int = 1000) -> List[str]:
    """The trace as equal-width text rows of 0/1, one row per configuration."""
    frames = trace(machine, input, step_bound)
    width = max(len(f) for f in frames)
    return ["".join(map(str, f)).rjust(width, "0") for f in frames]


def detect_divergence_fast(
    machine: MachineDescriptor, input: int, step_bound: int = 1000
) -> RunRecord:
    """Same observable result as run(), but may prove divergence early.

    Two certificates are checked while stepping:

    - exact configuration repeat (state, position, tape), caught by
      comparing against a snapshot that is re-taken at power-of-two step
      counts (Brent's method);
    - leftward translation: when the head enters fresh territory in the
      same state as an earlier fresh-territory snapshot and the tape
      segment reaching down to the deepest position visited since that
      snapshot is an exact shifted copy, the machine provably repeats
      the excursion forever.

    Either certificate means the machine can never halt, so the record
    it returns (runtime -1) is identical to what run() would return at
    any bound.
    """
    if step_bound < 1:
        raise ValueError(f"step_bound must be >= 1, got {step_bound}")
    flat = _compiled_table(machine)
    k = machine.params.colors
    tape = (1 << (input + 1)) - 1
    pos = 0
    head_max = 0
    frontier = input  # above this everything is blank and unvisited
    state = 1

    snap_tape, snap_pos, snap_state = tape, pos, state
    next_snap_step = 1

    rec_tape = -1
    rec_pos = -1
    rec_state = -1
    rec_min = 0
    rec_count = 0
    next_snap_rec = 1

    divergent = RunRecord(
        rule_number=machine.rule_number,
        input=input,
        halted=False,
        runtime=-1,
        space=-1,
        output_tape=None,
        output_value=-1,
        step_bound=step_bound,
    )

    for step in range(1, step_bound + 1):
        color = (tape >> pos) & 1
        write, move_right, state = flat[(state - 1) * k + color]
        if write:
            tape |= 1 << pos
        else:
            tape &= ~(1 << pos)
        if move_right:
            if pos == 0:
                out = _tape_tuple(tape, max(head_max, input))
                return RunRecord(
                    rule_number=machine.rule_number,
                    input=input,
                    halted=True,
                    runtime=step,
                    space=max(1, head_max),
                    output_tape=out,
                    output_value=tape,
                    step_bound=step_bound,
                )
            pos -= 1
        else:
            pos += 1
            if pos > head_max:
                head_max = pos
            if pos > frontier:
                frontier = pos
                rec_count += 1
                if rec_state == state and rec_pos >= 0:
                    depth = rec_pos - rec_min
                    if (rec_tape >> (rec_pos - depth)) == (tape >> (pos - depth)):
                        return divergent
                if rec_count == next_snap_rec:
                    rec_tape, rec_pos, rec_state = tape, pos, state
                    rec_min = pos
                    next_snap_rec *= 2
        if pos < rec_min:
            rec_min = pos

        if state == snap_state and pos == snap_pos and tape == snap_tape:
            return divergent
        if step == next_snap_step:
            snap_tape, snap_pos, snap_state = tape, pos, state
            next_snap_step *= 2

    return divergent
