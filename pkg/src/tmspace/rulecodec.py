"""Rule-number codec for (s,k) Turing machine spaces.

A machine with s states and k colors is identified by a rule number in
[0, (2sk)^(sk)) following Wolfram's enumeration.  The number, written in
base 2sk as exactly s*k digits (most significant first), lists one
transition per (state, color) pair: states ascending, colors descending
within each state.  Each digit packs a transition as

    digit = ((next_state - 1) * k + write_color) * 2 + (1 if Right else 0)

This layout is fixed by calibration against published runtime sequences
(see calibration.check_convention); do not change it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, Sequence, Tuple

LEFT = "L"
RIGHT = "R"


@dataclass(frozen=True)
class SpaceParams:
    """Dimensions of a machine space: s states, k tape colors."""

    states: int
    colors: int = 2

    def __post_init__(self) -> None:
        if self.states < 1:
            raise ValueError(f"states must be >= 1, got {self.states}")
        if self.colors < 2:
            raise ValueError(f"colors must be >= 2, got {self.colors}")

    @property
    def base(self) -> int:
        """Radix of the rule-number digit string: 2sk."""
        return 2 * self.states * self.colors

    @property
    def digits(self) -> int:
        """Number of digits, one per (state, color) pair: s*k."""
        return self.states * self.colors


@dataclass(frozen=True)
class TransitionEntry:
    """One table entry: what to write, where to move, which state is next."""

    write: int
    move: str
    next_state: int


@dataclass(frozen=True)
class MachineDescriptor:
    """A decoded machine: its space, rule number, and full transition table."""

    params: SpaceParams
    rule_number: int
    table: Dict[Tuple[int, int], TransitionEntry]


def space_size(params: SpaceParams) -> int:
    """Total number of machines in the space: (2sk)^(sk), exact."""
    return params.base ** params.digits


def _pair_order(params: SpaceParams) -> Iterator[Tuple[int, int]]:
    """(state, color) pairs in digit order, most significant digit first."""
    for state in range(1, params.states + 1):
        for color in range(params.colors - 1, -1, -1):
            yield state, color


def _unpack(digit: int, params: SpaceParams) -> TransitionEntry:
    move = RIGHT if digit & 1 else LEFT
    rest = digit >> 1
    return TransitionEntry(
        write=rest % params.colors,
        move=move,
        next_state=rest // params.colors + 1,
    )


def _pack(entry: TransitionEntry, params: SpaceParams) -> int:
    digit = (entry.next_state - 1) * params.colors + entry.write
    return digit * 2 + (1 if entry.move == RIGHT else 0)


def decode(rule_number: int, params: SpaceParams) -> MachineDescriptor:
    """Expand a rule number into its full transition table."""
    size = space_size(params)
    if not 0 <= rule_number < size:
        raise ValueError(
            f"rule number {rule_number} out of range for a space of {size} machines"
        )
    digits = []
    n = rule_number
    for _ in range(params.digits):
        n, d = divmod(n, params.base)
        digits.append(d)
    digits.reverse()
    table = {
        pair: _unpack(d, params) for pair, d in zip(_pair_order(params), digits)
    }
    return MachineDescriptor(params=params, rule_number=rule_number, table=table)


def encode(machine: MachineDescriptor) -> int:
    """Inverse of decode; rejects tables with missing or invalid entries."""
    params = machine.params
    n = 0
    for pair in _pair_order(params):
        if pair not in machine.table:
            raise ValueError(f"transition table is missing entry for {pair}")
        entry = machine.table[pair]
        if not 0 <= entry.write < params.colors:
            raise ValueError(f"invalid write color {entry.write} at {pair}")
        if not 1 <= entry.next_state <= params.states:
            raise ValueError(f"invalid next state {entry.next_state} at {pair}")
        if entry.move not in (LEFT, RIGHT):
            raise ValueError(f"invalid move {entry.move!r} at {pair}")
        n = n * params.base + _pack(entry, params)
    return n


def twin(rule_number: int, params: SpaceParams, permutation: Dict[int, int]) -> int:
    """Rule number of the same machine with non-initial states relabeled.

    The permutation maps old state numbers to new ones and must fix
    state 1 (the start state); omitted states map to themselves.
    """
    perm = {s: permutation.get(s, s) for s in range(1, params.states + 1)}
    if perm[1] != 1:
        raise ValueError("permutation must fix state 1")
    if sorted(perm.values()) != list(range(1, params.states + 1)):
        raise ValueError(f"not a permutation of states 1..{params.states}: {permutation}")
    machine = decode(rule_number, params)
    table = {
        (perm[state], color): TransitionEntry(
            write=entry.write, move=entry.move, next_state=perm[entry.next_state]
        )
        for (state, color), entry in machine.table.items()
    }
    return encode(MachineDescriptor(params=params, rule_number=-1, table=table))


def enumerate_rules(params: SpaceParams) -> range:
    """All rule numbers of the space, ascending."""
    return range(space_size(params))


def table_digits(rule_number: int, params: SpaceParams) -> Sequence[int]:
    """The raw base-2sk digit string of a rule number, most significant first."""
    digits = []
    n = rule_number
    for _ in range(params.digits):
        n, d = divmod(n, params.base)
        digits.append(d)
    digits.reverse()
    return digits
