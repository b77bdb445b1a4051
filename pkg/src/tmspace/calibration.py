"""Executable derivation of the frozen rule-number convention.

The rule number of a machine is its transition table written in base
2sk, one digit per (state, color) pair.  Which pair owns which digit,
and how (next_state, write, move) pack into a digit, admit 384
plausible layouts.  This module searches all of them against behavioral
anchors (published runtime sequences, a known transition entry, a known
twin pair) and checks that exactly one layout survives: the one frozen
in rulecodec.

Anchors, all in terms of observable behavior:

  A1  rule 2506 in (2,2) reads blank in state 1 as: write 1, move
      Right, go to state 2.
  A2  rule 2240 in (2,2) has runtimes 5,5,9,9,13,13 on inputs 0..5.
  A3  rule 2205 in (2,2) has runtimes 3,7,17,27,37,47 on inputs 0..5.
  A4  rule 378 in (2,2) has runtimes 5,13,29,61,125,253 on inputs 0..5
      and returns its input tape unchanged.
  A5  rules 599063 and 666364 in (3,2) are the same machine up to
      swapping states 2 and 3.
  A6  (deep, optional) rules 378 and 1351 halt on input 20 after
      8 388 605 steps with space 21 and output 2 097 151.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from .rulecodec import (
    LEFT,
    RIGHT,
    MachineDescriptor,
    SpaceParams,
    TransitionEntry,
    decode,
)
from .simulator import run


@dataclass(frozen=True)
class CodecConvention:
    """One candidate digit layout."""

    state_major: bool
    state_desc: bool
    color_desc: bool
    field_order: Tuple[str, str, str]
    next_desc: bool
    write_desc: bool
    move_right_value: int

    def describe(self) -> str:
        pairs = (
            f"states {'descending' if self.state_desc else 'ascending'}, "
            f"colors {'descending' if self.color_desc else 'ascending'}, "
            f"{'state' if self.state_major else 'color'}-major"
        )
        fields = ">".join(self.field_order)
        return (
            f"pair order: {pairs}; digit packing (msd first): {fields}; "
            f"next {'descending' if self.next_desc else 'ascending'}, "
            f"write {'inverted' if self.write_desc else 'direct'}, "
            f"move digit {self.move_right_value} = Right"
        )


FROZEN = CodecConvention(
    state_major=True,
    state_desc=False,
    color_desc=True,
    field_order=("n", "w", "m"),
    next_desc=False,
    write_desc=False,
    move_right_value=1,
)


def conventions() -> Iterator[CodecConvention]:
    for sm, sd, cd in itertools.product((True, False), repeat=3):
        for fo in itertools.permutations("nwm"):
            for nd, wd in itertools.product((True, False), repeat=2):
                for mrv in (0, 1):
                    yield CodecConvention(sm, sd, cd, tuple(fo), nd, wd, mrv)


def _pairs(conv: CodecConvention, params: SpaceParams) -> List[Tuple[int, int]]:
    states = (
        range(params.states, 0, -1) if conv.state_desc else range(1, params.states + 1)
    )
    colors = (
        range(params.colors - 1, -1, -1) if conv.color_desc else range(params.colors)
    )
    if conv.state_major:
        return [(q, c) for q in states for c in colors]
    return [(q, c) for c in colors for q in states]


def _unpack_digit(
    conv: CodecConvention, digit: int, params: SpaceParams
) -> TransitionEntry:
    radix = {"n": params.states, "w": params.colors, "m": 2}
    f1, f2, f3 = conv.field_order
    r2, r3 = radix[f2], radix[f3]
    fields = {f1: digit // (r2 * r3), f2: (digit // r3) % r2, f3: digit % r3}
    nxt = (params.states - fields["n"]) if conv.next_desc else fields["n"] + 1
    write = (params.colors - 1 - fields["w"]) if conv.write_desc else fields["w"]
    move = RIGHT if fields["m"] == conv.move_right_value else LEFT
    return TransitionEntry(write=write, move=move, next_state=nxt)


def _pack_digit(
    conv: CodecConvention, entry: TransitionEntry, params: SpaceParams
) -> int:
    radix = {"n": params.states, "w": params.colors, "m": 2}
    vn = (
        params.states - entry.next_state
        if conv.next_desc
        else entry.next_state - 1
    )
    vw = (
        params.colors - 1 - entry.write if conv.write_desc else entry.write
    )
    vm = (
        conv.move_right_value
        if entry.move == RIGHT
        else 1 - conv.move_right_value
    )
    fields = {"n": vn, "w": vw, "m": vm}
    f1, f2, f3 = conv.field_order
    return (fields[f1] * radix[f2] + fields[f2]) * radix[f3] + fields[f3]


def decode_with(
    conv: CodecConvention, rule_number: int, params: SpaceParams
) -> MachineDescriptor:
    base = params.base
    digits = []
    n = rule_number
    for _ in range(params.digits):
        digits.append(n % base)
        n //= base
    digits.reverse()
    table = {
        pair: _unpack_digit(conv, d, params)
        for pair, d in zip(_pairs(conv, params), digits)
    }
    return MachineDescriptor(params=params, rule_number=rule_number, table=table)


def encode_with(
    conv: CodecConvention, table: Dict[Tuple[int, int], TransitionEntry], params: SpaceParams
) -> int:
    n = 0
    for pair in _pairs(conv, params):
        n = n * params.base + _pack_digit(conv, table[pair], params)
    return n


def _runtimes(
    conv: CodecConvention, rule: int, params: SpaceParams, inputs: range, bound: int
) -> List[int]:
    machine = decode_with(conv, rule, params)
    return [run(machine, x, bound).runtime for x in inputs]


def _twin_holds(conv: CodecConvention) -> bool:
    params = SpaceParams(3, 2)
    table = decode_with(conv, 599063, params).table
    sigma = {1: 1, 2: 3, 3: 2}
    relabeled = {
        (sigma[q], c): TransitionEntry(e.write, e.move, sigma[e.next_state])
        for (q, c), e in table.items()
    }
    return encode_with(conv, relabeled, params) == 666364


def calibrate(deep: bool = False) -> List[CodecConvention]:
    """Survivors of the anchor gauntlet; expected to be exactly [FROZEN]."""
    p22 = SpaceParams(2, 2)
    survivors = []
    for conv in conventions():
        entry = decode_with(conv, 2506, p22).table[(1, 0)]
        if entry != TransitionEntry(write=1, move=RIGHT, next_state=2):
            continue
        if _runtimes(conv, 2240, p22, range(6), 200) != [5, 5, 9, 9, 13, 13]:
            continue
        if _runtimes(conv, 2205, p22, range(6), 200) != [3, 7, 17, 27, 37, 47]:
            continue
        if _runtimes(conv, 378, p22, range(6), 1000) != [5, 13, 29, 61, 125, 253]:
            continue
        if not _twin_holds(conv):
            continue
        survivors.append(conv)
    if deep:
        deep_ok = []
        for conv in survivors:
            good = True
            for rule in (378, 1351):
                rec = run(decode_with(conv, rule, p22), 20, 10_000_000)
                if not (
                    rec.halted
                    and rec.runtime == 8_388_605
                    and rec.space == 21
                    and rec.output_value == 2_097_151
                ):
                    good = False
                    break
            if good:
                deep_ok.append(conv)
        survivors = deep_ok
    return survivors


def check_convention(deep: bool = False) -> CodecConvention:
    """Assert the frozen convention is the unique anchor-consistent layout."""
    survivors = calibrate(deep=deep)
    if survivors != [FROZEN]:
        raise RuntimeError(
            f"calibration did not isolate the frozen convention: {survivors}"
        )
    frozen_params = SpaceParams(2, 2)
    for rule in range(0, 4096, 97):
        if decode_with(FROZEN, rule, frozen_params).table != decode(rule, frozen_params).table:
            raise RuntimeError(f"frozen convention drifted from rulecodec at rule {rule}")
    return FROZEN
