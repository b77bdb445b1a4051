"""JIT-compiled execution kernels.

Semantics mirror simulator.run / simulator.detect_divergence_fast exactly;
the pure-Python functions there are the reference oracle for these kernels.
Tapes are byte-per-cell numpy buffers that grow geometrically, so deep
re-runs (bounds of 10^7..10^9) stay in fixed integer arithmetic.

Output encoding in batch results: value >= 0 is the exact output when it
fits an int64 (up to 63 bits), -1 marks divergence, -2 marks an output too
wide for an int64 (the caller re-runs those few records to recover the full tape).

Only 2-color spaces are compiled; the digit layout matches rulecodec.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

OUT_DIVERGENT = -1
OUT_WIDE = -2


@njit(cache=True)
def _decode_table(s, rule, wr, mv, nx):
    """Fill flat table arrays (index (state-1)*2 + color) from a rule number."""
    base = 4 * s
    r = rule
    for j in range(2 * s):
        d = r % base
        r //= base
        i = 2 * s - 1 - j  # digit position, most significant first
        idx = (i // 2) * 2 + (1 - (i & 1))
        mv[idx] = d & 1
        wr[idx] = (d >> 1) & 1
        nx[idx] = (d >> 2) + 1


@njit(cache=True)
def _exec(wr, mv, nx, inp, bound, tape, snap, rec):
    """Run one machine on one input with divergence certificates.

    Returns (runtime, space, touched, tape, snap, rec); runtime/space are
    -1 when the machine did not halt.  touched is the highest cell index
    that is meaningful in the returned tape.  The three buffers may be
    grown replacements of the ones passed in; callers that reuse buffers
    across calls must rebind all three from the return value.
    """
    n_cells = inp + 1
    if n_cells + 1 >= tape.shape[0]:
        cap = tape.shape[0]
        while cap <= n_cells + 1:
            cap *= 2
        tape = np.zeros(cap, np.uint8)
        snap = np.zeros(cap, np.uint8)
        rec = np.zeros(cap, np.uint8)
    for i in range(n_cells):
        tape[i] = 1
    pos = 0
    state = 1
    head_max = 0
    frontier = inp
    touched = inp

    # exact configuration-repeat snapshot (re-taken at power-of-two steps)
    s_state = 1
    s_pos = 0
    s_touched = inp
    for i in range(n_cells):
        snap[i] = 1
    next_snap = 1

    # fresh-territory snapshot for the translation certificate
    r_state = -1
    r_pos = -1
    r_min = 0
    rec_count = 0
    next_rec = 1

    step = 0
    while step < bound:
        step += 1
        c = tape[pos]
        idx = (state - 1) * 2 + c
        w = wr[idx]
        m = mv[idx]
        state = nx[idx]
        tape[pos] = w
        if m == 1:
            if pos == 0:
                space = head_max if head_max > 0 else 1
                return step, space, touched, tape, snap, rec
            pos -= 1
        else:
            pos += 1
            if pos + 1 >= tape.shape[0]:
                cap = tape.shape[0] * 2
                nt = np.zeros(cap, np.uint8)
                nt[: tape.shape[0]] = tape
                tape = nt
                ns = np.zeros(cap, np.uint8)
                ns[: snap.shape[0]] = snap
                snap = ns
                nr = np.zeros(cap, np.uint8)
                nr[: rec.shape[0]] = rec
                rec = nr
            if pos > head_max:
                head_max = pos
                if pos > touched:
                    touched = pos
            if pos > frontier:
                frontier = pos
                rec_count += 1
                if r_state == state:
                    depth = r_pos - r_min
                    ok = True
                    for j in range(depth + 1):
                        if rec[r_pos - depth + j] != tape[pos - depth + j]:
                            ok = False
                            break
                    if ok:
                        return -1, -1, touched, tape, snap, rec
                if rec_count == next_rec:
                    r_state = state
                    r_pos = pos
                    r_min = pos
                    for j in range(pos + 1):
                        rec[j] = tape[j]
                    next_rec *= 2
        if pos < r_min:
            r_min = pos

        if state == s_state and pos == s_pos:
            same = True
            for i in range(touched + 1):
                sv = snap[i] if i <= s_touched else np.uint8(0)
                if tape[i] != sv:
                    same = False
                    break
            if same:
                return -1, -1, touched, tape, snap, rec
        if step == next_snap:
            s_state = state
            s_pos = pos
            s_touched = touched
            for i in range(touched + 1):
                snap[i] = tape[i]
            next_snap *= 2

    return -1, -1, touched, tape, snap, rec


@njit(cache=True)
def _output_code(tape, touched):
    """Exact output as int64, or OUT_WIDE when it does not fit one."""
    top = -1
    for i in range(touched, -1, -1):
        if tape[i] == 1:
            top = i
            break
    if top > 62:
        return np.int64(OUT_WIDE)
    v = np.int64(0)
    for i in range(top, -1, -1):
        v = (v << 1) | np.int64(tape[i])
    return v


@njit(cache=True, parallel=True)
def run_batch(s, rules, inputs, bound, runtimes, spaces, outs):
    """All (machine, input) runs for a vector of rule numbers.

    runtimes/spaces: int32[len(rules), len(inputs)]; outs: int64 with the
    encoding described in the module docstring.
    """
    n = rules.shape[0]
    ni = inputs.shape[0]
    cap = bound + 24 if bound < (1 << 14) else (1 << 14) + 24
    for a in prange(n):
        tape = np.zeros(cap, np.uint8)
        snap = np.zeros(cap, np.uint8)
        rec = np.zeros(cap, np.uint8)
        wr = np.empty(2 * s, np.uint8)
        mv = np.empty(2 * s, np.uint8)
        nx = np.empty(2 * s, np.uint8)
        _decode_table(s, rules[a], wr, mv, nx)
        for b in range(ni):
            runtime, space, touched, tape, snap, rec = _exec(
                wr, mv, nx, inputs[b], bound, tape, snap, rec
            )
            runtimes[a, b] = np.int32(runtime)
            spaces[a, b] = np.int32(space)
            if runtime < 0:
                outs[a, b] = OUT_DIVERGENT
            else:
                outs[a, b] = _output_code(tape, touched)
            for i in range(touched + 1):
                tape[i] = 0


@njit(cache=True)
def run_single(s, rule, inp, bound):
    """One deep run; returns (runtime, space, touched, tape)."""
    cap = 1 << 16
    tape = np.zeros(cap, np.uint8)
    snap = np.zeros(cap, np.uint8)
    rec = np.zeros(cap, np.uint8)
    wr = np.empty(2 * s, np.uint8)
    mv = np.empty(2 * s, np.uint8)
    nx = np.empty(2 * s, np.uint8)
    _decode_table(s, rule, wr, mv, nx)
    runtime, space, touched, tape, snap, rec = _exec(
        wr, mv, nx, inp, bound, tape, snap, rec
    )
    return runtime, space, touched, tape


def output_value(tape: np.ndarray, touched: int) -> int:
    """Arbitrary-precision output value from a kernel tape."""
    if touched < 0:
        return 0
    packed = np.packbits(tape[: touched + 1], bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")
