"""Catalog construction over a space's run records.

The pipeline turns a raw RunStore into a cleansed catalog of functions
(distinct 21-output tuples), algorithms (distinct output/runtime/space
triples of tuples), halting statistics, runtime-sequence censuses,
definable sets, resource overviews, and complexity classes.

Cleansing at scale works on deduplicated rows: machines sharing an
identical raw (outputs, runtimes, spaces) triple are completed once.
Every machine whose raw row mixes convergent and divergent cells is
then re-run at a raised verification bound; where the deep run halts,
its actual values replace both predictions and cells the predictor
declined (per machine, since machines with identical shallow rows can
differ beyond the bound), and the predictor takes a second pass over
the extended row.

Output values too wide for an int64 are interned: codes >= 0 are the value
itself, -1 marks divergence, and codes <= -3 index a table of exact big
integers, so equality on code rows is equality on values.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import cleanser
from .cleanser import complete_values
from .harness import RunStore, rerun_subset
from .rulecodec import SpaceParams

INPUT_COUNT = 21
_INTERN_BASE = -3
_NARROW_LIMIT = 63


@functools.total_ordering
class ComplexityClass(enum.Enum):
    O1 = 0
    On = 1
    On2 = 2
    On3 = 3
    On4 = 4
    OExp = 5

    def __lt__(self, other: "ComplexityClass") -> bool:
        if not isinstance(other, ComplexityClass):
            return NotImplemented
        return self.value < other.value

    def label(self) -> str:
        return {
            ComplexityClass.O1: "O(1)",
            ComplexityClass.On: "O(n)",
            ComplexityClass.On2: "O(n^2)",
            ComplexityClass.On3: "O(n^3)",
            ComplexityClass.On4: "O(n^4)",
            ComplexityClass.OExp: "O(Exp)",
        }[self]


@dataclass(frozen=True)
class AlgorithmProfile:
    outputs: Tuple[int, ...]
    runtimes: Tuple[int, ...]
    spaces: Tuple[int, ...]
    members: np.ndarray

    @property
    def member_count(self) -> int:
        return int(self.members.shape[0])


@dataclass(frozen=True)
class FunctionProfile:
    outputs: Tuple[int, ...]
    members: np.ndarray
    algorithms: Tuple[AlgorithmProfile, ...]

    @property
    def member_count(self) -> int:
        return int(self.members.shape[0])

    @property
    def is_total(self) -> bool:
        return all(v != -1 for v in self.outputs)


@dataclass(frozen=True)
class DefinableSet:
    inputs: frozenset
    witnesses: np.ndarray
    complement_definable: bool


class _ValueTable:
    """Bijective interning of integers into int64 codes."""

    def __init__(self) -> None:
        self._by_value: Dict[int, int] = {}
        self._values: List[int] = []

    def encode(self, value: int) -> int:
        if value == -1:
            return -1
        if 0 <= value < (1 << _NARROW_LIMIT):
            return value
        code = self._by_value.get(value)
        if code is None:
            code = _INTERN_BASE - len(self._values)
            self._by_value[value] = code
            self._values.append(value)
        return code

    def decode(self, code: int) -> int:
        if code >= -1:
            return int(code)
        return self._values[_INTERN_BASE - code]

    def decode_row(self, row: Iterable[int]) -> Tuple[int, ...]:
        return tuple(self.decode(int(c)) for c in row)

    def encode_row(self, row: Iterable[int]) -> Tuple[int, ...]:
        return tuple(self.encode(int(v)) for v in row)


class SpaceAnalysis:
    """All per-space catalog data derived from one store."""

    def __init__(
        self,
        store: RunStore,
        cleanse: bool = True,
        verification_bound: int = cleanser.VERIFICATION_BOUND,
        deep_path: Optional[str] = None,
    ) -> None:
        self.store = store
        self.params: SpaceParams = store.params
        self.inputs = store.inputs
        if len(self.inputs) != INPUT_COUNT or self.inputs != tuple(range(INPUT_COUNT)):
            raise ValueError("catalog analysis expects inputs 0..20")
        self.table = _ValueTable()
        self._load(store)
        self._dedupe()
        if cleanse:
            self._cleanse()
            self._verify(verification_bound, deep_path)
        else:
            self._uniq_out_clean = [tuple(r) for r in self._uniq_out]
            self._uniq_rt_clean = [tuple(r) for r in self._uniq_rt]
            self._uniq_sp_clean = [tuple(r) for r in self._uniq_sp]
            self._patched: Dict[int, Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]] = {}
        self.cleansed = cleanse
        self._group()

    def _load(self, store: RunStore) -> None:
        rules, runtimes, spaces, outs, wide = store.columnar()
        if rules.shape[0] == 0:
            raise ValueError("store holds no records")
        missing = runtimes.shape[1] != INPUT_COUNT
        if missing:
            raise ValueError("store does not cover inputs 0..20")
        self.rules = rules
        self.raw_runtimes = runtimes
        self.raw_spaces = spaces
        out_codes = outs.astype(np.int64, copy=True)
        for (rule, inp), value in wide.items():
            row = int(np.searchsorted(rules, rule))
            out_codes[row, self.inputs.index(inp)] = self.table.encode(value)
        self.raw_out_codes = out_codes

    def _dedupe(self) -> None:
        n = self.rules.shape[0]
        packed = np.empty((n, 16 * INPUT_COUNT), dtype=np.uint8)
        packed[:, : 8 * INPUT_COUNT] = self.raw_out_codes.view(np.uint8).reshape(n, -1)
        packed[:, 8 * INPUT_COUNT : 12 * INPUT_COUNT] = self.raw_runtimes.view(
            np.uint8
        ).reshape(n, -1)
        packed[:, 12 * INPUT_COUNT :] = self.raw_spaces.view(np.uint8).reshape(n, -1)
        _, first, inverse = np.unique(
            packed, axis=0, return_index=True, return_inverse=True
        )
        self._inverse = inverse.reshape(-1).astype(np.int64)
        self._uniq_out = self.raw_out_codes[first]
        self._uniq_rt = self.raw_runtimes[first]
        self._uniq_sp = self.raw_spaces[first]

    def _cleanse(self) -> None:
        u = self._uniq_out.shape[0]
        floor = self.store.step_bound
        self._uniq_out_clean = []
        self._uniq_rt_clean = []
        self._uniq_sp_clean = []
        self._uniq_filled: List[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]] = []
        for i in range(u):
            out_row = [self.table.decode(c) for c in self._uniq_out[i]]
            rt_row = [int(v) for v in self._uniq_rt[i]]
            sp_row = [int(v) for v in self._uniq_sp[i]]
            rt_done = complete_values(rt_row, floor=floor)
            grants = {
                p for p in range(INPUT_COUNT) if rt_row[p] == -1 and rt_done[p] != -1
            }
            out_done = complete_values(out_row, allow=grants)
            sp_done = complete_values(sp_row, allow=grants)
            self._uniq_out_clean.append(self.table.encode_row(out_done))
            self._uniq_rt_clean.append(self.table.encode_row(rt_done))
            self._uniq_sp_clean.append(self.table.encode_row(sp_done))
            self._uniq_filled.append(
                (
                    tuple(p for p in range(INPUT_COUNT) if out_row[p] == -1 and out_done[p] != -1),
                    tuple(p for p in range(INPUT_COUNT) if rt_row[p] == -1 and rt_done[p] != -1),
                    tuple(p for p in range(INPUT_COUNT) if sp_row[p] == -1 and sp_done[p] != -1),
                )
            )

    def _verify(self, bound: int, deep_path: Optional[str]) -> None:
        """Deep-rerun every censored machine; actual values win, then refit.

        The rerun set is every machine whose raw row mixes convergent
        and divergent cells.  Wherever the deep run halts, its actual
        triple replaces shallow predictions and previously censored
        cells alike, and the predictor takes a second pass over the
        extended row, so cells beyond even the raised bound can be
        completed from the longer evidence.
        """
        self._patched = {}
        conv = self._uniq_rt >= 0
        partial = conv.any(axis=1) & ~conv.all(axis=1)
        if not partial.any():
            self.deep_store = None
            return
        mask = partial[self._inverse]
        machines = self.rules[mask]
        if deep_path is None:
            deep_path = str(self.store.path / f"verify{bound}")
        self.deep_store = rerun_subset(self.store, machines.tolist(), bound, deep_path)
        d_rules, d_rt, d_sp, d_out, d_wide = self.deep_store.columnar()
        order = {int(r): i for i, r in enumerate(d_rules)}
        refit: Dict[
            Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]],
            Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]],
        ] = {}
        for midx in np.nonzero(mask)[0]:
            rule = int(self.rules[midx])
            uid = int(self._inverse[midx])
            row = order[rule]
            out_t = [int(c) for c in self._uniq_out[uid]]
            rt_t = [int(v) for v in self._uniq_rt[uid]]
            sp_t = [int(v) for v in self._uniq_sp[uid]]
            for p in range(INPUT_COUNT):
                if rt_t[p] >= 0 or d_rt[row, p] < 0:
                    continue
                rt_t[p] = int(d_rt[row, p])
                sp_t[p] = int(d_sp[row, p])
                wide = d_wide.get((rule, self.inputs[p]))
                out_t[p] = self.table.encode(
                    int(d_out[row, p]) if wide is None else wide
                )
            key = (tuple(out_t), tuple(rt_t), tuple(sp_t))
            done = refit.get(key)
            if done is None:
                rt_done = complete_values(list(key[1]), floor=bound)
                grants = {
                    p
                    for p in range(INPUT_COUNT)
                    if key[1][p] == -1 and rt_done[p] != -1
                }
                done = (
                    self.table.encode_row(
                        complete_values(
                            [self.table.decode(c) for c in key[0]], allow=grants
                        )
                    ),
                    self.table.encode_row(rt_done),
                    self.table.encode_row(
                        complete_values(list(key[2]), allow=grants)
                    ),
                )
                refit[key] = done
            if done != (
                self._uniq_out_clean[uid],
                self._uniq_rt_clean[uid],
                self._uniq_sp_clean[uid],
            ):
                self._patched[int(midx)] = done

    def _effective_row(self, midx: int) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
        patched = self._patched.get(midx)
        if patched is not None:
            return patched
        uid = int(self._inverse[midx])
        return (
            self._uniq_out_clean[uid],
            self._uniq_rt_clean[uid],
            self._uniq_sp_clean[uid],
        )

    def _group(self) -> None:
        n = self.rules.shape[0]
        alg_of_uid: Dict[int, int] = {}
        alg_key_to_id: Dict[Tuple, int] = {}
        alg_rows: List[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]] = []
        for uid in range(len(self._uniq_out_clean)):
            key = (
                self._uniq_out_clean[uid],
                self._uniq_rt_clean[uid],
                self._uniq_sp_clean[uid],
            )
            aid = alg_key_to_id.get(key)
            if aid is None:
                aid = len(alg_rows)
                alg_key_to_id[key] = aid
                alg_rows.append(key)
            alg_of_uid[uid] = aid
        alg_ids = np.empty(n, dtype=np.int64)
        uid_to_aid = np.array(
            [alg_of_uid[u] for u in range(len(self._uniq_out_clean))], dtype=np.int64
        )
        alg_ids[:] = uid_to_aid[self._inverse]
        for midx, key in self._patched.items():
            aid = alg_key_to_id.get(key)
            if aid is None:
                aid = len(alg_rows)
                alg_key_to_id[key] = aid
                alg_rows.append(key)
            alg_ids[midx] = aid
        order = np.argsort(alg_ids, kind="stable")
        counts = np.bincount(alg_ids, minlength=len(alg_rows))
        bounds = np.concatenate([[0], np.cumsum(counts)])
        members_by_aid = [
            np.sort(self.rules[order[bounds[a] : bounds[a + 1]]])
            for a in range(len(alg_rows))
        ]
        algs: List[AlgorithmProfile] = []
        for aid, (out_k, rt_k, sp_k) in enumerate(alg_rows):
            if members_by_aid[aid].size == 0:
                # every machine of this first-pass row was re-cleansed
                # onto an extended row, so the row itself is vacant
                continue
            algs.append(
                AlgorithmProfile(
                    outputs=self.table.decode_row(out_k),
                    runtimes=self.table.decode_row(rt_k),
                    spaces=self.table.decode_row(sp_k),
                    members=members_by_aid[aid],
                )
            )
        algs.sort(key=lambda a: (a.outputs, a.runtimes, a.spaces))
        by_fn: Dict[Tuple[int, ...], List[AlgorithmProfile]] = {}
        for alg in algs:
            by_fn.setdefault(alg.outputs, []).append(alg)
        functions: List[FunctionProfile] = []
        for outputs in sorted(by_fn):
            group_algs = by_fn[outputs]
            members = np.sort(np.concatenate([a.members for a in group_algs]))
            functions.append(
                FunctionProfile(
                    outputs=outputs,
                    members=members,
                    algorithms=tuple(group_algs),
                )
            )
        self.functions: List[FunctionProfile] = functions
        self.algorithms: List[AlgorithmProfile] = algs
        total = sum(f.member_count for f in functions)
        if total != n:
            raise RuntimeError(
                f"partition broken: {total} grouped machines for {n} records"
            )


def analyze(
    store: RunStore,
    cleanse: bool = True,
    verification_bound: int = cleanser.VERIFICATION_BOUND,
    deep_path: Optional[str] = None,
) -> SpaceAnalysis:
    return SpaceAnalysis(store, cleanse, verification_bound, deep_path)


def group(
    store_or_analysis,
) -> Tuple[List[FunctionProfile], List[AlgorithmProfile]]:
    """Partition a cleansed store into functions and algorithms."""
    analysis = (
        store_or_analysis
        if isinstance(store_or_analysis, SpaceAnalysis)
        else analyze(store_or_analysis)
    )
    return analysis.functions, analysis.algorithms


@dataclass(frozen=True)
class DeterminantPrefix:
    length: int
    distinct_by_prefix: Tuple[int, ...]
    first_input_frequencies: Tuple[Tuple[int, int], ...]


def determinant_prefix(functions: Sequence[FunctionProfile]) -> DeterminantPrefix:
    """Minimal prefix length whose outputs separate all functions."""
    if not functions:
        raise ValueError("no functions to separate")
    outputs = [f.outputs for f in functions]
    total = len(set(outputs))
    counts: List[int] = []
    length = None
    for ln in range(1, INPUT_COUNT + 1):
        distinct = len(set(o[:ln] for o in outputs))
        counts.append(distinct)
        if distinct == total and length is None:
            length = ln
            break
    if length is None:
        raise RuntimeError("functions are not separated by their full tuples")
    freq: Dict[int, int] = {}
    for o in outputs:
        freq[o[0]] = freq.get(o[0], 0) + 1
    ordered = tuple(
        sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    )
    return DeterminantPrefix(
        length=length,
        distinct_by_prefix=tuple(counts),
        first_input_frequencies=ordered,
    )


@dataclass(frozen=True)
class HaltingHistogram:
    counts: Mapping[int, int]
    per_input: Mapping[int, Mapping[int, int]]
    total_pairs: int

    def cumulative_fraction(self, step: int) -> float:
        halted = sum(c for rt, c in self.counts.items() if rt <= step)
        return halted / self.total_pairs

    @property
    def halting_fraction(self) -> float:
        return sum(self.counts.values()) / self.total_pairs


def halting_histogram(
    analysis: SpaceAnalysis, max_steps: Optional[int] = None
) -> HaltingHistogram:
    """Runtime occurrence counts over all raw (machine, input) pairs."""
    rt = analysis.raw_runtimes
    total = int(rt.size)
    flat = rt[rt >= 0]
    if max_steps is not None:
        flat = flat[flat <= max_steps]
    values, counts = np.unique(flat, return_counts=True)
    overall = {int(v): int(c) for v, c in zip(values, counts)}
    per_input: Dict[int, Dict[int, int]] = {}
    for b, inp in enumerate(analysis.inputs):
        col = rt[:, b]
        col = col[col >= 0]
        if max_steps is not None:
            col = col[col <= max_steps]
        v, c = np.unique(col, return_counts=True)
        per_input[inp] = {int(x): int(y) for x, y in zip(v, c)}
    return HaltingHistogram(counts=overall, per_input=per_input, total_pairs=total)


def runtime_sequence_census(
    analysis: SpaceAnalysis, provenance: str = "raw"
) -> List[Tuple[Tuple[int, ...], int]]:
    """Distinct runtime 21-tuples with machine counts, most frequent first."""
    if provenance == "raw":
        rows, counts = np.unique(analysis.raw_runtimes, axis=0, return_counts=True)
        census = [
            (tuple(int(v) for v in rows[i]), int(counts[i]))
            for i in range(rows.shape[0])
        ]
    elif provenance == "cleansed":
        tally: Dict[Tuple[int, ...], int] = {}
        for midx in range(analysis.rules.shape[0]):
            _, rt_k, _ = analysis._effective_row(midx)
            tally[rt_k] = tally.get(rt_k, 0) + 1
        census = [
            (analysis.table.decode_row(k), c) for k, c in tally.items()
        ]
    else:
        raise ValueError(f"unknown provenance {provenance!r}")
    census.sort(key=lambda kc: (-kc[1], kc[0]))
    return census


def space_sequence_census(
    analysis: SpaceAnalysis, provenance: str = "raw"
) -> List[Tuple[Tuple[int, ...], int]]:
    if provenance != "raw":
        raise ValueError("space census is reported raw")
    rows, counts = np.unique(analysis.raw_spaces, axis=0, return_counts=True)
    census = [
        (tuple(int(v) for v in rows[i]), int(counts[i]))
        for i in range(rows.shape[0])
    ]
    census.sort(key=lambda kc: (-kc[1], kc[0]))
    return census


def definable_sets(analysis: SpaceAnalysis) -> List[DefinableSet]:
    """Distinct halting sets W = {x : machine halts on x} over cleansed data."""
    by_mask: Dict[frozenset, List[np.ndarray]] = {}
    for fn in analysis.functions:
        mask = frozenset(i for i, v in enumerate(fn.outputs) if v != -1)
        by_mask.setdefault(mask, []).append(fn.members)
    result = []
    for mask in sorted(by_mask, key=lambda m: (len(m), sorted(m))):
        complement = frozenset(range(INPUT_COUNT)) - mask
        result.append(
            DefinableSet(
                inputs=mask,
                witnesses=np.sort(np.concatenate(by_mask[mask])),
                complement_definable=complement in by_mask,
            )
        )
    return result


def classify_complexity(
    runtimes: Sequence[int],
) -> Optional[ComplexityClass]:
    cls, _ = classify_with_reason(runtimes)
    return cls


def _root_multiplicity(
    charpoly: List[Fraction], root: Fraction
) -> Tuple[int, List[Fraction]]:
    """Exact multiplicity of a rational characteristic root.

    Repeatedly divides out (x - root) by synthetic division while the
    remainder is zero; returns the multiplicity and the deflated
    polynomial.  Exact arithmetic here matters: numeric root finders
    scatter a repeated root into a cluster whose members can stray
    outside the unit circle.
    """
    m = 0
    while len(charpoly) > 1:
        value = Fraction(0)
        for c in charpoly:
            value = value * root + c
        if value != 0:
            break
        quotient = []
        acc = Fraction(0)
        for c in charpoly[:-1]:
            acc = acc * root + c
            quotient.append(acc)
        charpoly = quotient
        m += 1
    return m, charpoly


def classify_with_reason(
    runtimes: Sequence[int],
) -> Tuple[Optional[ComplexityClass], str]:
    """Growth class of a runtime sequence; None when unclassifiable.

    An exact polynomial model of degree d gives O(n^d).  For an exact
    linear recurrence the characteristic roots decide: the multiplicity
    of root 1 sets the trend degree (a nonzero constant term raises the
    particular solution by one power of n) and the multiplicity of root
    -1 sets the degree of the alternating component.  A sequence whose
    alternation grows as fast as its trend never settles on one growth
    law and is tallied as O(Exp); subordinate alternation is absorbed
    and the class drops to the degree gap between the two.  Any residual
    root outside the unit circle, and any sequence without an exact
    model, falls back to a log-log slope estimate over the convergent
    positions, with slopes above 4.5 read as exponential.
    """
    positions = [
        (n, int(v)) for n, v in enumerate(runtimes) if v != -1
    ]
    values = [v for _, v in positions]
    if len(values) < 2:
        return None, "fewer than 2 convergent values"
    if all(v == values[0] for v in values):
        return ComplexityClass.O1, "constant"
    if len(values) < cleanser.MIN_SEGMENT:
        return _slope_classify(positions)
    model = cleanser.fit_sequence(values)
    if model is not None and model.family == "polynomial":
        degree = min(model.degree or 0, 4)
        return (
            ComplexityClass(degree),
            f"exact polynomial degree {model.degree}",
        )
    if model is not None and model.family == "linear_recurrence":
        r = model.order or 0
        charpoly = [Fraction(1)] + [
            -Fraction(w) for w in model.coefficients[:r]
        ]
        constant = model.coefficients[r]
        ones, charpoly = _root_multiplicity(charpoly, Fraction(1))
        negs, charpoly = _root_multiplicity(charpoly, Fraction(-1))
        repeated_unit = 0
        if len(charpoly) > 1:
            roots = np.roots([float(c) for c in charpoly])
            dominant = max(abs(z) for z in roots)
            if dominant > 1.0 + 1e-6:
                return _slope_classify(positions)
            unit = [z for z in roots if abs(abs(z) - 1.0) < 1e-6]
            for i, z in enumerate(unit):
                if any(abs(z - w) < 1e-3 for w in unit[i + 1 :]):
                    repeated_unit = 2
        trend = ones + (1 if constant != 0 else 0) - 1
        alternation = max(negs, repeated_unit) - 1
        if alternation >= 1 and alternation >= trend:
            return (
                ComplexityClass.OExp,
                f"alternating component of degree {alternation} "
                f"matches the trend",
            )
        degree = trend - max(alternation, 0)
        return (
            ComplexityClass(min(max(degree, 0), 4)),
            f"recurrence trend degree {trend}"
            + (f" over alternation degree {alternation}" if alternation >= 1 else ""),
        )
    return _slope_classify(positions)


def _slope_classify(
    positions: List[Tuple[int, int]],
) -> Tuple[Optional[ComplexityClass], str]:
    pts = [(n, v) for n, v in positions if n >= 1 and v >= 1]
    if len(pts) < 2:
        return None, "too few points for slope estimate"
    xs = np.log([p[0] for p in pts])
    ys = np.log([p[1] for p in pts])
    slope = float(np.polyfit(xs, ys, 1)[0])
    if slope > 4.5:
        return ComplexityClass.OExp, f"log-log slope {slope:.3g}"
    degree = min(max(int(round(slope)), 1), 4)
    return ComplexityClass(degree), f"log-log slope {slope:.3g}"


@dataclass(frozen=True)
class FunctionOverview:
    outputs: Tuple[int, ...]
    member_count: int
    algorithm_count: int
    mean_runtimes: Tuple[Optional[float], ...]
    mean_spaces: Tuple[Optional[float], ...]
    harmonic_mean_runtimes: Tuple[Optional[float], ...]
    harmonic_mean_spaces_plus2: Tuple[Optional[float], ...]
    alternating_divergence: bool


def function_overview(fp: FunctionProfile) -> FunctionOverview:
    """Per-input resource statistics over a function's algorithms.

    Arithmetic means of runtimes and spaces, harmonic mean of runtimes,
    and harmonic mean of spaces computed on space+2; divergent entries
    are excluded throughout.
    """
    mean_rt: List[Optional[float]] = []
    mean_sp: List[Optional[float]] = []
    harm_rt: List[Optional[float]] = []
    harm_sp: List[Optional[float]] = []
    for b in range(INPUT_COUNT):
        rts = [a.runtimes[b] for a in fp.algorithms if a.runtimes[b] != -1]
        sps = [a.spaces[b] for a in fp.algorithms if a.spaces[b] != -1]
        mean_rt.append(sum(rts) / len(rts) if rts else None)
        mean_sp.append(sum(sps) / len(sps) if sps else None)
        harm_rt.append(len(rts) / sum(1 / t for t in rts) if rts else None)
        harm_sp.append(
            len(sps) / sum(1 / (s + 2) for s in sps) if sps else None
        )
    conv = [v != -1 for v in fp.outputs]
    evens = all(conv[i] == (i % 2 == 0) for i in range(INPUT_COUNT))
    odds = all(conv[i] == (i % 2 == 1) for i in range(INPUT_COUNT))
    return FunctionOverview(
        outputs=fp.outputs,
        member_count=fp.member_count,
        algorithm_count=len(fp.algorithms),
        mean_runtimes=tuple(mean_rt),
        mean_spaces=tuple(mean_sp),
        harmonic_mean_runtimes=tuple(harm_rt),
        harmonic_mean_spaces_plus2=tuple(harm_sp),
        alternating_divergence=evens or odds,
    )


def _seq_str(values: Iterable[int]) -> str:
    return " ".join(str(v) for v in values)


def export_functions_csv(functions: Sequence[FunctionProfile]) -> str:
    lines = ["outputs,member_count,algorithm_count"]
    for f in functions:
        lines.append(f"\"{_seq_str(f.outputs)}\",{f.member_count},{len(f.algorithms)}")
    return "\n".join(lines) + "\n"


def export_algorithms_csv(algorithms: Sequence[AlgorithmProfile]) -> str:
    lines = ["outputs,runtimes,spaces,member_count"]
    for a in algorithms:
        lines.append(
            f"\"{_seq_str(a.outputs)}\",\"{_seq_str(a.runtimes)}\","
            f"\"{_seq_str(a.spaces)}\",{a.member_count}"
        )
    return "\n".join(lines) + "\n"


def export_histogram_csv(hist: HaltingHistogram) -> str:
    lines = ["runtime,count"]
    if hist.counts:
        top = max(hist.counts)
        if top <= 10_000:
            for rt in range(1, top + 1):
                lines.append(f"{rt},{hist.counts.get(rt, 0)}")
        else:
            for rt in sorted(hist.counts):
                lines.append(f"{rt},{hist.counts[rt]}")
    return "\n".join(lines) + "\n"


def export_census_csv(census: Sequence[Tuple[Tuple[int, ...], int]]) -> str:
    lines = ["runtimes,machine_count"]
    for row, count in census:
        lines.append(f"\"{_seq_str(row)}\",{count}")
    return "\n".join(lines) + "\n"


def export_definable_sets_csv(sets: Sequence[DefinableSet]) -> str:
    lines = ["inputs,witness_count,complement_definable"]
    for s in sets:
        inputs = " ".join(str(i) for i in sorted(s.inputs))
        lines.append(f"\"{inputs}\",{s.witnesses.shape[0]},{int(s.complement_definable)}")
    return "\n".join(lines) + "\n"


def export_overview_csv(overviews: Sequence[FunctionOverview]) -> str:
    lines = [
        "outputs,member_count,algorithm_count,mean_runtimes,harmonic_runtimes,"
        "mean_spaces,harmonic_spaces_plus2,alternating_divergence"
    ]

    def fmt(seq: Sequence[Optional[float]]) -> str:
        return " ".join("-" if v is None else f"{v:.6g}" for v in seq)

    for o in overviews:
        lines.append(
            f"\"{_seq_str(o.outputs)}\",{o.member_count},{o.algorithm_count},"
            f"\"{fmt(o.mean_runtimes)}\",\"{fmt(o.harmonic_mean_runtimes)}\","
            f"\"{fmt(o.mean_spaces)}\",\"{fmt(o.harmonic_mean_spaces_plus2)}\","
            f"{int(o.alternating_divergence)}"
        )
    return "\n".join(lines) + "\n"


def _svg_document(width: int, height: int, body: List[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def svg_histogram(hist: HaltingHistogram, width: int = 800, height: int = 400) -> str:
    """Log-scaled scatter of runtime occurrence counts."""
    margin = 50
    pts = sorted((rt, c) for rt, c in hist.counts.items() if c > 0)
    body = [
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - 10}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="10" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    if pts:
        max_rt = max(math.log10(rt) for rt, _ in pts) or 1.0
        max_c = max(math.log10(c) for _, c in pts) or 1.0
        for rt, c in pts:
            x = margin + (width - margin - 10) * (math.log10(rt) / max_rt if max_rt else 0)
            y = (height - margin) - (height - margin - 10) * (
                math.log10(c) / max_c if max_c else 0
            )
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="steelblue"/>')
    body.append(
        f'<text x="{width // 2}" y="{height - 12}" font-size="12" '
        f'text-anchor="middle">runtime (log scale)</text>'
    )
    return _svg_document(width, height, body)


def svg_census(
    census: Sequence[Tuple[Tuple[int, ...], int]],
    top: int = 20,
    width: int = 800,
    height: int = 400,
) -> str:
    """Bar chart of the most frequent runtime sequences."""
    margin = 50
    rows = list(census[:top])
    body = [f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if rows:
        max_c = max(c for _, c in rows)
        bar_w = (width - margin - 10) / len(rows)
        for i, (_, c) in enumerate(rows):
            h = (height - margin - 10) * (c / max_c)
            x = margin + i * bar_w
            y = (height - margin) - h
            body.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w * 0.8:.2f}" '
                f'height="{h:.2f}" fill="steelblue"/>'
            )
    body.append(
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - 10}" '
        f'y2="{height - margin}" stroke="black"/>'
    )
    body.append(
        f'<text x="{width // 2}" y="{height - 12}" font-size="12" '
        f'text-anchor="middle">runtime sequences by machine count</text>'
    )
    return _svg_document(width, height, body)
