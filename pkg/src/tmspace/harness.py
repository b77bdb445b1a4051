"""Batch execution over machine spaces and persistent run storage.

A RunStore is a directory:

    metadata.json         space, bound, inputs, machine set, shard list
    shard-00000.csv.gz    rows: rule_number,input,halted,runtime,space,output_bits
    shard-00000.npz       columnar cache of the same rows (derived data)
    wide-00000.json       exact bit-strings for outputs wider than 62 bits

output_bits is the final tape as a big-endian bit-string with leading
zeros stripped ("0" for an all-blank tape); divergent records carry -1
in the runtime, space, and output_bits columns.  Rows are ordered by
(rule_number, input) regardless of how the work was scheduled, shards
are written atomically, and finished shards are skipped on resume, so
an interrupted run can be restarted without losing or changing work.
Gzip members carry no timestamps; rerunning a spec reproduces stores
byte for byte.
"""

from __future__ import annotations

import gzip
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .rulecodec import SpaceParams, space_size
from .simulator import RunRecord

SCHEMA_VERSION = 1
DEFAULT_INPUTS = tuple(range(21))
DEFAULT_BOUND = 1000
SHARD_SIZE = 1 << 16


@dataclass(frozen=True)
class AllMachines:
    kind: str = "all"


@dataclass(frozen=True)
class ExplicitList:
    rules: Tuple[int, ...]
    kind: str = "list"


@dataclass(frozen=True)
class RandomSample:
    count: int
    seed: int
    kind: str = "sample"


MachineSet = Union[AllMachines, ExplicitList, RandomSample]


@dataclass(frozen=True)
class BatchSpec:
    """Everything needed to (re)produce one batch of runs."""

    params: SpaceParams
    inputs: Tuple[int, ...] = DEFAULT_INPUTS
    step_bound: int = DEFAULT_BOUND
    machine_set: MachineSet = field(default_factory=AllMachines)
    output_path: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("inputs must be non-empty")
        if any(b <= a for a, b in zip(self.inputs, self.inputs[1:])):
            raise ValueError("inputs must be strictly increasing")
        if self.step_bound < 1:
            raise ValueError("step_bound must be >= 1")
        if self.step_bound > 2**31 - 1:
            raise ValueError("step_bound exceeds the int32 runtime column")


def _resolve_rules(spec: BatchSpec) -> np.ndarray:
    ms = spec.machine_set
    if isinstance(ms, AllMachines):
        return np.arange(space_size(spec.params), dtype=np.int64)
    if isinstance(ms, ExplicitList):
        rules = np.unique(np.asarray(ms.rules, dtype=np.int64))
        size = space_size(spec.params)
        if rules.size and (rules[0] < 0 or rules[-1] >= size):
            raise ValueError(f"rule number out of range for a space of {size} machines")
        return rules
    if isinstance(ms, RandomSample):
        rng = np.random.Generator(np.random.Philox(ms.seed))
        size = space_size(spec.params)
        return rng.integers(0, size, size=ms.count, dtype=np.int64)
    raise TypeError(f"unknown machine set {ms!r}")


def _machine_set_meta(ms: MachineSet) -> Dict:
    if isinstance(ms, AllMachines):
        return {"kind": "all"}
    if isinstance(ms, ExplicitList):
        return {"kind": "list", "rules": [int(r) for r in ms.rules]}
    if isinstance(ms, RandomSample):
        return {"kind": "sample", "count": ms.count, "seed": ms.seed}
    raise TypeError(f"unknown machine set {ms!r}")


def _bits_string(value: int) -> str:
    return format(value, "b") if value > 0 else "0"


def _shard_rows(
    rules: np.ndarray,
    inputs: Sequence[int],
    runtimes: np.ndarray,
    spaces: np.ndarray,
    outs: np.ndarray,
    wide: Dict[Tuple[int, int], str],
) -> str:
    rows: List[str] = []
    for a in range(rules.shape[0]):
        rule = rules[a]
        for b, inp in enumerate(inputs):
            rt = runtimes[a, b]
            if rt < 0:
                rows.append(f"{rule},{inp},0,-1,-1,-1")
            else:
                code = outs[a, b]
                bits = wide[(int(rule), inp)] if code == _kernels.OUT_WIDE else _bits_string(int(code))
                rows.append(f"{rule},{inp},1,{rt},{spaces[a, b]},{bits}")
    rows.append("")
    return "\n".join(rows)


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _gzip_bytes(payload: bytes) -> bytes:
    buf = io.BytesIO()
    with gzip.GzipFile(filename="", mode="wb", fileobj=buf, mtime=0) as fh:
        fh.write(payload)
    return buf.getvalue()


def _run_shard(
    states: int, rules: np.ndarray, inputs: np.ndarray, bound: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Dict[Tuple[int, int], str]]:
    n = rules.shape[0]
    runtimes = np.empty((n, len(inputs)), np.int32)
    spaces = np.empty((n, len(inputs)), np.int32)
    outs = np.empty((n, len(inputs)), np.int64)
    _kernels.run_batch(states, rules, inputs, bound, runtimes, spaces, outs)
    wide: Dict[Tuple[int, int], str] = {}
    for a, b in zip(*np.nonzero(outs == _kernels.OUT_WIDE)):
        rule = int(rules[a])
        inp = int(inputs[b])
        runtime, space, touched, tape = _kernels.run_single(states, rule, inp, bound)
        wide[(rule, inp)] = _bits_string(_kernels.output_value(tape, touched))
    return runtimes, spaces, outs, wide


class RunStore:
    """Read access to a store directory written by run_space and friends."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        meta_path = self.path / "metadata.json"
        if not meta_path.exists():
            raise FileNotFoundError(f"not a run store (no metadata.json): {self.path}")
        self.metadata = json.loads(meta_path.read_text())
        if self.metadata.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported store schema {self.metadata.get('schema_version')!r}"
            )

    @property
    def params(self) -> SpaceParams:
        return SpaceParams(self.metadata["states"], self.metadata["colors"])

    @property
    def inputs(self) -> Tuple[int, ...]:
        return tuple(self.metadata["inputs"])

    @property
    def step_bound(self) -> int:
        return self.metadata["step_bound"]

    def is_complete(self) -> bool:
        return all((self.path / s["file"]).exists() for s in self.metadata["shards"])

    def columnar(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, Dict[Tuple[int, int], int]]:
        """All records as arrays: rules, runtimes, spaces, output codes, wide values.

        Output codes follow the kernel encoding; entries equal to the wide
        marker have their exact value in the returned dict keyed by
        (rule_number, input).
        """
        rules_parts = []
        rt_parts = []
        sp_parts = []
        out_parts = []
        wide: Dict[Tuple[int, int], int] = {}
        for shard in self.metadata["shards"]:
            file = self.path / shard["file"]
            if not file.exists():
                raise FileNotFoundError(f"store is incomplete: missing {file.name}")
            cache = file.with_suffix("").with_suffix(".npz")
            if cache.exists():
                data = np.load(cache)
                rules_parts.append(data["rules"])
                rt_parts.append(data["runtimes"])
                sp_parts.append(data["spaces"])
                out_parts.append(data["outs"])
            else:
                r, rt, sp, outs, w = self._parse_shard(file)
                rules_parts.append(r)
                rt_parts.append(rt)
                sp_parts.append(sp)
                out_parts.append(outs)
                wide.update(w)
            wide_file = self.path / shard["file"].replace("shard-", "wide-").replace(
                ".csv.gz", ".json"
            )
            if wide_file.exists():
                for rule, inp, bits in json.loads(wide_file.read_text()):
                    wide[(rule, inp)] = int(bits, 2)
        return (
            np.concatenate(rules_parts),
            np.vstack(rt_parts),
            np.vstack(sp_parts),
            np.vstack(out_parts),
            wide,
        )

    def _parse_shard(self, file: Path):
        inputs = self.inputs
        ni = len(inputs)
        rules = []
        rt_rows = []
        sp_rows = []
        out_rows = []
        wide: Dict[Tuple[int, int], int] = {}
        with gzip.open(file, "rt") as fh:
            rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
        for start in range(0, len(rows), ni):
            block = rows[start : start + ni]
            rule = int(block[0][0])
            rules.append(rule)
            rt_rows.append([int(r[3]) for r in block])
            sp_rows.append([int(r[4]) for r in block])
            out_row = []
            for r in block:
                if r[5] == "-1":
                    out_row.append(-1)
                else:
                    value = int(r[5], 2)
                    if value.bit_length() > 63:  # does not fit an int64
                        wide[(rule, int(r[1]))] = value
                        value = _kernels.OUT_WIDE
                    out_row.append(value)
            out_rows.append(out_row)
        return (
            np.asarray(rules, dtype=np.int64),
            np.asarray(rt_rows, dtype=np.int32),
            np.asarray(sp_rows, dtype=np.int32),
            np.asarray(out_rows, dtype=np.int64),
            wide,
        )

    def records(self) -> Iterator[RunRecord]:
        """All records, (rule_number, input) ascending.

        Output tapes come back normalized: leading blank cells are not
        stored, so a tape compares equal to the simulator's only through
        its value.
        """
        bound = self.step_bound
        for shard in self.metadata["shards"]:
            file = self.path / shard["file"]
            with gzip.open(file, "rt") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rule_s, inp_s, halted_s, rt_s, sp_s, bits = line.split(",")
                    halted = halted_s == "1"
                    if halted:
                        value = int(bits, 2)
                        tape = tuple(int(c) for c in bits)
                    else:
                        value = -1
                        tape = None
                    yield RunRecord(
                        rule_number=int(rule_s),
                        input=int(inp_s),
                        halted=halted,
                        runtime=int(rt_s),
                        space=int(sp_s),
                        output_tape=tape,
                        output_value=value,
                        step_bound=bound,
                    )


def run_space(spec: BatchSpec, jobs: Optional[int] = None) -> RunStore:
    """Execute a batch spec, writing (or resuming) its store directory."""
    if spec.output_path is None:
        raise ValueError("spec.output_path is required")
    if spec.params.colors != 2:
        raise ValueError("only 2-color spaces are supported")
    if jobs is not None:
        import numba

        # results are schedule-independent, so clamping is safe
        numba.set_num_threads(min(max(1, jobs), numba.config.NUMBA_NUM_THREADS))
    out_dir = Path(spec.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    rules = _resolve_rules(spec)
    shards = [
        {
            "file": f"shard-{i:05d}.csv.gz",
            "first_rule": int(rules[lo]) if rules.size else 0,
            "machines": int(min(SHARD_SIZE, rules.size - lo)),
        }
        for i, lo in enumerate(range(0, max(rules.size, 1), SHARD_SIZE))
    ]
    metadata = {
        "schema_version": SCHEMA_VERSION,
        "states": spec.params.states,
        "colors": spec.params.colors,
        "step_bound": spec.step_bound,
        "inputs": list(spec.inputs),
        "machine_set": _machine_set_meta(spec.machine_set),
        "shard_size": SHARD_SIZE,
        "shards": shards,
    }
    meta_path = out_dir / "metadata.json"
    if meta_path.exists():
        existing = json.loads(meta_path.read_text())
        if existing != metadata:
            raise ValueError(
                f"{out_dir} already holds a store with a different spec; "
                "refusing to mix runs"
            )
    else:
        _write_atomic(meta_path, (json.dumps(metadata, indent=1) + "\n").encode())

    inputs_arr = np.asarray(spec.inputs, dtype=np.int64)
    for i, lo in enumerate(range(0, max(rules.size, 1), SHARD_SIZE)):
        shard_path = out_dir / shards[i]["file"]
        if shard_path.exists():
            continue
        chunk = rules[lo : lo + SHARD_SIZE]
        runtimes, spaces, outs, wide = _run_shard(
            spec.params.states, chunk, inputs_arr, spec.step_bound
        )
        wide_bits = {k: v for k, v in wide.items()}
        rows = _shard_rows(chunk, spec.inputs, runtimes, spaces, outs, wide_bits)
        cache_path = shard_path.with_suffix("").with_suffix(".npz")
        tmp_cache = cache_path.with_suffix(".npz.tmp")
        with open(tmp_cache, "wb") as fh:
            np.savez(fh, rules=chunk, runtimes=runtimes, spaces=spaces, outs=outs)
        os.replace(tmp_cache, cache_path)
        if wide_bits:
            wide_rows = [[rule, inp, bits] for (rule, inp), bits in sorted(wide_bits.items())]
            _write_atomic(
                out_dir / f"wide-{i:05d}.json", json.dumps(wide_rows).encode()
            )
        _write_atomic(shard_path, _gzip_bytes(rows.encode()))
    return RunStore(out_dir)


def rerun_subset(
    store: RunStore, machines: Sequence[int], new_bound: int, output_path: str
) -> RunStore:
    """Re-run chosen machines at a raised bound into a new store.

    Records that had already halted must come out identical; a changed
    halted record means the simulator is inconsistent and raises.
    """
    if new_bound < store.step_bound:
        raise ValueError(
            f"new bound {new_bound} is below the store's bound {store.step_bound}"
        )
    spec = BatchSpec(
        params=store.params,
        inputs=store.inputs,
        step_bound=new_bound,
        machine_set=ExplicitList(tuple(int(m) for m in machines)),
        output_path=output_path,
    )
    new_store = run_space(spec)
    o_rules, o_rt, o_sp, o_out, o_wide = store.columnar()
    n_rules, n_rt, n_sp, n_out, n_wide = new_store.columnar()
    idx = np.searchsorted(o_rules, n_rules)
    for a in range(n_rules.shape[0]):
        rule = int(n_rules[a])
        if idx[a] >= o_rules.shape[0] or o_rules[idx[a]] != rule:
            continue
        j = idx[a]
        for b, inp in enumerate(store.inputs):
            if o_rt[j, b] < 0:
                continue
            same = (
                o_rt[j, b] == n_rt[a, b]
                and o_sp[j, b] == n_sp[a, b]
                and o_out[j, b] == n_out[a, b]
            )
            if same and o_out[j, b] == _kernels.OUT_WIDE:
                same = o_wide.get((rule, inp)) == n_wide.get((rule, inp))
            if not same:
                raise RuntimeError(
                    f"bound monotonicity violated for machine {rule} input {inp}: "
                    f"runtime {o_rt[j, b]} -> {n_rt[a, b]}"
                )
    return new_store


def sample_space(
    params: SpaceParams,
    count: int,
    seed: int,
    output_path: str,
    target_functions: Optional[Sequence[Sequence[int]]] = None,
    drop_trivial: bool = False,
    step_bound: int = DEFAULT_BOUND,
) -> RunStore:
    """Seeded random sample of a space, optionally filtered.

    With target_functions given, only machines whose convergent outputs
    agree with some target on every convergent input (and on at least one)
    are kept.  drop_trivial removes machines that halt in one step on
    every input.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    spec = BatchSpec(
        params=params,
        step_bound=step_bound,
        machine_set=RandomSample(count=count, seed=seed),
        output_path=output_path + ".raw",
    )
    raw = run_space(spec)
    rules, runtimes, spaces, outs, wide = raw.columnar()
    keep = np.ones(rules.shape[0], dtype=bool)
    if drop_trivial:
        keep &= ~(runtimes == 1).all(axis=1)
    if target_functions is not None:
        matcher = _TargetMatcher(target_functions, raw.inputs)
        for a in range(rules.shape[0]):
            if keep[a]:
                keep[a] = matcher.matches(rules[a], outs[a], wide)
    kept_rules = np.unique(rules[keep])
    final = BatchSpec(
        params=params,
        step_bound=step_bound,
        machine_set=ExplicitList(tuple(int(r) for r in kept_rules)),
        output_path=output_path,
    )
    result = run_space(final)
    _write_atomic(
        Path(output_path) / "sample.json",
        (
            json.dumps(
                {"count": count, "seed": seed, "kept": int(kept_rules.size)}, indent=1
            )
            + "\n"
        ).encode(),
    )
    return result


class _TargetMatcher:
    def __init__(self, targets: Sequence[Sequence[int]], inputs: Sequence[int]):
        self.inputs = tuple(inputs)
        self.coded = []
        for t in targets:
            if len(t) != len(self.inputs):
                raise ValueError("target length does not match the input list")
            codes = [
                _kernels.OUT_WIDE if v >= 0 and int(v).bit_length() > 63 else int(v)
                for v in t
            ]
            self.coded.append((np.asarray(codes, dtype=np.int64), tuple(int(v) for v in t)))

    def matches(self, rule: int, out_row: np.ndarray, wide: Dict[Tuple[int, int], int]) -> bool:
        conv = out_row != -1
        if not conv.any():
            return False
        for codes, exact in self.coded:
            if not (codes[conv] == out_row[conv]).all():
                continue
            ok = True
            for b in np.nonzero(conv & (out_row == _kernels.OUT_WIDE))[0]:
                if wide.get((int(rule), self.inputs[b])) != exact[b]:
                    ok = False
                    break
            if ok:
                return True
        return False
