import gzip
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from tmspace import harness
from tmspace.rulecodec import SpaceParams, decode
from tmspace.simulator import run

P22 = SpaceParams(2, 2)
SOME_RULES = tuple(range(0, 4096, 131)) + (378, 1351, 2240, 2205)


def small_spec(path: Path, bound: int = 1000, rules=SOME_RULES) -> harness.BatchSpec:
    return harness.BatchSpec(
        params=P22,
        step_bound=bound,
        machine_set=harness.ExplicitList(tuple(rules)),
        output_path=str(path),
    )


def store_digest(store: harness.RunStore) -> str:
    h = hashlib.sha256()
    for name in sorted(p.name for p in Path(store.path).iterdir()):
        h.update(name.encode())
        h.update((Path(store.path) / name).read_bytes())
    return h.hexdigest()


def test_spec_validation():
    with pytest.raises(ValueError):
        harness.BatchSpec(params=P22, inputs=())
    with pytest.raises(ValueError):
        harness.BatchSpec(params=P22, inputs=(3, 2))
    with pytest.raises(ValueError):
        harness.BatchSpec(params=P22, step_bound=0)
    with pytest.raises(ValueError):
        harness.BatchSpec(params=P22, step_bound=2**31)


def test_records_match_reference_simulator(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s"))
    seen = 0
    for record in store.records():
        expected = run(decode(record.rule_number, P22), record.input, 1000)
        assert record.halted == expected.halted
        assert record.runtime == expected.runtime
        assert record.space == expected.space
        assert record.output_value == expected.output_value
        seen += 1
    assert seen == len(SOME_RULES) * 21


def test_store_is_byte_deterministic(tmp_path):
    a = harness.run_space(small_spec(tmp_path / "a"))
    b = harness.run_space(small_spec(tmp_path / "b"))
    assert store_digest(a) == store_digest(b)


def test_jobs_do_not_change_bytes(tmp_path):
    a = harness.run_space(small_spec(tmp_path / "a"), jobs=1)
    b = harness.run_space(small_spec(tmp_path / "b"), jobs=2)
    assert store_digest(a) == store_digest(b)


def test_resume_rebuilds_missing_shards_identically(tmp_path):
    first = harness.run_space(small_spec(tmp_path / "s"))
    digest = store_digest(first)
    shard = Path(first.path) / first.metadata["shards"][0]["file"]
    shard.unlink()
    assert not first.is_complete()
    again = harness.run_space(small_spec(tmp_path / "s"))
    assert again.is_complete()
    assert store_digest(again) == digest


def test_resume_leaves_finished_shards_untouched(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s"))
    shard = Path(store.path) / store.metadata["shards"][0]["file"]
    before = shard.stat().st_mtime_ns
    harness.run_space(small_spec(tmp_path / "s"))
    assert shard.stat().st_mtime_ns == before


def test_run_space_refuses_conflicting_metadata(tmp_path):
    harness.run_space(small_spec(tmp_path / "s", bound=1000))
    with pytest.raises(ValueError):
        harness.run_space(small_spec(tmp_path / "s", bound=2000))


def test_shard_csv_format(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s"))
    shard = Path(store.path) / store.metadata["shards"][0]["file"]
    lines = gzip.decompress(shard.read_bytes()).decode().splitlines()
    assert len(lines) == len(SOME_RULES) * 21
    # rule 0 never halts: full -1 sentinel row
    assert lines[0] == "0,0,0,-1,-1,-1"
    for line in lines:
        rule, inp, halted, rt, sp, bits = line.split(",")
        if halted == "0":
            assert (rt, sp, bits) == ("-1", "-1", "-1")
        else:
            assert int(rt) > 0 and set(bits) <= {"0", "1"}


def test_columnar_round_trip(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s"))
    rules, runtimes, spaces, outs, wide = store.columnar()
    assert rules.shape[0] == len(SOME_RULES)
    by_rule = {int(r): i for i, r in enumerate(rules)}
    record = run(decode(378, P22), 5, 1000)
    i = by_rule[378]
    assert runtimes[i, 5] == record.runtime
    assert spaces[i, 5] == record.space
    assert outs[i, 5] == record.output_value


def test_columnar_recovers_wide_outputs(tmp_path):
    spec = small_spec(tmp_path / "s", rules=(1536,))
    store = harness.run_space(spec)
    rules, runtimes, spaces, outs, wide = store.columnar()
    assert outs[0, 20] == (1 << 21) - 1
    # inputs above 62 overflow an int64 output; force one through
    wide_spec = harness.BatchSpec(
        params=P22,
        inputs=(63,),
        machine_set=harness.ExplicitList((1536,)),
        output_path=str(tmp_path / "w"),
    )
    wstore = harness.run_space(wide_spec)
    wrules, wrt, wsp, wouts, wwide = wstore.columnar()
    assert wouts[0, 0] == harness._kernels.OUT_WIDE
    assert wwide[(1536, 63)] == (1 << 64) - 1


def test_rerun_subset_confirms_halted_records(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s"))
    deeper = harness.rerun_subset(store, [378, 2240], 10**6, str(tmp_path / "d"))
    rules, runtimes, spaces, outs, wide = deeper.columnar()
    assert list(rules) == [378, 2240]
    # 378 is censored at bound 1000 from input 9 on; the deep run fills it
    assert runtimes[0, 9] == 2**12 - 3
    assert runtimes[0, 5] == 253


def test_rerun_subset_rejects_lower_bound(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s"))
    with pytest.raises(ValueError):
        harness.rerun_subset(store, [378], 999, str(tmp_path / "d"))


def test_rerun_subset_detects_tampered_history(tmp_path):
    store = harness.run_space(small_spec(tmp_path / "s", rules=(2240,)))
    cache = Path(store.path) / "shard-00000.npz"
    data = dict(np.load(cache))
    data["runtimes"][0, 0] = 7  # the true value is 5
    with open(cache, "wb") as fh:
        np.savez(fh, **data)
    tampered = harness.RunStore(store.path)
    with pytest.raises(RuntimeError, match="monotonicity"):
        harness.rerun_subset(tampered, [2240], 2000, str(tmp_path / "d"))


def test_sampling_is_seed_reproducible(tmp_path):
    a = harness.sample_space(P22, 64, 11, str(tmp_path / "a"), step_bound=200)
    b = harness.sample_space(P22, 64, 11, str(tmp_path / "b"), step_bound=200)
    c = harness.sample_space(P22, 64, 12, str(tmp_path / "c"), step_bound=200)
    assert store_digest(a) == store_digest(b)
    assert store_digest(a) != store_digest(c)
    meta = json.loads((Path(a.path) / "sample.json").read_text())
    assert meta["count"] == 64 and meta["seed"] == 11


def test_sampling_drop_trivial_removes_one_step_machines(tmp_path):
    kept = harness.sample_space(
        P22, 256, 5, str(tmp_path / "k"), drop_trivial=True, step_bound=200
    )
    rules, runtimes, spaces, outs, wide = kept.columnar()
    assert rules.size > 0
    assert not (runtimes == 1).all(axis=1).any()


def test_sampling_target_filter(tmp_path):
    # keep only machines agreeing with the tape identity wherever they halt
    identity = [(1 << (x + 1)) - 1 for x in range(21)]
    kept = harness.sample_space(
        P22,
        512,
        3,
        str(tmp_path / "t"),
        target_functions=[identity],
        step_bound=200,
    )
    rules, runtimes, spaces, outs, wide = kept.columnar()
    assert rules.size > 0
    for i in range(rules.shape[0]):
        conv = outs[i] != -1
        assert conv.any()
        assert (outs[i][conv] == np.asarray(identity, dtype=np.int64)[conv]).all()
