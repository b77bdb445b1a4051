import os
from pathlib import Path

import pytest

from tmspace import analyzer, harness
from tmspace.rulecodec import SpaceParams

# Stores are expensive to build, so they live outside the test tree and
# are reused across sessions.  run_space resumes finished shards, so a
# fixture is a no-op when its store is already complete.
DATA_DIR = Path(
    os.environ.get(
        "TMSPACE_DATA_DIR", str(Path(__file__).resolve().parent.parent / ".data")
    )
)


def _full_space_store(params: SpaceParams, name: str) -> harness.RunStore:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    spec = harness.BatchSpec(params=params, output_path=str(DATA_DIR / name))
    return harness.run_space(spec)


@pytest.fixture(scope="session")
def store22() -> harness.RunStore:
    return _full_space_store(SpaceParams(2, 2), "st22")


@pytest.fixture(scope="session")
def store32() -> harness.RunStore:
    # ~3 million machines; hours on one core when the cache is cold.
    return _full_space_store(SpaceParams(3, 2), "st32")


@pytest.fixture(scope="session")
def analysis22(store22) -> analyzer.SpaceAnalysis:
    return analyzer.analyze(store22)


@pytest.fixture(scope="session")
def analysis32(store32) -> analyzer.SpaceAnalysis:
    return analyzer.analyze(store32)


@pytest.fixture(scope="session")
def twins_store(store32) -> harness.RunStore:
    return harness.rerun_subset(
        store32, [599063, 666364], 10**9, str(DATA_DIR / "twins32")
    )
