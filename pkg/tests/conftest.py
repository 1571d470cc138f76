from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from anytime_hc import BinaryHierarchy, Dataset
from anytime_hc.data_io import gen_uniform_square

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def d4() -> Dataset:
    """1-D points {0, 1, 3, 7} labelled 1..4."""
    return Dataset.from_array([[0.0], [1.0], [3.0], [7.0]])


@pytest.fixture
def hac_d4_tree() -> BinaryHierarchy:
    return BinaryHierarchy.from_nested((((1, 2), 3), 4))


@pytest.fixture(scope="session")
def counterexamples() -> dict:
    return json.loads((FIXTURES / "counterexamples.json").read_text())


def random_dataset(rng: np.random.Generator, n: int, dim: int = 2, dissimilarity: str = "euclidean") -> Dataset:
    return Dataset.from_array(rng.normal(size=(n, dim)), dissimilarity)


def generic_dataset(rng: np.random.Generator, n: int) -> Dataset:
    return gen_uniform_square(n, rng)


def random_partition(rng: np.random.Generator, labels, parts: int) -> list[frozenset]:
    """Split a random subset of ``labels`` into ``parts`` non-empty disjoint clusters."""
    labels = list(labels)
    k = int(rng.integers(parts, len(labels) + 1))
    chosen = rng.permutation(labels)[:k]
    cuts = np.sort(rng.choice(np.arange(1, k), parts - 1, replace=False))
    return [frozenset(int(i) for i in s) for s in np.split(chosen, cuts)]


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Recorder for the one-line verdicts printed after the acceptance run."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(line: str) -> None:
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
