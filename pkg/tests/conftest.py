import random
import sys
from pathlib import Path

import pytest

from wdd.core import WeightedList

DATA = Path(__file__).parent / "data"

EXAMPLE_WEIGHTS = (5, 8, 7, 7, 8, 16, 25, 6)
# 1-based fragment numbers that must survive in the eight-fragment example
EXAMPLE_REQUIRED = frozenset({1, 3, 6, 7, 8})


def example_list() -> WeightedList:
    """The eight top-level fragments, ids 1..8 as in the example program."""
    from wdd.core import Element

    return WeightedList(Element(i + 1, w) for i, w in enumerate(EXAMPLE_WEIGHTS))


def superset_oracle(required):
    required = frozenset(required)

    def oracle(candidate):
        return required.issubset(e.id for e in candidate)

    return oracle


def random_monotone_case(rng: random.Random, max_n: int = 30, max_weight: int = 20):
    n = rng.randint(1, max_n)
    weights = [rng.randint(1, max_weight) for _ in range(n)]
    k = rng.randint(0, n)
    required = frozenset(rng.sample(range(n), k))
    return WeightedList.from_weights(weights), required


class CountingOracle:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, candidate):
        self.calls += 1
        return self.fn(candidate)


@pytest.fixture
def example_source() -> bytes:
    return (DATA / "example.c").read_bytes()


@pytest.fixture
def example() -> WeightedList:
    return example_list()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.summary_line(number))
