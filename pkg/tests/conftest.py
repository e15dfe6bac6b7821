import functools

import pytest

from hallot import _kernels
from hallot.mechanisms import (
    COUNTEREXAMPLES,
    all_hierarchies,
    all_priorities,
    counterexample,
    materialize,
    sd_mechanism,
    seqd_mechanism,
)
from hallot.search import random_tables


@functools.lru_cache(maxsize=None)
def corpus3():
    """Serial, sequential, counterexample and random tables at n=3."""
    tables = [materialize(sd_mechanism(p), 3) for p in all_priorities(3)]
    tables += [materialize(seqd_mechanism(h), 3) for h in all_hierarchies(3)]
    tables += [materialize(counterexample(name), 3) for name in COUNTEREXAMPLES]
    tables += random_tables(3, 4, seed=7)
    return tuple(tables)


@pytest.fixture(scope="session")
def corpus():
    return corpus3()


@pytest.fixture
def backend():
    """Restore the kernel backend after a test switches it."""
    before = _kernels.backend_name()
    yield _kernels
    _kernels.set_backend(before)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
