import itertools

import numpy as np
import pytest

from dtc.stream_io import CanonicalStream

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str, status: str | None = None) -> str:
    line = f"criterion {number:>2}: {status or ('PASS' if passed else 'FAIL')}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def k4_edges():
    return list(itertools.combinations([1, 2, 3, 4], 2))


def gnm_edges(n: int, m: int, seed: int) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    pick = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    return [pairs[i] for i in pick]


@pytest.fixture
def k4_stream():
    return CanonicalStream.from_edges(k4_edges())
