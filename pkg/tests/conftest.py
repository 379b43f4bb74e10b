import numpy as np
import pytest

from vqpt.haar import SeededRng, haar_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def haar(rng):
    def draw(dim):
        return haar_unitary(dim, rng)
    return draw


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def seeded_haar(dim, seed, stream=0):
    return haar_unitary(dim, SeededRng(seed, stream))


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
