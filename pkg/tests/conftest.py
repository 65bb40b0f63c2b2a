import pytest

from matchbound.frecursion import FParams


@pytest.fixture(scope="session")
def fp_half():
    return FParams(0.5, 0.6)


@pytest.fixture(scope="session")
def star():
    from matchbound.frontier import compute_gamma_star
    return compute_gamma_star(1e-6)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def add(number: int, title: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} "
                                f"{title}: {detail}")
        return passed
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
