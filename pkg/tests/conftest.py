import pytest

from ecbrake.model import OperatingPoint, TorqueModel


@pytest.fixture
def model():
    """Default design: b = 30 mm, w_m = 110 mm, 30 x 30 harmonics."""
    return TorqueModel()


@pytest.fixture
def rpm():
    def make(speed, convention="rad_s"):
        return OperatingPoint(speed, convention)

    return make


def rel(a, b):
    return abs(a - b) / abs(b)


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[criterion]
        verdict = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        details = "; ".join(f"{'ok' if ok else 'FAILED'}: {d}" for ok, d in checks)
        terminalreporter.write_line(f"{criterion} {verdict} | {details}")
