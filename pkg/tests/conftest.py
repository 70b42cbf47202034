import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from seqplic import notched_cube, regular_dodecahedron, unit_cube

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Remember an acceptance verdict; an earlier failure is never overwritten."""
    prev = ACCEPTANCE.get(number)
    if prev is not None and not prev[0]:
        return
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


SHAPES = {
    "cube": unit_cube(),
    "dodecahedron": regular_dodecahedron(),
    "notched": notched_cube(),
}


@pytest.fixture(scope="session")
def cube():
    return SHAPES["cube"]


@pytest.fixture(scope="session")
def dodecahedron():
    return SHAPES["dodecahedron"]


@pytest.fixture(scope="session")
def notched():
    return SHAPES["notched"]


@pytest.fixture(params=sorted(SHAPES))
def shape(request):
    return SHAPES[request.param]


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
