import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dyadrep import DyadicStep

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


finite = st.floats(min_value=-8.0, max_value=8.0, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def steps(draw, min_rank=0, max_rank=5, elements=finite):
    r = draw(st.integers(min_rank, max_rank))
    return DyadicStep(draw(st.lists(elements, min_size=1 << r, max_size=1 << r)))


@st.composite
def nonzero_mean_steps(draw, min_rank=0, max_rank=3):
    f = draw(steps(min_rank, max_rank))
    if abs(f.integral()) < 1e-3:
        f = f + 1.0
    if abs(f.integral()) < 1e-3:
        f = f + 1.0
    return f


def random_step(rng: np.random.Generator, rank: int, positive: bool = False) -> DyadicStep:
    v = rng.standard_normal(1 << rank)
    return DyadicStep(np.abs(v) if positive else v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
