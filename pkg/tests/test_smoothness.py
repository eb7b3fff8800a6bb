import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import steps
from dyadrep import (
    DyadicStep,
    ExpOrlicz,
    LogPower,
    Lorentz,
    Lp,
    Orlicz,
    Power,
    PreconditionError,
    SlowLog,
    UnsupportedDualError,
    inner,
    lorentz_witness,
    min_over_lambda,
    smoothness_probe,
)
from dyadrep.smoothness import witness_interval

BOX = DyadicStep([2.0, 0.0])
ONE = DyadicStep([1.0])


def test_unit_generator():
    m = min_over_lambda(Lp(2.0), ONE)
    assert m.lam == pytest.approx(1.0, abs=1e-9)
    assert m.value == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_box_value(p):
    assert min_over_lambda(Lp(p), BOX).value == pytest.approx(2.0 ** (-1.0 / p), rel=1e-12)


@pytest.mark.parametrize("space", [Lp(1.0), Lp(2.5), Lorentz(Power(2.0)), Orlicz(ExpOrlicz(1.0))])
@settings(max_examples=20)
@given(f=steps(max_rank=3))
def test_value_never_exceeds_one(space, f):
    assert min_over_lambda(space, f, tol=1e-9).value <= 1.0


@pytest.mark.parametrize("space", [Lp(1.0), Lp(3.0), Lorentz(Power(2.0)), Lorentz(SlowLog())])
@given(f=steps(max_rank=3), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_convex_in_lambda(space, f, a, b):
    def g(lam):
        return space.norm(DyadicStep(1.0 - lam * f.values))

    assert g(0.5 * (a + b)) <= 0.5 * (g(a) + g(b)) + 1e-12


def test_subnormal_generator():
    m = min_over_lambda(Lp(2.5), DyadicStep([2.2250738585e-313]))
    assert m.value <= 1e-12
    assert m.lam == float("inf")
    tiny = min_over_lambda(Lp(2.0), DyadicStep([2e-300, 0.0]))
    assert tiny.lam == pytest.approx(5e299, rel=1e-6)  # smooth minimum: lam to ~sqrt(eps)
    assert tiny.value == pytest.approx(2.0**-0.5, rel=1e-12)


def test_witness_integrals():
    w = lorentz_witness(Power(2.0))
    assert list(w.values) == [-2.0, 1.0, 1.0, 1.0]
    assert w.integral() == 0.25
    # phi' cell averages are exact on quarters: <f, phi'> = -c phi(1/4) + 1 - phi(1/4)
    assert inner(w, Power(2.0).derivative_averages(2)) == pytest.approx(-0.5, abs=1e-15)
    assert inner(lorentz_witness(Power(2.0), c=2.0), Power(2.0).derivative_averages(10)) == pytest.approx(-0.5, abs=1e-13)


def test_witness_interval_power_two():
    assert witness_interval(Power(2.0), 0.25) == (1.0, 3.0)


@pytest.mark.parametrize("phi", [Power(2.0), Power(4.0), SlowLog(), LogPower(1.0)])
def test_witness_is_not_approximable(phi):
    space = Lorentz(phi)
    w = lorentz_witness(phi)
    assert w.integral() > 0
    assert inner(w, phi.derivative_averages(12)) < 0
    m = min_over_lambda(space, w, scan_width=1e3)
    assert m.value >= 1.0 - 1e-9


def test_no_witness_in_l1():
    with pytest.raises(PreconditionError):
        lorentz_witness(Power(1.0))
    with pytest.raises(PreconditionError):
        lorentz_witness(Power(2.0), c=3.5)
    with pytest.raises(PreconditionError):
        lorentz_witness(Power(2.0), u=1.0)


def test_lorentz_is_not_smooth_at_one():
    for phi in (Power(2.0), SlowLog()):
        rep = smoothness_probe(Lorentz(phi), [ONE, phi.derivative_averages(12)])
        assert rep.non_smooth
        assert rep.norming == [0, 1]


def test_same_function_twice_is_not_two_functionals():
    rep = smoothness_probe(Lorentz(Power(2.0)), [ONE, DyadicStep([1.0, 1.0])])
    assert not rep.non_smooth


def test_l2_is_smooth():
    cands = [ONE, Power(2.0).derivative_averages(8), DyadicStep([1.5, 0.5])]
    rep = smoothness_probe(Lp(2.0), cands)
    assert rep.norming == [0]
    assert not rep.non_smooth


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_lp_random_candidates_not_flagged(p):
    rng = np.random.default_rng(9)
    cands = [ONE]
    for _ in range(20):
        v = rng.exponential(size=16)
        cands.append(DyadicStep(v / v.mean()))
    # Hoelder equality forces y = 1 once <1, y> = ||y||_q = 1
    assert not smoothness_probe(Lp(p), cands).non_smooth


def test_probe_needs_dual():
    with pytest.raises(UnsupportedDualError):
        smoothness_probe(Orlicz(ExpOrlicz(1.0)), [ONE])
