import numpy as np
import pytest
from hypothesis import given, settings

from conftest import steps
from dyadrep import DyadicStep, ExpOrlicz, Lorentz, Lp, Orlicz, Power, PreconditionError, SlowLog, WeightedStep
from dyadrep.multiplicator import (
    indicator_ratios,
    lorentz_membership,
    multiplicator_lower,
    multiplicator_upper,
    tensor_ratio,
    trend_verdict,
)

SPACES = [Lp(1.0), Lp(2.0), Lorentz(Power(2.0)), Lorentz(SlowLog()), Orlicz(ExpOrlicz(1.0))]


@pytest.mark.parametrize("space", SPACES)
def test_unit_function_has_multiplicator_norm_one(space):
    value, _ = multiplicator_lower(space, DyadicStep([1.0]))
    assert value == pytest.approx(1.0, abs=1e-12)
    est = multiplicator_upper(space, DyadicStep([1.0]), budget=60)
    assert est.upper == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("space", SPACES)
@settings(max_examples=25)
@given(f=steps(max_rank=4))
def test_lower_bound_dominates_norm(space, f):
    value, _ = multiplicator_lower(space, f, grid_rank=6, n_random=2)
    assert value >= space.norm(f) * (1 - 1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_lp_fubini(p):
    # the tensor ratio is identically ||f||_p
    rng = np.random.default_rng(7)
    for _ in range(100):
        f = DyadicStep(rng.standard_normal(8))
        u = DyadicStep(np.abs(rng.standard_normal(16)))
        assert tensor_ratio(Lp(p), f, u) == pytest.approx(Lp(p).norm(f), rel=1e-12)
        est = multiplicator_upper(Lp(p), f)
        assert abs(est.lower - Lp(p).norm(f)) <= 1e-9
        assert abs(est.upper - Lp(p).norm(f)) <= 1e-9


@settings(max_examples=25)
@given(f=steps(max_rank=4))
def test_monotone_in_modulus(f):
    g = DyadicStep(np.abs(f.values) * 1.5 + 0.1)
    space = Lorentz(Power(2.0))
    assert multiplicator_lower(space, f, grid_rank=6)[0] <= multiplicator_lower(space, g, grid_rank=6)[0] + 1e-12


def test_power_lorentz_ratio_is_scale_free():
    # for phi = t^(1/q), ||sigma_t f||_Lambda = phi(t) ||f||_Lambda
    f = DyadicStep.power(0.3, 10)
    r = indicator_ratios(Lorentz(Power(2.0)), f, 12)
    assert np.allclose(r, Lorentz(Power(2.0)).norm(f), rtol=1e-12)


def test_upper_never_below_lower():
    f = DyadicStep([3.0, 1.0, 0.5, 0.25])
    for space in SPACES:
        est = multiplicator_upper(space, f, budget=100, seed=3)
        assert est.lower <= est.upper + 1e-9
        assert est.to_dict()["iterations"] <= 100 + 4 * 16


def test_upper_is_reproducible():
    f = DyadicStep([3.0, -1.0, 0.5, 2.0])
    a = multiplicator_upper(Lorentz(SlowLog()), f, budget=80, seed=11)
    b = multiplicator_upper(Lorentz(SlowLog()), f, budget=80, seed=11)
    assert a.to_dict() == b.to_dict()


def test_upper_stabilizes_under_budget_doubling():
    f = DyadicStep.power(0.25, 8)
    space = Lorentz(Power(2.0))
    a = multiplicator_upper(space, f, budget=100).upper
    b = multiplicator_upper(space, f, budget=200).upper
    assert b == pytest.approx(a, rel=1e-3)


def test_membership_unit_curve():
    rep = lorentz_membership(Power(2.0), DyadicStep([1.0]), grid_rank=8)
    assert all(r == pytest.approx(1.0, abs=1e-14) for _, r in rep.curve)
    assert rep.verdict == "bounded"


def test_membership_power_member():
    assert lorentz_membership(Power(2.0), DyadicStep.power(0.25, 14)).verdict == "bounded"


def test_membership_heavy_tail_grows():
    f = WeightedStep.shells((1.0 + np.arange(1000)) ** 0.9, 1001.0**0.9)
    rep = lorentz_membership(SlowLog(), f)
    assert rep.verdict == "growing"
    assert rep.to_csv().splitlines()[0] == "j,ratio"


def test_membership_rejects_non_decreasing():
    with pytest.raises(PreconditionError):
        lorentz_membership(Power(2.0), DyadicStep([0.0, 1.0]))
    with pytest.raises(PreconditionError):
        lorentz_membership(Power(2.0), DyadicStep([1.0, -1.0]))


def test_trend_verdict():
    assert trend_verdict([3.0, 2.0, 1.0]) == "bounded"
    assert trend_verdict([1.0, 2.0, 3.0, 3.001, 3.002, 3.003]) == "bounded"
    assert trend_verdict([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]) == "growing"
