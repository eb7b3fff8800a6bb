import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import steps
from dyadrep import CellSum, DyadicStep, MultiIndex, RankError, SparseStep, coarsen, inner, integral, refine
from dyadrep.dyadic import dyadic_rank, max_rank


def test_rank_must_be_power_of_two():
    with pytest.raises(RankError):
        DyadicStep([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        DyadicStep([1.0, math.nan])


def test_values_are_read_only():
    x = DyadicStep([1.0, 2.0])
    with pytest.raises(ValueError):
        x.values[0] = 5.0


def test_rank_cap_from_environment(monkeypatch):
    monkeypatch.setenv("DYADREP_MAX_RANK", "3")
    assert max_rank() == 3
    with pytest.raises(RankError):
        DyadicStep.zeros(4)
    DyadicStep.zeros(3)


def test_bad_rank_cap_variable(monkeypatch):
    monkeypatch.setenv("DYADREP_MAX_RANK", "lots")
    with pytest.raises(RankError):
        max_rank()


def test_indicator_and_rank():
    x = DyadicStep.indicator(0.25, 0.75, 3.0)
    assert x.rank == 2
    assert list(x.values) == [0.0, 3.0, 3.0, 0.0]
    assert dyadic_rank(0.375) == 3
    assert dyadic_rank(1.0) == 0


def test_point_evaluation_is_right_continuous():
    x = DyadicStep([1.0, 2.0, 3.0, 4.0])
    assert x(0.25) == 2.0
    assert x(0.2499) == 1.0
    assert x(1.0) == 4.0


def test_power_cell_averages_integrate_exactly():
    # cell averages of t^-a integrate to 1/(1-a)
    x = DyadicStep.power(0.25, 10)
    assert integral(x) == pytest.approx(1.0 / 0.75, rel=1e-13)
    assert np.all(np.diff(x.values) < 0)


@given(steps(max_rank=6), st.integers(0, 3))
def test_refine_then_coarsen_is_identity(x, extra):
    assert coarsen(refine(x, x.rank + extra), x.rank) == x


@given(steps(min_rank=2, max_rank=6))
def test_coarsen_is_consistent_level_by_level(x):
    k = x.rank - 2
    assert np.array_equal(coarsen(coarsen(x, k + 1), k).values, coarsen(x, k).values)


@given(steps(max_rank=6))
def test_integral_is_mean(x):
    assert integral(x) == pytest.approx(float(np.mean(x.values)), abs=1e-12)


@given(steps(max_rank=5), steps(max_rank=5))
def test_inner_symmetric_and_matches_dense(x, y):
    m = max(x.rank, y.rank)
    direct = float(np.mean(refine(x, m).values * refine(y, m).values))
    assert inner(x, y) == pytest.approx(direct, abs=1e-10)
    assert inner(x, y) == inner(y, x)


def test_equality_is_functional():
    assert DyadicStep([1.0, 1.0]) == DyadicStep([1.0])
    assert DyadicStep([1.0, 2.0]) != DyadicStep([1.0])


def test_json_round_trip():
    x = DyadicStep([0.1, -2.5, 3.0, 1e-300])
    y = DyadicStep.from_json(x.to_json())
    assert np.array_equal(x.values, y.values)
    assert json.loads(x.to_json())["rank"] == 2
    with pytest.raises(ValueError):
        DyadicStep.from_dict({"rank": 2, "values": [1.0]})


def test_csv_export():
    text = DyadicStep([0.5, 1.5]).to_csv()
    assert text.splitlines() == ["value", "0.5", "1.5"]


def test_multi_index_positions():
    a = MultiIndex((1, 0, 1))
    assert a.position == 5
    assert a.interval() == (5 / 8, 6 / 8)
    assert (MultiIndex((1,)) + MultiIndex((0, 1))).position == 5
    assert [m.position for m in MultiIndex.all(3)] == list(range(8))
    assert MultiIndex.from_position(3, 5) == a


def test_sparse_round_trip_and_coarsen():
    x = DyadicStep([0.0, 2.0, 0.0, 0.0, 1.0, 1.0, 0.0, -3.0])
    s = SparseStep.from_dense(x)
    assert s.nnz == 4
    assert s.to_dense() == x
    assert s.coarsen(1).to_dense() == coarsen(x, 1)
    assert s.refine(5).to_dense() == refine(x, 5)
    assert s.support_measure == 0.5


def test_sparse_high_rank_positions():
    # rank beyond int64 addressing
    s = SparseStep(80, [2**79 + 3], [1.5])
    assert s.positions.dtype == object
    c = s.coarsen(1)
    assert list(c.positions) == [1]
    assert c.values[0] == math.ldexp(1.5, -79)


def test_cell_sum_resolves_mixed_ranks():
    cs = CellSum()
    cs.add(0, [0], [1.0])
    cs.add(2, [3], [2.0])
    cs.add(1, [0], [-1.0])
    assert cs.to_dense(2) == DyadicStep([0.0, 0.0, 1.0, 3.0])
    ranks, vals = cs.leaves()
    assert math.fsum(np.ldexp(1.0, -ranks)) == 1.0


@given(steps(max_rank=4), steps(max_rank=4))
def test_cell_sum_matches_dense_sum(x, y):
    cs = CellSum().add_step(x).add_step(y, -1.0)
    assert np.allclose(cs.to_dense(max(x.rank, y.rank)).values, (x - y).values, atol=1e-12)
