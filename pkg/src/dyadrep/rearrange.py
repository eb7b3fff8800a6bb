"""Decreasing rearrangements as canonical value/measure staircases."""

from __future__ import annotations

import json
import math

import numpy as np

from .dyadic import DyadicStep, SparseStep
from .errors import PreconditionError

MEASURE_TOL = 1e-12


class WeightedStep:
    """Nonincreasing staircase: ``values[i]`` on an interval of length ``measures[i]``.

    This is how x* is stored: the decreasing rearrangement of |x| on [0, 1].
    Values are strictly decreasing since equal values are merged into a single
    cell, which makes staircase comparison exact.
    """

    __slots__ = ("values", "measures")

    def __init__(self, values, measures, *, check: bool = True):
        v = np.asarray(values, dtype=float)
        m = np.asarray(measures, dtype=float)
        if check:
            if v.shape != m.shape or v.ndim != 1 or v.size == 0:
                raise ValueError("values and measures must be nonempty matching 1-D arrays")
            if np.any(v < 0) or np.any(np.diff(v) >= 0):
                raise ValueError("values must be nonnegative and strictly decreasing")
            if np.any(m <= 0):
                raise ValueError("measures must be positive")
            if abs(m.sum() - 1.0) > MEASURE_TOL:
                raise ValueError(f"measures sum to {m.sum()!r}, expected 1")
        v.flags.writeable = False
        m.flags.writeable = False
        self.values = v
        self.measures = m

    @classmethod
    def from_cells(cls, values, measures) -> "WeightedStep":
        """Merge and sort arbitrary nonnegative (value, measure) cells."""
        v = np.asarray(values, dtype=float).ravel()
        m = np.asarray(measures, dtype=float).ravel()
        if np.any(v < 0):
            raise ValueError("cell values must be nonnegative")
        uniq, inv = np.unique(v, return_inverse=True)
        tot = np.bincount(inv.ravel(), weights=m, minlength=uniq.size)
        keep = tot > 0
        return cls(uniq[keep][::-1], tot[keep][::-1])

    @classmethod
    def shells(cls, shell_values, core_value: float) -> "WeightedStep":
        """Staircase equal to ``shell_values[i]`` on [2^-(i+1), 2^-i) and ``core_value`` on [0, 2^-d).

        The values must increase towards the origin (``core_value`` largest).
        Measures go down to ``2^-d`` with ``d = len(shell_values)``, far below
        any dense rank.
        """
        sv = np.asarray(shell_values, dtype=float)
        d = sv.size
        vals = np.concatenate([[core_value], sv[::-1]])
        meas = np.ldexp(1.0, -np.concatenate([[d], np.arange(d, 0, -1)]))
        return cls(vals, meas)

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"WeightedStep(cells={len(self)})"

    def knots(self) -> np.ndarray:
        """Right endpoints T_i of the staircase cells."""
        return np.cumsum(self.measures)

    def sup(self) -> float:
        return float(self.values[0])

    def integral(self) -> float:
        return float(np.sum(self.values * self.measures))

    def to_pairs(self) -> list[list[float]]:
        return [[float(v), float(m)] for v, m in zip(self.values, self.measures)]

    def to_json(self) -> str:
        return json.dumps(self.to_pairs())

    @classmethod
    def from_json(cls, text: str) -> "WeightedStep":
        pairs = json.loads(text)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __call__(self, t):
        """Right-continuous evaluation of the staircase at t in [0, 1)."""
        idx = np.searchsorted(self.knots(), np.asarray(t, dtype=float), side="right")
        return self.values[np.minimum(idx, len(self) - 1)]


def rearrangement(x) -> WeightedStep:
    """Decreasing rearrangement of |x| for a dense, sparse or already rearranged step."""
    if isinstance(x, WeightedStep):
        return x
    if isinstance(x, DyadicStep):
        uniq, counts = np.unique(np.abs(x.values), return_counts=True)
        return WeightedStep(uniq[::-1], np.ldexp(counts[::-1].astype(float), -x.rank), check=False)
    if isinstance(x, SparseStep):
        uniq, counts = np.unique(np.abs(x.values), return_counts=True)
        vals = uniq[::-1]
        meas = np.ldexp(counts[::-1].astype(float), -x.rank)
        rest = 1.0 - math.ldexp(x.nnz, -x.rank)
        if rest > 0.0:
            vals = np.append(vals, 0.0)
            meas = np.append(meas, rest)
        if vals.size == 0:
            return WeightedStep([0.0], [1.0])
        return WeightedStep(vals, meas, check=False)
    raise TypeError(f"cannot rearrange {type(x).__name__}")


def tensor_rearrangement(f, u) -> WeightedStep:
    """Rearrangement of (f (x) u)(s, t) = f(s) u(t) on the unit square.

    Only the distributions of |f| and |u| matter, so the product staircase is
    built from the two merged staircases.
    """
    a, b = rearrangement(f), rearrangement(u)
    vals = np.multiply.outer(a.values, b.values)
    meas = np.multiply.outer(a.measures, b.measures)
    return WeightedStep.from_cells(vals, meas)


def _staircase_pieces(a: WeightedStep, b: WeightedStep):
    cuts = np.union1d(a.knots(), b.knots())
    lefts = np.concatenate([[0.0], cuts[:-1]])
    return lefts


def equimeasurable(x, y, tol: float = 0.0) -> bool:
    """True when the decreasing rearrangements of |x| and |y| agree within ``tol``."""
    a, b = rearrangement(x), rearrangement(y)
    lefts = _staircase_pieces(a, b)
    return bool(np.all(np.abs(a(lefts) - b(lefts)) <= tol))


def dilation(x, tau: float) -> WeightedStep:
    """Rearrangement of sigma_tau x (x compressed onto [0, tau]) for tau in (0, 1]."""
    if not 0.0 < tau <= 1.0:
        raise PreconditionError(f"dilation parameter must lie in (0, 1], got {tau}")
    ws = rearrangement(x)
    if tau == 1.0:
        return ws
    return WeightedStep.from_cells(np.append(ws.values, 0.0), np.append(ws.measures * tau, 1.0 - tau))
