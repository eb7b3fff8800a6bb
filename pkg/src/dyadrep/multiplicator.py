"""Estimates of the tensor-product multiplicator norm.

||f||_M(X) = sup_U ||f (x) U||_X(IxI) / ||U||_X.  Every ratio evaluated at a
concrete U is a certified lower bound; the supremum itself is approached by a
seeded search and is reported as a heuristic upper envelope only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicStep
from .errors import PreconditionError
from .rearrange import WeightedStep, dilation, rearrangement, tensor_rearrangement
from .spaces import Lorentz, Lp, PhiFunction, SymmetricSpace


@dataclass
class MultiplicatorEstimate:
    lower: float
    upper: float
    witness_lower: dict
    iterations: int

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "witness_lower": self.witness_lower,
            "iterations": self.iterations,
        }


def tensor_ratio(space: SymmetricSpace, f, U) -> float:
    nu = space.norm(U)
    if nu == 0.0:
        return 0.0
    return space._norm(tensor_rearrangement(f, U)) / nu


def _decreasing_step(values) -> WeightedStep:
    """Cells of equal measure 2^-r carrying the given nonincreasing values."""
    v = np.asarray(values, dtype=float)
    return WeightedStep.from_cells(v, np.full(v.size, 1.0 / v.size))


def indicator_ratios(space: SymmetricSpace, f, grid_rank: int) -> np.ndarray:
    """||sigma_t f|| / phi_X(t) for t = 2^-j, j = 0..grid_rank (U = indicator of [0, t])."""
    return np.array([
        space._norm(dilation(f, 2.0 ** -j)) / space.fundamental(2.0 ** -j)
        for j in range(grid_rank + 1)
    ])


def multiplicator_lower(space: SymmetricSpace, f, grid_rank: int = 12, n_random: int = 8,
                        random_rank: int = 5, seed: int = 0):
    """Certified lower bound ``(value, witness)`` for ||f||_M(X).

    Candidates are the indicators of [0, 2^-j], j <= grid_rank, and
    ``n_random`` random decreasing steps of rank <= min(grid_rank, random_rank).
    """
    ratios = indicator_ratios(space, f, grid_rank)
    j = int(np.argmax(ratios))
    best, witness = float(ratios[j]), {"kind": "indicator", "t": 2.0 ** -j}
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        r = int(rng.integers(1, min(grid_rank, random_rank) + 1)) if grid_rank > 0 else 0
        u = np.sort(rng.exponential(size=1 << r))[::-1]
        val = tensor_ratio(space, f, _decreasing_step(u))
        if val > best:
            best, witness = val, {"kind": "step", "values": [float(x) for x in u]}
    return best, witness


def _increments_to_values(c: np.ndarray) -> np.ndarray:
    # U = sum_i c_i * indicator[0, (i+1)/N)
    return np.cumsum(c[::-1])[::-1]


def multiplicator_upper(space: SymmetricSpace, f, budget: int = 400, seed: int = 0,
                        grid_rank: int = 12, search_rank: int = 4) -> MultiplicatorEstimate:
    """Coordinate ascent over decreasing U >= 0 maximizing the tensor ratio.

    U is parametrized by nonnegative increments on ``2^search_rank`` cells.
    Starts: U = 1, the best indicator, then random restarts until ``budget``
    ratio evaluations are spent.  For L_p the ratio is identically ||f||_p, so
    lower and upper coincide.
    """
    lower, witness = multiplicator_lower(space, f, grid_rank=grid_rank, seed=seed)
    if isinstance(space, Lp):
        return MultiplicatorEstimate(lower, max(lower, space.norm(f)), witness, 0)

    n = 1 << search_rank
    rng = np.random.default_rng(seed + 1)
    evals = 0

    def ratio(c):
        nonlocal evals
        evals += 1
        return tensor_ratio(space, f, _decreasing_step(_increments_to_values(c)))

    starts = [np.eye(n)[-1]]
    if witness["kind"] == "indicator":
        cut = max(1, int(round(witness["t"] * n)))
        starts.append(np.eye(n)[cut - 1])
    best = lower
    while evals < budget:
        c = starts.pop(0) if starts else rng.dirichlet(np.ones(n))
        val = ratio(c)
        step = 1.0
        while evals < budget and step > 1e-3:
            improved = False
            for i in rng.permutation(n):
                for cand in (c[i] * (1.0 + step), c[i] / (1.0 + step), 0.0, c[i] + step * c.mean()):
                    if cand == c[i]:
                        continue
                    trial = c.copy()
                    trial[i] = cand
                    if not trial.any():
                        continue
                    tv = ratio(trial)
                    if tv > val:
                        c, val, improved = trial, tv, True
                    if evals >= budget:
                        break
                if evals >= budget:
                    break
            if not improved:
                step *= 0.5
        best = max(best, val)
    return MultiplicatorEstimate(lower, max(best, lower), witness, evals)


@dataclass
class MembershipReport:
    verdict: str
    curve: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "curve": [[j, r] for j, r in self.curve]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "ratio"])
        for j, r in self.curve:
            w.writerow([j, repr(r)])
        return buf.getvalue()


def require_decreasing(f) -> WeightedStep:
    """Return f* when f already equals its decreasing rearrangement."""
    if isinstance(f, WeightedStep):
        return f
    if isinstance(f, DyadicStep):
        v = f.values
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise PreconditionError("generator must be nonnegative and nonincreasing (f = f*)")
        return rearrangement(f)
    raise TypeError(f"unsupported generator type {type(f).__name__}")


def trend_verdict(values, stable_tol: float = 0.01) -> str:
    """``bounded`` if nonincreasing or flat over the last third, else ``growing``."""
    v = np.asarray(values, dtype=float)
    if np.all(np.diff(v) <= 1e-12 * np.abs(v[:-1])):
        return "bounded"
    tail = v[len(v) - max(2, len(v) // 3):]
    if tail[-1] <= tail[0] * (1.0 + stable_tol):
        return "bounded"
    return "growing"


def lorentz_membership(phi: PhiFunction, f, grid_rank: int = 14, stable_tol: float = 0.01) -> MembershipReport:
    """Curve j -> ||sigma_{2^-j} f|| / phi(2^-j) in Lambda_phi with a trend verdict.

    Boundedness on indicators is all this checks; the boundedness principle
    for Lorentz spaces turns that into membership with an unknown constant, so
    no norm value is claimed.
    """
    fs = require_decreasing(f)
    ratios = indicator_ratios(Lorentz(phi), fs, grid_rank)
    curve = [(j, float(r)) for j, r in enumerate(ratios)]
    return MembershipReport(trend_verdict(ratios, stable_tol), curve)
