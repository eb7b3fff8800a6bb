"""Distance from 1 to the span of a generator, and smoothness of X at 1.

If X is smooth at 1, then inf_lam ||1 - lam f|| < 1 whenever <f, 1> != 0.  In a
Lorentz space with phi(t)/t unbounded the dual ball has two norming functionals
for 1 (the constant and phi'), and a generator separating them keeps every
||1 - lam f|| at least 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._golden import expand_bracket, golden_section, pow2_exponent
from .dyadic import DyadicStep, dyadic_rank, integral
from .errors import PreconditionError
from .spaces import PhiFunction, SymmetricSpace, dual_space


@dataclass
class LambdaMinimum:
    lam: float
    value: float
    bracket: tuple[float, float]
    scan_min: float | None = None

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "value": self.value, "bracket": list(self.bracket),
                "scan_min": self.scan_min}


def _residual(space: SymmetricSpace, f: DyadicStep, lam: float) -> float:
    return space.norm(DyadicStep(1.0 - lam * f.values))


def min_over_lambda(space: SymmetricSpace, f: DyadicStep, tol: float = 1e-12,
                    scan_width: float | None = None, scan_points: int = 2001) -> LambdaMinimum:
    """Minimize the convex map lam -> ||1 - lam f||_X.

    The search runs on f 2^-e, scaled exactly so its peak lies in [1/2, 1).
    Its bracket starts at [-2/||f 2^-e||_1, 2/||f 2^-e||_1] and doubles until
    the midpoint beats both ends.  With ``scan_width`` the value is also
    checked on a uniform grid of that width in lam, centred at 0, and the
    smaller result wins.  For f below about 1/DBL_MAX the reported lam is inf
    while the value stays exact.
    """
    e = pow2_exponent(f.values)
    fs = DyadicStep(np.ldexp(f.values, -e))
    l1 = float(np.mean(np.abs(fs.values)))
    if l1 == 0.0:
        return LambdaMinimum(0.0, 1.0, (0.0, 0.0))

    def g(mu):
        return _residual(space, fs, mu)

    a, b, _ = expand_bracket(g, -2.0 / l1, 2.0 / l1)
    mu, val, _ = golden_section(g, a, b, xtol=tol)
    with np.errstate(over="ignore"):
        lam = float(np.ldexp(mu, -e))
        a, b = float(np.ldexp(a, -e)), float(np.ldexp(b, -e))
    scan_min = None
    if scan_width is not None:
        grid = np.linspace(-0.5 * scan_width, 0.5 * scan_width, scan_points)
        vals = np.array([_residual(space, f, t) for t in grid])
        i = int(np.argmin(vals))
        scan_min = float(vals[i])
        if scan_min < val:
            lam, val = float(grid[i]), scan_min
    # lam = 0 gives exactly 1
    if val > 1.0:
        lam, val = 0.0, 1.0
    return LambdaMinimum(float(lam), float(val), (float(a), float(b)), scan_min)


def witness_interval(phi: PhiFunction, u: float = 0.25) -> tuple[float, float]:
    """Open interval of c with <f, 1> > 0 > <f, phi'> for f = -c chi[0,u) + chi[u,1).

    <f, 1> = -c u + 1 - u and <f, phi'> = -c phi(u) + 1 - phi(u), both linear in c.
    """
    if not 0.0 < u < 1.0:
        raise PreconditionError("u must lie in (0, 1)")
    pu = float(phi(u))
    return (1.0 - pu) / pu, (1.0 - u) / u


def lorentz_witness(phi: PhiFunction, u: float = 0.25, c: float | None = None) -> DyadicStep:
    """f = -c chi[0,u) + chi[u,1) with <f, 1> > 0 and <f, phi'> < 0; u must be dyadic."""
    lo, hi = witness_interval(phi, u)
    if not lo < hi:
        raise PreconditionError(
            f"no witness for {phi.config}: phi(u) <= u, so <f, 1> > 0 forces <f, phi'> > 0")
    if c is None:
        c = 0.5 * (lo + hi)
    elif not lo < c < hi:
        raise PreconditionError(f"c = {c} outside the feasible interval ({lo}, {hi})")
    rank = dyadic_rank(u)
    n = 1 << rank
    cut = int(u * n)
    values = np.ones(n)
    values[:cut] = -c
    return DyadicStep(values)


@dataclass
class SmoothnessReport:
    space: str
    entries: list[dict] = field(default_factory=list)
    norming: list[int] = field(default_factory=list)
    non_smooth: bool = False

    def to_dict(self) -> dict:
        return {"space": self.space, "entries": self.entries, "norming": self.norming,
                "non_smooth": self.non_smooth}


def smoothness_probe(space: SymmetricSpace, candidates, tol: float = 1e-9) -> SmoothnessReport:
    """Report (||y||_X*, <1, y>) per candidate; non-smooth if two distinct y reach (1, 1)."""
    dual = dual_space(space)
    entries, norming = [], []
    for i, y in enumerate(candidates):
        dn, pairing = dual.norm(y), integral(y)
        entries.append({"index": i, "dual_norm": dn, "pairing": pairing})
        if abs(dn - 1.0) <= tol and abs(pairing - 1.0) <= tol:
            norming.append(i)
    distinct = []
    for i in norming:
        if not any(candidates[i] == candidates[j] for j in distinct):
            distinct.append(i)
    return SmoothnessReport(space.config, entries, norming, len(distinct) >= 2)
