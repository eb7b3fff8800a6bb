"""Dyadic dilation/translation operators and the projections they generate.

``V_0 x`` is x compressed onto [0, 1/2), ``V_1 x`` onto [1/2, 1); ``V^alpha``
composes them so that ``V^alpha f`` is the copy of f living on the dyadic
interval addressed by alpha, and ``W = V_0 + V_1`` periodizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicStep, MultiIndex, SparseStep, check_rank, coarsen, integral, refine
from .errors import PreconditionError


@dataclass(frozen=True)
class DilationSystem:
    """The system {V^alpha f} of a generator with nonzero mean.

    With ``normalize=True`` (the default) the stored generator is rescaled to
    mean one, which is what makes each ``P_{k,f}`` a projection.
    """

    generator: DyadicStep
    normalize: bool = True

    def __post_init__(self):
        mean = integral(self.generator)
        if mean == 0.0:
            raise PreconditionError("generator must have nonzero integral")
        object.__setattr__(self, "mean", mean)
        f = DyadicStep(self.generator.values / mean) if self.normalize else self.generator
        object.__setattr__(self, "f", f)


def _system_generator(sys) -> DyadicStep:
    return sys.f if isinstance(sys, DilationSystem) else sys


def apply_V(i: int, x: DyadicStep) -> DyadicStep:
    if i not in (0, 1):
        raise ValueError("V index must be 0 or 1")
    check_rank(x.rank + 1)
    zero = np.zeros(len(x))
    return DyadicStep(np.concatenate([x.values, zero] if i == 0 else [zero, x.values]))


def apply_V_alpha(alpha: MultiIndex, x: DyadicStep) -> DyadicStep:
    k = len(alpha)
    if k == 0:
        return x
    n = len(x)
    check_rank(x.rank + k)
    out = np.zeros(n << k)
    out[alpha.position * n:(alpha.position + 1) * n] = x.values
    return DyadicStep(out)


def apply_W_power(k: int, f: DyadicStep) -> DyadicStep:
    """W^k f = sum over |alpha| = k of V^alpha f: 2^k side-by-side copies."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return f
    check_rank(f.rank + k)
    return DyadicStep(np.tile(f.values, 1 << k))


def synthesize(coefficients: DyadicStep, g: DyadicStep) -> DyadicStep:
    """sum_alpha xi_alpha V^alpha g for the rank-k coefficient vector xi."""
    check_rank(coefficients.rank + g.rank)
    return DyadicStep(np.multiply.outer(coefficients.values, g.values).ravel())


def synthesize_sparse(coefficients: SparseStep, g: DyadicStep) -> SparseStep:
    """Sparse counterpart of :func:`synthesize`; zero cells of g are skipped."""
    nz = np.flatnonzero(g.values)
    rank = coefficients.rank + g.rank
    base = coefficients.positions
    if rank > 62:
        base = np.array([int(p) for p in base], dtype=object)
        offsets = np.array([int(j) for j in nz], dtype=object)
    else:
        offsets = nz.astype(np.int64)
    pos = (base[:, None] * (1 << g.rank) + offsets[None, :]).ravel()
    vals = np.multiply.outer(coefficients.values, g.values[nz]).ravel()
    return SparseStep(rank, pos, vals)


def project(sys, k: int, x: DyadicStep) -> DyadicStep:
    """P_{k,f} x = 2^k sum_{|alpha|=k} <x, V^alpha 1> V^alpha f.

    The coefficient ``2^k <x, V^alpha 1>`` is the rank-k cell average of x, so
    the result is ``synthesize(coarsen(x, k), f)`` and has rank k + rank(f).
    """
    f = _system_generator(sys)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if x.rank < k:
        x = refine(x, k)
    return synthesize(coarsen(x, k), f)


def adjoint_project(sys, k: int, y: DyadicStep) -> DyadicStep:
    """P*_{k,f} y: rank-k step with cell value 2^k <V^alpha f, y> at position(alpha).

    ``W^k f`` restricted to I_alpha is V^alpha f, so the cell values are the
    rank-k averages of the product ``(W^k f) y``.
    """
    f = _system_generator(sys)
    if k < 0:
        raise ValueError("k must be nonnegative")
    m = max(k + f.rank, y.rank)
    wf = refine(apply_W_power(k, f), m)
    prod = DyadicStep(wf.values * refine(y, m).values)
    return coarsen(prod, k)
