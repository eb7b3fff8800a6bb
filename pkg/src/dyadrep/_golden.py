"""Golden-section minimization of unimodal functions of one variable."""

from __future__ import annotations

import math

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def expand_bracket(g, a, b, max_doublings=64):
    """Grow [a, b] until its midpoint is no worse than both ends.

    For convex g this means the minimum lies inside the bracket.  Returns
    ``(a, b, evaluations)``.
    """
    evals = 0
    for _ in range(max_doublings):
        mid = 0.5 * (a + b)
        ga, gm, gb = g(a), g(mid), g(b)
        evals += 3
        if ga < gm:
            a -= b - a
        elif gb < gm:
            b += b - a
        else:
            return a, b, evals
    return a, b, evals


def golden_section(g, a, b, xtol=1e-12, max_iter=300):
    """Minimize unimodal g on [a, b]; returns ``(x, g(x), iterations)``.

    Stops once the bracket width is below ``xtol * (1 + |x|)``.  The bracket
    ends are compared too, so a minimum at an endpoint is not lost.
    """
    x1 = b - INVPHI * (b - a)
    x2 = a + INVPHI * (b - a)
    g1, g2 = g(x1), g(x2)
    it = 0
    while it < max_iter and (b - a) > xtol * (1.0 + abs(x1)):
        if g1 <= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - INVPHI * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + INVPHI * (b - a)
            g2 = g(x2)
        it += 1
    best = min(((x1, g1), (x2, g2), (a, g(a)), (b, g(b))), key=lambda p: p[1])
    return best[0], best[1], it


def pow2_exponent(values) -> int:
    """e with max|values| in [2^(e-1), 2^e); dividing by 2^e is exact and keeps lam* of order one."""
    peak = float(np.max(np.abs(values)))
    return int(np.frexp(peak)[1]) if peak > 0.0 else 0
