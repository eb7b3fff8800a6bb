"""Rearrangement-invariant norms on [0, 1].

Every norm is evaluated on the decreasing rearrangement, so the input may be a
:class:`~dyadrep.dyadic.DyadicStep`, a :class:`~dyadrep.dyadic.SparseStep` or
a :class:`~dyadrep.rearrange.WeightedStep`.  All spaces are normalized so the
constant function 1 has norm 1.

Config strings (see :func:`parse_space`)::

    lp:2   lp:inf   lorentz:power:2   lorentz:logpower:1   lorentz:slowlog
    marcinkiewicz:power:2   orlicz:exp:1   orlicz:power:3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .errors import PreconditionError, UnsupportedDualError
from .rearrange import WeightedStep, dilation, rearrangement

_GRID = np.linspace(0.0, 1.0, 2 ** 12 + 1)


def _safe_log_inv(t):
    """ln(1/t) with 0 mapped to +inf and no warnings."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.log(t)


# --- concave functions for Lorentz / Marcinkiewicz spaces ---------------------

@dataclass(frozen=True)
class PhiFunction:
    """Increasing concave phi on [0, 1] with phi(0) = 0 and phi(1) = 1."""

    def __post_init__(self):
        self._validate()

    def _raw(self, t):
        raise NotImplementedError

    def _raw_derivative(self, t):
        raise NotImplementedError

    def _raw_log_u(self, u):
        """log phi(exp(-u)) before normalization."""
        raise NotImplementedError

    @property
    def _norm(self) -> float:
        return float(self._raw(np.array([1.0]))[0])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t > 0, self._raw(np.maximum(t, np.finfo(float).tiny)), 0.0)
        return out / self._norm

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._raw_derivative(t) / self._norm

    def log_of_exp_neg(self, u):
        """log phi(e^-u), usable far below the float range of t itself."""
        return self._raw_log_u(np.asarray(u, dtype=float)) - math.log(self._norm)

    def derivative_averages(self, rank: int):
        """phi' discretized as exact cell averages; integrates to phi(1) = 1."""
        from .dyadic import DyadicStep

        return DyadicStep.from_antiderivative(self, rank)

    def _validate(self):
        v = self(_GRID)
        if v[0] != 0.0 or not math.isclose(v[-1], 1.0, rel_tol=1e-12):
            raise ValueError(f"{self}: need phi(0) = 0 and phi(1) = 1")
        d = np.diff(v)
        if np.any(d < -1e-15):
            raise ValueError(f"{self} is not increasing on [0, 1]")
        if np.any(np.diff(d) > 1e-12):
            raise ValueError(f"{self} is not concave on [0, 1]")

    @property
    def config(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Power(PhiFunction):
    """phi(t) = t^(1/q)."""

    q: float = 1.0

    def __post_init__(self):
        if not self.q >= 1.0:
            raise ValueError("Power(q) needs q >= 1")
        super().__post_init__()

    def _raw(self, t):
        return t ** (1.0 / self.q)

    def _raw_derivative(self, t):
        return t ** (1.0 / self.q - 1.0) / self.q

    def _raw_log_u(self, u):
        return -u / self.q

    @property
    def config(self) -> str:
        return f"power:{self.q:g}"


@dataclass(frozen=True)
class LogPower(PhiFunction):
    """phi(t) = t (1 + ln(1/t))^b; increasing only for b <= 1."""

    b: float = 1.0

    def __post_init__(self):
        if not self.b >= 0.0:
            raise ValueError("LogPower(b) needs b >= 0")
        super().__post_init__()

    def _raw(self, t):
        return t * (1.0 + _safe_log_inv(t)) ** self.b

    def _raw_derivative(self, t):
        L1 = 1.0 + _safe_log_inv(t)
        return L1 ** (self.b - 1.0) * (L1 - self.b)

    def _raw_log_u(self, u):
        return -u + self.b * np.log1p(u)

    @property
    def config(self) -> str:
        return f"logpower:{self.b:g}"


@dataclass(frozen=True)
class SlowLog(PhiFunction):
    """phi(t) = c / (c + ln(1/t)); concave on [0, 1] exactly when c >= 2."""

    c: float = 2.0

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("SlowLog(c) needs c > 0")
        super().__post_init__()

    def _raw(self, t):
        return self.c / (self.c + _safe_log_inv(t))

    def _raw_derivative(self, t):
        return self.c / (t * (self.c + _safe_log_inv(t)) ** 2)

    def _raw_log_u(self, u):
        return math.log(self.c) - np.log(self.c + u)

    @property
    def config(self) -> str:
        return "slowlog" if self.c == 2.0 else f"slowlog:{self.c:g}"


# --- convex functions for Orlicz spaces -----------------------------------

@dataclass(frozen=True)
class OrliczFunction:
    """Increasing convex Phi on [0, inf) with Phi(0) = 0 and Phi(1) = 1."""

    def __post_init__(self):
        grid = np.linspace(0.0, 4.0, 4097)
        v = self(grid)
        if v[0] != 0.0 or not math.isclose(float(self(np.array([1.0]))[0]), 1.0, rel_tol=1e-12):
            raise ValueError(f"{self}: need Phi(0) = 0 and Phi(1) = 1")
        d = np.diff(v)
        if np.any(d <= 0):
            raise ValueError(f"{self} is not increasing")
        if np.any(np.diff(d) < -1e-12 * np.abs(d[1:])):
            raise ValueError(f"{self} is not convex")

    def __call__(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerOrlicz(OrliczFunction):
    """Phi(t) = t^p; the Luxemburg norm is then the L_p norm."""

    p: float = 2.0

    def __post_init__(self):
        if not self.p >= 1.0:
            raise ValueError("PowerOrlicz(p) needs p >= 1")
        super().__post_init__()

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** self.p

    @property
    def config(self) -> str:
        return f"power:{self.p:g}"


@dataclass(frozen=True)
class ExpOrlicz(OrliczFunction):
    """Phi(t) = (exp(t^a) - 1) / (e - 1)."""

    a: float = 1.0

    def __post_init__(self):
        if not self.a >= 1.0:
            raise ValueError("ExpOrlicz(a) needs a >= 1")
        super().__post_init__()

    def __call__(self, t):
        with np.errstate(over="ignore"):
            return np.expm1(np.asarray(t, dtype=float) ** self.a) / math.expm1(1.0)

    @property
    def config(self) -> str:
        return f"exp:{self.a:g}"


# --- spaces ---------------------------------------------------------------

class SymmetricSpace:
    """Common interface: ``norm``, ``fundamental`` and a config string."""

    config: str

    def norm(self, x) -> float:
        return self._norm(rearrangement(x))

    def _norm(self, ws: WeightedStep) -> float:
        raise NotImplementedError

    def fundamental(self, t: float) -> float:
        return self._norm(_indicator(t))

    def __str__(self) -> str:
        return self.config


def _indicator(t: float) -> WeightedStep:
    if t == 1.0:
        return WeightedStep([1.0], [1.0])
    return WeightedStep([1.0, 0.0], [t, 1.0 - t])


@dataclass(frozen=True)
class Lp(SymmetricSpace):
    p: float = 2.0

    def __post_init__(self):
        if not self.p >= 1.0:
            raise ValueError("Lp needs p >= 1")

    @property
    def config(self) -> str:
        return "lp:inf" if math.isinf(self.p) else f"lp:{self.p:g}"

    @property
    def conjugate(self) -> float:
        if self.p == 1.0:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def _norm(self, ws):
        top = ws.values[0]
        if top == 0.0:
            return 0.0
        if math.isinf(self.p):
            return float(top)
        # scaling by the maximum keeps large p away from overflow
        s = np.sum(ws.measures * (ws.values / top) ** self.p)
        return float(top * s ** (1.0 / self.p))

    def fundamental(self, t):
        _check_t(t)
        return 1.0 if math.isinf(self.p) else float(t ** (1.0 / self.p))


@dataclass(frozen=True)
class Lorentz(SymmetricSpace):
    phi: PhiFunction = field(default_factory=Power)

    @property
    def config(self) -> str:
        return f"lorentz:{self.phi.config}"

    def _norm(self, ws):
        T = np.concatenate([[0.0], ws.knots()])
        return float(np.sum(ws.values * np.diff(self.phi(T))))

    def fundamental(self, t):
        _check_t(t)
        return float(self.phi(t))


@dataclass(frozen=True)
class Marcinkiewicz(SymmetricSpace):
    """sup_t phi(t)^-1 * integral_0^t x*.

    The running integral psi is piecewise linear with knots at the staircase
    breakpoints.  On a segment, (a + v t)/phi(t) has derivative of the sign of
    h(t) = v phi - (a + v t) phi', and h' = -(a + v t) phi'' >= 0, so the ratio
    is quasi-convex there and its maximum sits at a knot.
    """

    phi: PhiFunction = field(default_factory=Power)

    @property
    def config(self) -> str:
        return f"marcinkiewicz:{self.phi.config}"

    def _norm(self, ws):
        psi = np.cumsum(ws.values * ws.measures)
        return float(np.max(psi / self.phi(ws.knots())))

    def fundamental(self, t):
        _check_t(t)
        return float(t / self.phi(t))


@dataclass(frozen=True)
class Orlicz(SymmetricSpace):
    """Luxemburg norm inf{lam > 0 : integral Phi(|x|/lam) <= 1}, found by bisection."""

    Phi: OrliczFunction = field(default_factory=ExpOrlicz)
    rtol: float = 1e-12

    @property
    def config(self) -> str:
        return f"orlicz:{self.Phi.config}"

    def _norm(self, ws):
        top = ws.values[0]
        if top == 0.0:
            return 0.0
        v = ws.values / top
        m = ws.measures

        def excess(lam):
            return float(np.sum(m * self.Phi(v / lam))) - 1.0

        # Jensen gives norm >= ||x||_1, and Phi(2) >= 2 makes the lower end strict
        lo, hi = 0.5 * float(np.sum(v * m)), 1.0
        if excess(hi) >= 0.0:
            return float(top)
        lam = bisect(excess, lo, hi, xtol=1e-300, rtol=self.rtol, maxiter=500)
        return float(top * lam)


def _check_t(t):
    if not 0.0 < t <= 1.0:
        raise PreconditionError(f"fundamental function is defined for t in (0, 1], got {t}")


# --- module-level API -----------------------------------------------------

def norm(space: SymmetricSpace, x) -> float:
    return space.norm(x)


def dual_space(space: SymmetricSpace) -> SymmetricSpace:
    """The Koethe dual for the pairs with a closed form: L_p <-> L_q and Lambda_phi -> M_phi."""
    if isinstance(space, Lp):
        return Lp(space.conjugate)
    if isinstance(space, Lorentz):
        return Marcinkiewicz(space.phi)
    raise UnsupportedDualError(f"no dual norm implemented for {space}")


def dual_norm(space: SymmetricSpace, y) -> float:
    return dual_space(space).norm(y)


def fundamental_function(space: SymmetricSpace, t: float) -> float:
    _check_t(t)
    return space.fundamental(t)


def dilation_norm(space: SymmetricSpace, x, t: float) -> float:
    """||sigma_t x||_X."""
    return space._norm(dilation(x, t))


@dataclass(frozen=True)
class SubmultiplicativityReport:
    C_best: float
    witness: tuple[float, float]
    witness_log2: tuple[int, int]
    trend: tuple[float, ...]
    unbounded_trend: bool

    def to_dict(self) -> dict:
        return {
            "C_best": self.C_best,
            "witness": list(self.witness),
            "witness_log2": list(self.witness_log2),
            "trend": list(self.trend),
            "unbounded_trend": self.unbounded_trend,
        }


def _submult_max(phi: PhiFunction, grid_rank: int):
    n = 1 << grid_rank
    u = np.arange(n) * math.log(2.0)
    lp = phi.log_of_exp_neg(u)
    ratio = np.exp(phi.log_of_exp_neg(u[:, None] + u[None, :]) - lp[:, None] - lp[None, :])
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return float(ratio[i, j]), (int(i), int(j))


def submultiplicativity_constant(phi: PhiFunction, grid_rank: int = 6, refinements: int = 3) -> SubmultiplicativityReport:
    """Max of phi(st) / (phi(s) phi(t)) over s, t in {2^-i : i < 2^grid_rank}.

    The grid is refined ``refinements`` times (each doubling the log-range);
    ``unbounded_trend`` is set when the maximum strictly grows at every step.
    """
    trend, witnesses = [], []
    for g in range(grid_rank, grid_rank + refinements + 1):
        value, w = _submult_max(phi, g)
        trend.append(value)
        witnesses.append(w)
    growing = all(b > a * (1.0 + 1e-9) for a, b in zip(trend, trend[1:]))
    i, j = witnesses[-1]
    return SubmultiplicativityReport(
        C_best=trend[-1],
        witness=(math.ldexp(1.0, -i), math.ldexp(1.0, -j)),
        witness_log2=(-i, -j),
        trend=tuple(trend),
        unbounded_trend=growing,
    )


# --- parsing --------------------------------------------------------------

def parse_phi(parts: list[str]) -> PhiFunction:
    if not parts:
        raise ValueError("missing phi family")
    name, args = parts[0].lower(), [float(a) for a in parts[1:]]
    if name == "power":
        return Power(*args)
    if name == "logpower":
        return LogPower(*args)
    if name == "slowlog":
        return SlowLog(*args)
    raise ValueError(f"unknown phi family {name!r}")


def parse_space(text: str) -> SymmetricSpace:
    """Build a space from a config string such as ``lorentz:power:2``."""
    parts = [p.strip() for p in text.split(":") if p.strip()]
    if not parts:
        raise ValueError("empty space string")
    family = parts[0].lower()
    try:
        if family == "lp":
            if len(parts) != 2:
                raise ValueError("expected lp:<p>")
            return Lp(math.inf if parts[1].lower() in ("inf", "infinity") else float(parts[1]))
        if family == "lorentz":
            return Lorentz(parse_phi(parts[1:]))
        if family == "marcinkiewicz":
            return Marcinkiewicz(parse_phi(parts[1:]))
        if family == "orlicz":
            if len(parts) != 3:
                raise ValueError("expected orlicz:<exp|power>:<param>")
            kind, param = parts[1].lower(), float(parts[2])
            if kind == "exp":
                return Orlicz(ExpOrlicz(param))
            if kind == "power":
                return Orlicz(PowerOrlicz(param))
            raise ValueError(f"unknown Orlicz family {kind!r}")
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad space string {text!r}: {exc}") from None
    raise ValueError(f"unknown space family {family!r}")
