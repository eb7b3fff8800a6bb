"""Step functions on [0, 1) that are constant on dyadic cells.

A :class:`DyadicStep` of rank ``n`` stores ``2**n`` cell values, cell ``i``
covering ``[i 2^-n, (i+1) 2^-n)``.  Arrays are read-only; every operation
returns a new object.

Two auxiliary carriers serve the representation engine, whose residuals live
at ranks far beyond what a dense array can hold:

* :class:`SparseStep` -- the nonzero cells of a single-rank step function;
* :class:`CellSum` -- a finite sum of scaled cell indicators of mixed ranks,
  resolved into a partition of [0, 1) on demand.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import RankError

DEFAULT_MAX_RANK = 22
# largest rank whose cell positions still fit in int64
_INT64_RANK = 62


def max_rank() -> int:
    """Rank cap for dense arrays; ``DYADREP_MAX_RANK`` overrides the default."""
    raw = os.environ.get("DYADREP_MAX_RANK")
    if raw is None:
        return DEFAULT_MAX_RANK
    try:
        value = int(raw)
    except ValueError:
        raise RankError(f"DYADREP_MAX_RANK must be an integer, got {raw!r}") from None
    if value < 0:
        raise RankError("DYADREP_MAX_RANK must be nonnegative")
    return value


def check_rank(rank: int) -> int:
    if rank < 0:
        raise RankError(f"rank must be nonnegative, got {rank}")
    cap = max_rank()
    if rank > cap:
        raise RankError(f"rank {rank} exceeds the configured cap {cap}")
    return rank


def _rank_of_length(n: int) -> int:
    rank = n.bit_length() - 1
    if n <= 0 or (1 << rank) != n:
        raise RankError(f"number of cells must be a power of two, got {n}")
    return rank


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


class DyadicStep:
    """Dense dyadic step function.

    ``DyadicStep([1, 2])`` is the function equal to 1 on [0, 1/2) and 2 on
    [1/2, 1).  Equality compares the functions, so ``[1, 2]`` equals
    ``[1, 1, 2, 2]``.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("values must be one-dimensional")
        check_rank(_rank_of_length(arr.size))
        if not np.all(np.isfinite(arr)):
            raise ValueError("values must be finite")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def rank(self) -> int:
        return self._values.size.bit_length() - 1

    def __len__(self) -> int:
        return self._values.size

    def __repr__(self) -> str:
        if self._values.size <= 8:
            return f"DyadicStep(rank={self.rank}, values={self._values.tolist()})"
        return f"DyadicStep(rank={self.rank}, ...)"

    # --- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c: float = 1.0, rank: int = 0) -> "DyadicStep":
        check_rank(rank)
        return cls(np.full(1 << rank, float(c)))

    @classmethod
    def zeros(cls, rank: int = 0) -> "DyadicStep":
        return cls.constant(0.0, rank)

    @classmethod
    def indicator(cls, a: float, b: float, value: float = 1.0) -> "DyadicStep":
        """``value`` times the indicator of [a, b); a and b must be dyadic."""
        if not 0.0 <= a <= b <= 1.0:
            raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b})")
        rank = max(dyadic_rank(a), dyadic_rank(b))
        n = 1 << check_rank(rank)
        vals = np.zeros(n)
        vals[int(round(a * n)):int(round(b * n))] = value
        return cls(vals)

    @classmethod
    def from_antiderivative(cls, F: Callable[[np.ndarray], np.ndarray], rank: int) -> "DyadicStep":
        """Exact cell averages ``2^n (F((i+1)/2^n) - F(i/2^n))`` of F'."""
        n = 1 << check_rank(rank)
        grid = np.arange(n + 1, dtype=float) / n
        Fv = np.asarray(F(grid), dtype=float)
        return cls(n * np.diff(Fv))

    @classmethod
    def power(cls, exponent: float, rank: int) -> "DyadicStep":
        """Cell averages of ``t**(-exponent)``, ``exponent < 1``."""
        if exponent >= 1.0:
            raise ValueError("t**(-a) is integrable only for a < 1")
        e = 1.0 - exponent
        return cls.from_antiderivative(lambda t: t ** e / e, rank)

    # --- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        return {"rank": self.rank, "values": [float(v) for v in self._values]}

    @classmethod
    def from_dict(cls, data: dict) -> "DyadicStep":
        try:
            rank = int(data["rank"])
            values = data["values"]
        except (KeyError, TypeError) as exc:
            raise ValueError("expected an object with 'rank' and 'values'") from exc
        if len(values) != 1 << rank:
            raise ValueError(f"rank {rank} requires {1 << rank} values, got {len(values)}")
        return cls(values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DyadicStep":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value"])
        for v in self._values:
            writer.writerow([repr(float(v))])
        return buf.getvalue()

    # --- calculus -----------------------------------------------------
    def integral(self) -> float:
        return integral(self)

    def refine(self, m: int) -> "DyadicStep":
        return refine(self, m)

    def coarsen(self, k: int) -> "DyadicStep":
        return coarsen(self, k)

    def __call__(self, t):
        """Point evaluation on [0, 1); cells are half-open."""
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.floor(t * len(self)).astype(int), 0, len(self) - 1)
        return self._values[idx]

    def __abs__(self) -> "DyadicStep":
        return DyadicStep(np.abs(self._values))

    def __neg__(self) -> "DyadicStep":
        return DyadicStep(-self._values)

    def __add__(self, other):
        if isinstance(other, DyadicStep):
            return pointwise(self, other, "add")
        return DyadicStep(self._values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DyadicStep):
            return pointwise(self, other, "sub")
        return DyadicStep(self._values - float(other))

    def __rsub__(self, other):
        return DyadicStep(float(other) - self._values)

    def __mul__(self, other):
        if isinstance(other, DyadicStep):
            return pointwise(self, other, "mul")
        return scale(self, float(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DyadicStep):
            return NotImplemented
        m = max(self.rank, other.rank)
        return bool(np.array_equal(refine(self, m).values, refine(other, m).values))

    __hash__ = None


def dyadic_rank(t: float) -> int:
    """Smallest n with ``t * 2^n`` an integer (floats are always dyadic)."""
    if t == 0:
        return 0
    num, den = float(t).as_integer_ratio()
    return den.bit_length() - 1


def refine(x: DyadicStep, m: int) -> DyadicStep:
    if m < x.rank:
        raise RankError(f"cannot refine rank {x.rank} down to {m}")
    if m == x.rank:
        return x
    check_rank(m)
    return DyadicStep(np.repeat(x.values, 1 << (m - x.rank)))


def _halve(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v[0::2] + v[1::2])


def coarsen(x: DyadicStep, k: int) -> DyadicStep:
    """Conditional expectation onto rank-``k`` cells.

    Averaging proceeds one level at a time, so ``coarsen(coarsen(x, k+1), k)``
    and ``coarsen(x, k)`` perform identical floating-point operations.
    """
    if not 0 <= k <= x.rank:
        raise RankError(f"coarsen target {k} outside [0, {x.rank}]")
    v = x.values
    for _ in range(x.rank - k):
        v = _halve(v)
    return DyadicStep(v)


def integral(x: DyadicStep) -> float:
    return float(coarsen(x, 0).values[0])


def scale(x: DyadicStep, lam: float) -> DyadicStep:
    return DyadicStep(lam * x.values)


_OPS = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


def pointwise(x: DyadicStep, y: DyadicStep | None, op: str, lam: float | None = None) -> DyadicStep:
    """Cellwise ``add``, ``sub``, ``mul`` at the common rank, or ``scale`` by ``lam``."""
    if op == "scale":
        if lam is None:
            raise ValueError("scale requires lam")
        return scale(x, lam)
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown pointwise op {op!r}") from None
    m = max(x.rank, y.rank)
    return DyadicStep(fn(refine(x, m).values, refine(y, m).values))


def inner(x: DyadicStep, y: DyadicStep) -> float:
    """The pairing <x, y> = integral of x*y over [0, 1]."""
    return integral(pointwise(x, y, "mul"))


@dataclass(frozen=True)
class MultiIndex:
    """Bit string addressing the dyadic interval of rank ``len(bits)``."""

    bits: tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("multi-index entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def position(self) -> int:
        pos = 0
        for b in self.bits:
            pos = 2 * pos + b
        return pos

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(self.bits + other.bits)

    def interval(self) -> tuple[float, float]:
        h = 2.0 ** -len(self)
        return self.position * h, (self.position + 1) * h

    @classmethod
    def from_position(cls, k: int, i: int) -> "MultiIndex":
        if not 0 <= i < 1 << k:
            raise ValueError(f"position {i} outside [0, 2^{k})")
        return cls(tuple((i >> (k - 1 - nu)) & 1 for nu in range(k)))

    @classmethod
    def all(cls, k: int) -> Iterator["MultiIndex"]:
        for i in range(1 << k):
            yield cls.from_position(k, i)


def _positions(seq, rank: int) -> np.ndarray:
    if rank <= _INT64_RANK:
        return np.asarray(seq, dtype=np.int64)
    return np.array([int(p) for p in seq], dtype=object)


class SparseStep:
    """Nonzero cells of a rank-``n`` step function, stored as (position, value).

    Positions are int64 up to rank 62 and Python integers beyond, so ranks are
    limited only by the float range of the cell measure ``2^-n``.
    """

    __slots__ = ("rank", "positions", "values")

    def __init__(self, rank: int, positions, values):
        if rank < 0:
            raise RankError("rank must be nonnegative")
        vals = np.asarray(values, dtype=float)
        pos = _positions(positions, rank)
        if pos.shape != vals.shape or vals.ndim != 1:
            raise ValueError("positions and values must be matching 1-D arrays")
        keep = vals != 0.0
        if not keep.all():
            pos, vals = pos[keep], vals[keep]
        order = np.argsort(pos, kind="stable")
        self.rank = int(rank)
        self.positions = pos[order]
        self.values = vals[order]
        self.positions.flags.writeable = False
        self.values.flags.writeable = False

    @classmethod
    def from_dense(cls, x: DyadicStep) -> "SparseStep":
        idx = np.flatnonzero(x.values)
        return cls(x.rank, idx, x.values[idx])

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def support_measure(self) -> float:
        return math.ldexp(self.nnz, -self.rank)

    def __repr__(self) -> str:
        return f"SparseStep(rank={self.rank}, nnz={self.nnz})"

    def to_dense(self) -> DyadicStep:
        n = 1 << check_rank(self.rank)
        out = np.zeros(n)
        out[self.positions.astype(np.int64)] = self.values
        return DyadicStep(out)

    def refine(self, m: int) -> "SparseStep":
        if m < self.rank:
            raise RankError(f"cannot refine rank {self.rank} down to {m}")
        if m == self.rank:
            return self
        s = m - self.rank
        base = _positions(self.positions, m) * (1 << s)
        offsets = _positions(range(1 << s), m)
        pos = (base[:, None] + offsets[None, :]).ravel()
        return SparseStep(m, pos, np.repeat(self.values, 1 << s))

    def coarsen(self, k: int) -> "SparseStep":
        """Cell averages at rank ``k``; missing children count as zeros."""
        if not 0 <= k <= self.rank:
            raise RankError(f"coarsen target {k} outside [0, {self.rank}]")
        if k == self.rank:
            return self
        s = self.rank - k
        parents = self.positions >> s if self.positions.dtype != object else \
            np.array([p >> s for p in self.positions], dtype=object)
        uniq, inv = np.unique(parents, return_inverse=True)
        sums = np.bincount(inv.ravel(), weights=self.values, minlength=uniq.size)
        return SparseStep(k, uniq, np.ldexp(sums, -s))

    def scaled(self, lam: float) -> "SparseStep":
        return SparseStep(self.rank, self.positions, lam * self.values)


class CellSum:
    """Finite sum of ``value * indicator(cell)`` over cells of mixed ranks.

    Contributions to the same cell accumulate.  :meth:`leaves` resolves the sum
    into disjoint cells, each leaf value being the sum of the contributions on
    its root path taken in order of increasing rank.
    """

    def __init__(self):
        self._atoms: dict[tuple[int, int], float] = {}

    def add(self, rank: int, positions: Sequence[int], values: Sequence[float]) -> "CellSum":
        atoms = self._atoms
        for p, v in zip(positions, values):
            v = float(v)
            if v == 0.0:
                continue
            key = (int(rank), int(p))
            atoms[key] = atoms.get(key, 0.0) + v
        return self

    def add_step(self, x: DyadicStep | SparseStep, sign: float = 1.0) -> "CellSum":
        if isinstance(x, DyadicStep):
            x = SparseStep.from_dense(x)
        return self.add(x.rank, x.positions, sign * x.values)

    @property
    def max_rank(self) -> int:
        return max((k for k, _ in self._atoms), default=0)

    def leaves(self) -> tuple[np.ndarray, np.ndarray]:
        """Disjoint leaf cells as arrays ``(ranks, values)``; they tile [0, 1)."""
        internal: set[tuple[int, int]] = set()
        for k, p in self._atoms:
            while k > 0:
                k, p = k - 1, p >> 1
                if (k, p) in internal:
                    break
                internal.add((k, p))
        ranks, values = [], []
        stack = [(0, 0, 0.0)]
        atoms = self._atoms
        while stack:
            k, p, acc = stack.pop()
            acc = acc + atoms.get((k, p), 0.0)
            if (k, p) in internal:
                stack.append((k + 1, 2 * p + 1, acc))
                stack.append((k + 1, 2 * p, acc))
            else:
                ranks.append(k)
                values.append(acc)
        return np.array(ranks, dtype=np.int64), np.array(values, dtype=float)

    def to_dense(self, rank: int | None = None) -> DyadicStep:
        rank = self.max_rank if rank is None else rank
        if rank < self.max_rank:
            raise RankError(f"rank {rank} is below the finest contribution {self.max_rank}")
        n = 1 << check_rank(rank)
        out = np.empty(n)
        start = 0
        # the leaf traversal is left to right, so leaves fill consecutive ranges
        for k, v in zip(*self.leaves()):
            width = 1 << (rank - int(k))
            out[start:start + width] = v
            start += width
        return DyadicStep(out)
