"""Frame checking and the constructive greedy expansion engine.

The greedy engine produces x = sum_k sum_alpha xi_alpha V^alpha f.  Each round
replaces the rank-k residual r = sum c_beta V^beta 1 by
sum c_beta V^beta (1 - lam f), which is equimeasurable with c (x) (1 - lam f)
and so shrinks by ||1 - lam f||_M(X).  Residuals are sparse: for a generator
of rank n the rank grows by n per round, well beyond any dense array.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._golden import expand_bracket, golden_section, pow2_exponent
from .dyadic import CellSum, DyadicStep, SparseStep, check_rank, integral, max_rank
from .errors import ContractionViolation, NoContractionError, PreconditionError
from .multiplicator import multiplicator_lower, multiplicator_upper, require_decreasing
from .operators import adjoint_project, synthesize_sparse
from .rearrange import WeightedStep, dilation
from .spaces import Lp, SymmetricSpace, dual_space

# ranks beyond this push cell measures 2^-rank into subnormal floats
SPARSE_RANK_CAP = 1000
CONTRACTION_SLACK = 1e-9
TRACE_COLUMNS = ("round", "rank", "residual_norm", "block_mass", "ratio", "truncation_error")


# --- coefficient blocks -----------------------------------------------------

@dataclass
class CoefficientBlocks:
    """Per-rank coefficient blocks ``xi_alpha`` stored sparsely by position."""

    start_rank: int = 0
    blocks: dict[int, SparseStep] = field(default_factory=dict)
    norms: dict[int, float] = field(default_factory=dict)

    def add(self, block: SparseStep, block_norm: float) -> None:
        """Store a block; a rank already present is replaced, so merge first."""
        self.blocks[block.rank] = block
        self.norms[block.rank] = float(block_norm)

    def merged(self, block: SparseStep) -> SparseStep:
        """``block`` plus whatever is already stored at its rank."""
        old = self.blocks.get(block.rank)
        return block if old is None else _sparse_sum(old, block)

    @property
    def ranks(self) -> list[int]:
        return sorted(self.blocks)

    @property
    def mass(self) -> float:
        return float(sum(self.norms[k] for k in self.ranks))

    def dense(self, k: int) -> np.ndarray:
        check_rank(k)
        out = np.zeros(1 << k)
        b = self.blocks.get(k)
        if b is not None:
            out[b.positions.astype(np.int64)] = b.values
        return out

    def to_dict(self) -> dict:
        return {
            "start_rank": self.start_rank,
            "mass": self.mass,
            "blocks": [
                {
                    "rank": k,
                    "norm": self.norms[k],
                    "positions": [int(p) for p in self.blocks[k].positions],
                    "values": [float(v) for v in self.blocks[k].values],
                }
                for k in self.ranks
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientBlocks":
        out = cls(start_rank=int(data.get("start_rank", 0)))
        for b in data["blocks"]:
            out.add(SparseStep(int(b["rank"]), b["positions"], b["values"]), float(b["norm"]))
        return out


def _sparse_sum(a: SparseStep, b: SparseStep, sign: float = 1.0) -> SparseStep:
    m = max(a.rank, b.rank)
    a, b = a.refine(m), b.refine(m)
    pos = np.concatenate([a.positions, b.positions])
    vals = np.concatenate([a.values, sign * b.values])
    if pos.size == 0:
        return SparseStep(m, [], [])
    uniq, inv = np.unique(pos, return_inverse=True)
    return SparseStep(m, uniq, np.bincount(inv.ravel(), weights=vals, minlength=uniq.size))


def _as_sparse(x) -> SparseStep:
    return x if isinstance(x, SparseStep) else SparseStep.from_dense(x)


def _block_cells(f: DyadicStep, blocks: CoefficientBlocks, cs: CellSum | None = None,
                 sign: float = 1.0) -> CellSum:
    cs = CellSum() if cs is None else cs
    for k in blocks.ranks:
        cs.add_step(synthesize_sparse(blocks.blocks[k], f), sign)
    return cs


def reconstruct(f: DyadicStep, blocks: CoefficientBlocks) -> DyadicStep:
    """Dense sum of xi_alpha V^alpha f over all blocks; RankError beyond the cap."""
    if not blocks.blocks:
        return DyadicStep.zeros(0)
    rank = max(blocks.ranks) + f.rank
    check_rank(rank)
    return _block_cells(f, blocks).to_dense(rank)


def _cells_rearrangement(cs: CellSum) -> WeightedStep:
    ranks, values = cs.leaves()
    return WeightedStep.from_cells(np.abs(values), np.ldexp(1.0, -ranks))


def reconstruction_error(space: SymmetricSpace, f: DyadicStep, x, blocks: CoefficientBlocks) -> float:
    """||x - reconstruct(f, blocks)||_X without densifying (exact cell resolution)."""
    cs = CellSum().add_step(_as_sparse(x))
    _block_cells(f, blocks, cs, sign=-1.0)
    return space._norm(_cells_rearrangement(cs))


# --- frame check ------------------------------------------------------------

@dataclass
class FrameReport:
    A_observed: float
    B_observed: float
    A_theory: float
    B_theory: float
    samples: int
    K_max: int
    ratios: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "A_observed": self.A_observed,
            "B_observed": self.B_observed,
            "A_theory": self.A_theory,
            "B_theory": self.B_theory,
            "samples": self.samples,
            "K_max": self.K_max,
            "ratios": list(self.ratios),
        }


def _frame_samples(rng: np.random.Generator, samples: int, max_sample_rank: int):
    for s in range(samples):
        r = int(rng.integers(0, max_sample_rank + 1))
        v = np.sort(rng.exponential(size=1 << r))[::-1]
        if s % 2 == 1:
            v = rng.permutation(v) * rng.choice([-1.0, 1.0], size=v.size)
        yield DyadicStep(v)


def frame_ratio(space: SymmetricSpace, f: DyadicStep, y: DyadicStep, K_max: int) -> float:
    """sup_{k <= K_max} ||P*_k y||_X* / ||y||_X*."""
    dual = dual_space(space)
    ny = dual.norm(y)
    return max(dual.norm(adjoint_project(f, k, y)) for k in range(K_max + 1)) / ny


def frame_check(space: SymmetricSpace, f: DyadicStep, samples: int = 32, K_max: int = 12,
                seed: int = 0, upper_budget: int = 200) -> FrameReport:
    """Observed frame constants over seeded random dual elements y.

    Even samples are nonnegative and decreasing, odd ones are signed
    permutations, all of rank <= min(K_max, 8).
    """
    mean = integral(f)
    if mean == 0.0:
        raise PreconditionError("generator must have nonzero integral")
    dual_space(space)
    rng = np.random.default_rng(seed)
    ratios = [frame_ratio(space, f, y, K_max) for y in _frame_samples(rng, samples, min(K_max, 8))]
    B_theory = multiplicator_upper(space, f, budget=upper_budget, seed=seed).upper
    return FrameReport(min(ratios), max(ratios), abs(mean), B_theory, samples, K_max, ratios)


# --- contraction factor -----------------------------------------------------

def _one_minus(lam: float, f: DyadicStep) -> DyadicStep:
    return DyadicStep(1.0 - lam * f.values)


def contraction_norm(space: SymmetricSpace, g: DyadicStep, grid_rank: int = 12, seed: int = 0) -> float:
    """||g||_X on L_p (where it equals ||g||_M) and the certified M(X) lower estimate elsewhere."""
    if isinstance(space, Lp):
        return space.norm(g)
    return multiplicator_lower(space, g, grid_rank=grid_rank, seed=seed)[0]


def find_lambda(space: SymmetricSpace, f: DyadicStep, grid_rank: int = 12, seed: int = 0,
                xtol: float = 1e-12) -> tuple[float, float]:
    """Minimize the convex map lam -> contraction_norm(1 - lam f); returns ``(lam*, theta)``.

    Golden section only resolves lam* to about sqrt(machine eps) near a smooth
    minimum.  The points lam = 1/f_j, where a cell of 1 - lam f vanishes, are
    tried as well and preferred on ties: an exact zero keeps greedy residuals
    sparse.
    """
    mean = integral(f)
    if mean == 0.0:
        raise PreconditionError("generator must have nonzero integral")

    # search in mu = lam 2^e against f 2^-e; both rescalings are exact
    e = pow2_exponent(f.values)
    fs = DyadicStep(np.ldexp(f.values, -e))

    def g(mu):
        return contraction_norm(space, _one_minus(mu, fs), grid_rank, seed)

    guess = 1.0 / float(np.mean(fs.values))
    a, b, _ = expand_bracket(g, guess - 2.0 * abs(guess), guess + 2.0 * abs(guess))
    mu, theta, _ = golden_section(g, a, b, xtol=xtol)
    for v in np.unique(fs.values[fs.values != 0.0]):
        kink = 1.0 / float(v)
        if a <= kink <= b:
            gk = g(kink)
            if gk <= theta:
                mu, theta = kink, gk
    with np.errstate(over="ignore"):
        lam = float(np.ldexp(mu, -e))
    if not math.isfinite(lam):
        raise PreconditionError("generator too small: the optimal lambda overflows")
    return lam, float(theta)


# --- greedy engine ----------------------------------------------------------

@dataclass
class GreedyResult:
    blocks: CoefficientBlocks
    trace: list[dict]
    status: str
    lam: float
    theta: float
    target_norm: float
    residual_norm: float
    generator_rank: int
    truncation_total: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.trace)

    @property
    def mass(self) -> float:
        return self.blocks.mass

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "lambda": self.lam,
            "theta": self.theta,
            "target_norm": self.target_norm,
            "residual_norm": self.residual_norm,
            "rounds": self.rounds,
            "mass": self.mass,
            "generator_rank": self.generator_rank,
            "truncation_total": self.truncation_total,
            "warnings": list(self.warnings),
        }

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.trace:
            w.writerow([row[c] if isinstance(row[c], int) else repr(float(row[c])) for c in TRACE_COLUMNS])
        return buf.getvalue()


def _choose_rank(r: SparseStep, k0: int, g_rank: int, g_nnz: int, budget: int) -> int:
    k = max(k0, r.rank)
    while k + g_rank > SPARSE_RANK_CAP and k > 0:
        k -= 1
    while k > 0:
        nnz = r.coarsen(k).nnz if k < r.rank else r.nnz << max(0, k - r.rank)
        if nnz * g_nnz <= budget:
            break
        k -= 1
    return k


def greedy_decompose(space: SymmetricSpace, f: DyadicStep, x, tol: float = 1e-6,
                     max_rounds: int = 200, k0: int = 0, lam: float | None = None,
                     seed: int = 0, cell_budget: int | None = None,
                     check_upper: bool = True, strict: bool = True) -> GreedyResult:
    """Greedy absolutely representing expansion of x in {V^alpha f}_{|alpha| >= k0}.

    Round m uses rank k_m = max(k0, rank r_m), emits the block lam* c at that
    rank and replaces r_m by sum c_beta V^beta (1 - lam* f) plus whatever
    detail r_m - E_{k_m} r_m the cell budget forced to leave behind.

    Raises NoContractionError when theta >= 1 (a representation may still
    exist, but this scheme does not construct it) and ContractionViolation
    when an untruncated round shrinks by less than theta.  With
    ``strict=False`` violations are recorded as warnings and the run goes on.
    """
    if k0 < 0:
        raise ValueError("k0 must be nonnegative")
    mean = integral(f)
    if mean == 0.0:
        raise PreconditionError("generator must have nonzero integral")
    warnings: list[str] = []
    if lam is None:
        lam, theta = find_lambda(space, f, seed=seed)
    else:
        theta = contraction_norm(space, _one_minus(lam, f), seed=seed)
    if not theta < 1.0:
        raise NoContractionError(
            f"no certified contraction: theta = {theta:.12g} >= 1 at lambda = {lam:.12g}; "
            "a representation may still exist, but none is constructed",
            lam=lam, theta=theta)
    g = _one_minus(lam, f)
    if check_upper and not isinstance(space, Lp):
        up = multiplicator_upper(space, g, budget=200, seed=seed).upper
        if up >= 1.0:
            warnings.append(f"heuristic upper estimate {up:.6g} of ||1 - lam f||_M is >= 1; "
                            "contraction certified by the lower estimate only")

    budget = (1 << max_rank()) if cell_budget is None else cell_budget
    g_nnz = int(np.count_nonzero(g.values))
    r = _as_sparse(x)
    x_norm = space.norm(r)
    r_norm = x_norm
    blocks = CoefficientBlocks(start_rank=k0)
    trace: list[dict] = []
    trunc_total = 0.0
    status = "max_rounds"
    for m in range(max_rounds + 1):
        if r_norm <= tol * x_norm:
            status = "converged"
            break
        if m == max_rounds:
            break
        k = _choose_rank(r, k0, g.rank, g_nnz, budget)
        if k >= r.rank:
            c, detail = r.refine(k), None
            trunc_err = 0.0
        else:
            c = r.coarsen(k)
            detail = _sparse_sum(r, c.refine(r.rank), sign=-1.0)
            trunc_err = space.norm(detail)
            trunc_total += trunc_err
        block = c.scaled(lam)
        b_norm = space.norm(synthesize_sparse(block, f))
        if k in blocks.blocks:
            merged = blocks.merged(block)
            blocks.add(merged, space.norm(synthesize_sparse(merged, f)))
        else:
            blocks.add(block, b_norm)
        new_r = synthesize_sparse(c, g)
        if detail is not None:
            new_r = _sparse_sum(new_r, detail)
        new_norm = space.norm(new_r)
        ratio = new_norm / r_norm
        trace.append({"round": m, "rank": k, "residual_norm": new_norm, "block_mass": b_norm,
                      "ratio": ratio, "truncation_error": trunc_err})
        if detail is None and ratio > theta + CONTRACTION_SLACK:
            msg = f"round {m}: residual ratio {ratio:.12g} exceeds theta = {theta:.12g}"
            if strict:
                raise ContractionViolation(msg, trace=trace)
            warnings.append(msg)
        r, r_norm = new_r, new_norm
        if detail is not None and ratio >= 1.0:
            # the detail left behind has zero rank-k averages, so later rounds cannot reach it
            warnings.append(f"round {m}: truncated round did not shrink the residual; stopping")
            break
    if status != "converged" and trunc_total > 0.0:
        status = "truncated"
    elif trunc_total > 0.0:
        warnings.append("cell budget forced truncated rounds; contraction not certified for those")
    return GreedyResult(blocks, trace, status, float(lam), float(theta), x_norm, r_norm,
                        f.rank, trunc_total, warnings)


# --- derived checks ----------------------------------------------------------

@dataclass
class TailReport:
    k0_list: list[int]
    constants: list[float]
    statuses: list[str]

    @property
    def C(self) -> float:
        return max(self.constants) if self.constants else float("nan")

    @property
    def spread(self) -> float:
        """Relative gap between the largest and smallest constant."""
        return max(self.constants) / min(self.constants) - 1.0

    def to_dict(self) -> dict:
        return {"k0": list(self.k0_list), "constants": list(self.constants),
                "statuses": list(self.statuses), "C": self.C, "spread": self.spread}


def tail_system_check(space: SymmetricSpace, f: DyadicStep, x, k0_list=(0, 1, 2, 3),
                      tol: float = 1e-6, **kwargs) -> TailReport:
    """Mass constants ``mass / ||x||`` of greedy expansions started at each rank k0."""
    lam, _ = find_lambda(space, f, seed=kwargs.get("seed", 0))
    constants, statuses = [], []
    for k0 in k0_list:
        res = greedy_decompose(space, f, x, tol=tol, k0=k0, lam=lam, **kwargs)
        constants.append(res.mass / res.target_norm)
        statuses.append(res.status)
    return TailReport(list(k0_list), constants, statuses)


@dataclass
class NecessaryReport:
    verdict: str
    C_claim: float
    curve: list[tuple[int, float]]

    @property
    def max_ratio(self) -> float:
        return max(r for _, r in self.curve)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "C_claim": self.C_claim, "max_ratio": self.max_ratio,
                "curve": [[j, r] for j, r in self.curve]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "ratio"])
        for j, r in self.curve:
            w.writerow([j, repr(r)])
        return buf.getvalue()


def necessary_condition_curve(space: SymmetricSpace, f, grid_rank: int = 14) -> list[tuple[int, float]]:
    """j -> ||sigma_t f||_X / (|<f, 1>| phi_X(t)) at t = 2^-j, for f = f*."""
    fs = require_decreasing(f)
    mean = fs.integral()
    if mean == 0.0:
        raise PreconditionError("generator must have nonzero integral")
    out = []
    for j in range(grid_rank + 1):
        t = math.ldexp(1.0, -j)
        out.append((j, space._norm(dilation(fs, t)) / (mean * space.fundamental(t))))
    return out


def necessary_condition_check(space: SymmetricSpace, f, C_claim: float, grid_rank: int = 14) -> NecessaryReport:
    """Test ||sigma_t f|| <= 2 C |<f, 1>| phi_X(t) on dyadic t; pass iff every ratio <= 1 + 1e-9."""
    if not C_claim > 0:
        raise ValueError("C_claim must be positive")
    curve = [(j, r / (2.0 * C_claim)) for j, r in necessary_condition_curve(space, f, grid_rank)]
    verdict = "pass" if all(r <= 1.0 + 1e-9 for _, r in curve) else "fail"
    return NecessaryReport(verdict, C_claim, curve)
