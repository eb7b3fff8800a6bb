"""Dyadic dilation systems in rearrangement-invariant spaces on [0, 1].

Exact step-function arithmetic, symmetric norms, multiplicator estimates, frame
checks and a greedy engine building absolutely representing expansions in
{V^alpha f}.
"""

__version__ = "0.1.0"

from .dyadic import CellSum, DyadicStep, MultiIndex, SparseStep, coarsen, inner, integral, refine
from .errors import (
    ContractionViolation,
    DyadrepError,
    NoContractionError,
    PreconditionError,
    RankError,
    UnsupportedDualError,
)
from .multiplicator import lorentz_membership, multiplicator_lower, multiplicator_upper
from .operators import DilationSystem, adjoint_project, apply_V, apply_V_alpha, apply_W_power, project, synthesize
from .rearrange import WeightedStep, dilation, equimeasurable, rearrangement, tensor_rearrangement
from .represent import (
    CoefficientBlocks,
    find_lambda,
    frame_check,
    greedy_decompose,
    necessary_condition_check,
    reconstruct,
    reconstruction_error,
    tail_system_check,
)
from .smoothness import lorentz_witness, min_over_lambda, smoothness_probe
from .spaces import (
    ExpOrlicz,
    LogPower,
    Lorentz,
    Lp,
    Marcinkiewicz,
    Orlicz,
    Power,
    PowerOrlicz,
    SlowLog,
    dual_norm,
    fundamental_function,
    norm,
    parse_space,
    submultiplicativity_constant,
)
