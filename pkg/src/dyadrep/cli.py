"""Command-line experiment runner.

Function arguments (``--input``, ``--generator``, ``--target``) accept a JSON
file or a preset:

    const:C[:RANK]        constant C
    box:T:H               H on [0, T), 0 elsewhere (T dyadic)
    power:A:RANK          cell averages of t^-A
    random:RANK:SEED      standard normal cell values
    witness:PHI...        two-valued generator separating 1 and phi' (e.g. witness:power:2)
    phiprime:PHI...:RANK  cell averages of phi' (e.g. phiprime:power:2:12)
    shells:EXP:DEPTH      nonincreasing staircase (1 + i)^EXP on [2^-(i+1), 2^-i)

Exit codes: 0 success, 2 bad input or precondition, 3 no contraction,
4 truncated greedy run, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dyadic import DyadicStep, max_rank
from .errors import DyadrepError, NoContractionError, PreconditionError, UnsupportedDualError
from .multiplicator import lorentz_membership, multiplicator_upper
from .rearrange import WeightedStep
from .represent import frame_check, greedy_decompose, necessary_condition_check, reconstruction_error
from .smoothness import lorentz_witness, min_over_lambda, smoothness_probe
from .spaces import Lorentz, norm, parse_phi, parse_space, submultiplicativity_constant

SCHEMA_VERSION = 1

EXIT_OK, EXIT_OTHER, EXIT_PRECONDITION, EXIT_NO_CONTRACTION, EXIT_TRUNCATED = 0, 1, 2, 3, 4


def parse_function(text: str):
    """Resolve a preset string or a JSON file into a DyadicStep or WeightedStep."""
    parts = text.split(":")
    kind = parts[0].lower()
    args = parts[1:]
    try:
        if kind == "const":
            return DyadicStep.constant(float(args[0]), int(args[1]) if len(args) > 1 else 0)
        if kind == "box":
            t, h = float(args[0]), float(args[1])
            return DyadicStep.indicator(0.0, t, h)
        if kind == "power":
            return DyadicStep.power(float(args[0]), int(args[1]))
        if kind == "random":
            rank, seed = int(args[0]), int(args[1])
            return DyadicStep(np.random.default_rng(seed).standard_normal(1 << rank))
        if kind == "witness":
            return lorentz_witness(parse_phi(args))
        if kind == "phiprime":
            return parse_phi(args[:-1]).derivative_averages(int(args[-1]))
        if kind == "shells":
            ex, depth = float(args[0]), int(args[1])
            return WeightedStep.shells((1.0 + np.arange(depth)) ** ex, (1.0 + depth) ** ex)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad preset {text!r}: {exc}") from None
    path = Path(text)
    if not path.is_file():
        raise ValueError(f"{text!r} is neither a preset nor a readable file")
    data = json.loads(path.read_text())
    if isinstance(data, list):
        return WeightedStep([p[0] for p in data], [p[1] for p in data])
    return DyadicStep.from_dict(data)


def _dense(fn, what: str) -> DyadicStep:
    if not isinstance(fn, DyadicStep):
        raise PreconditionError(f"{what} must be a dyadic step function")
    return fn


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _report(args, command: str, result: dict) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "command")}
    config["max_rank"] = max_rank()
    return {"schema_version": SCHEMA_VERSION, "version": __version__, "command": command,
            "config": config, "result": result}


def _write(out: str | None, files: dict[str, str]) -> None:
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (d / name).write_text(text)


def _emit(args, command: str, result: dict, extra: dict[str, str] | None = None) -> dict:
    report = _report(args, command, result)
    files = {"report.json": dumps(report)}
    files.update(extra or {})
    _write(args.out, files)
    return report


# --- subcommands ------------------------------------------------------------

def cmd_norm(args) -> int:
    space = parse_space(args.space)
    value = norm(space, parse_function(args.input))
    print(f"{value:.12f}")
    _emit(args, "norm", {"norm": value})
    return EXIT_OK


def cmd_decompose(args) -> int:
    space = parse_space(args.space)
    f = _dense(parse_function(args.generator), "generator")
    x = _dense(parse_function(args.target), "target")
    try:
        res = greedy_decompose(space, f, x, tol=args.tol, max_rounds=args.max_rounds,
                               k0=args.k0, seed=args.seed)
    except NoContractionError as exc:
        result = {"status": "no-contraction", "lambda": exc.lam, "theta": exc.theta,
                  "note": "a representation may still exist; none is constructed"}
        _emit(args, "decompose", result)
        print(f"no-contraction: theta = {exc.theta:.12g}", file=sys.stderr)
        return EXIT_NO_CONTRACTION
    result = res.to_dict()
    result["reconstruction_error"] = reconstruction_error(space, f, x, res.blocks)
    _emit(args, "decompose", result, {
        "blocks.json": dumps(res.blocks.to_dict()),
        "trace.csv": res.trace_csv(),
    })
    print(f"{res.status}: {res.rounds} rounds, residual {res.residual_norm:.6e}, mass {res.mass:.12g}")
    return EXIT_TRUNCATED if res.status == "truncated" else EXIT_OK


def cmd_frame_check(args) -> int:
    space = parse_space(args.space)
    f = _dense(parse_function(args.generator), "generator")
    rep = frame_check(space, f, samples=args.samples, K_max=args.k_max, seed=args.seed,
                      upper_budget=args.budget)
    _emit(args, "frame-check", rep.to_dict())
    print(f"A_observed = {rep.A_observed:.12g}  B_observed = {rep.B_observed:.12g}")
    return EXIT_OK


def cmd_multiplicator(args) -> int:
    space = parse_space(args.space)
    f = parse_function(args.generator)
    est = multiplicator_upper(space, f, budget=args.budget, seed=args.seed, grid_rank=args.grid_rank)
    _emit(args, "multiplicator", est.to_dict())
    print(f"lower = {est.lower:.12g}  upper = {est.upper:.12g}")
    return EXIT_OK


def cmd_smoothness(args) -> int:
    space = parse_space(args.space)
    if args.generator is not None:
        f = _dense(parse_function(args.generator), "generator")
    elif isinstance(space, Lorentz):
        f = lorentz_witness(space.phi)
    else:
        raise PreconditionError("--generator is required outside Lorentz spaces")
    mn = min_over_lambda(space, f, scan_width=args.scan_width)
    candidates = [DyadicStep.constant(1.0)]
    if isinstance(space, Lorentz):
        candidates.append(space.phi.derivative_averages(args.rank))
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        v = rng.exponential(size=1 << args.rank)
        candidates.append(DyadicStep(v / v.mean()))
    probe = smoothness_probe(space, candidates)
    _emit(args, "smoothness", {"min_over_lambda": mn.to_dict(), "probe": probe.to_dict(),
                               "generator": f.to_dict()})
    print(f"min ||1 - lam f|| = {mn.value:.12g}  non_smooth = {str(probe.non_smooth).lower()}")
    return EXIT_OK


def cmd_necessary(args) -> int:
    space = parse_space(args.space)
    rep = necessary_condition_check(space, parse_function(args.generator), args.c_claim, args.grid_rank)
    _emit(args, "necessary", rep.to_dict(), {"curve.csv": rep.to_csv()})
    print(f"{rep.verdict}: max ratio {rep.max_ratio:.12g}")
    return EXIT_OK


def cmd_membership(args) -> int:
    phi = parse_phi(args.phi.split(":"))
    rep = lorentz_membership(phi, parse_function(args.generator), args.grid_rank)
    _emit(args, "membership", rep.to_dict(), {"curve.csv": rep.to_csv()})
    print(rep.verdict)
    return EXIT_OK


def cmd_submult(args) -> int:
    phi = parse_phi(args.phi.split(":"))
    rep = submultiplicativity_constant(phi, args.grid_rank, args.refinements)
    _emit(args, "submult", rep.to_dict())
    print(f"C_best = {rep.C_best:.12g}  unbounded_trend = {str(rep.unbounded_trend).lower()}")
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyadrep", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, space=True, seed=True):
        sp = sub.add_parser(name, help=help_text)
        if space:
            sp.add_argument("--space", required=True, help="e.g. lp:2, lorentz:power:2, orlicz:exp:1")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="directory for report files")
        sp.set_defaults(func=func)
        return sp

    sp = add("norm", cmd_norm, "norm of a step function", seed=False)
    sp.add_argument("--input", required=True)

    sp = add("decompose", cmd_decompose, "greedy expansion in the dilation system")
    sp.add_argument("--generator", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--max-rounds", type=int, default=200)
    sp.add_argument("--k0", type=int, default=0)

    sp = add("frame-check", cmd_frame_check, "observed frame constants")
    sp.add_argument("--generator", required=True)
    sp.add_argument("--samples", type=int, default=32)
    sp.add_argument("--k-max", type=int, default=12)
    sp.add_argument("--budget", type=int, default=200)

    sp = add("multiplicator", cmd_multiplicator, "multiplicator norm bounds")
    sp.add_argument("--generator", required=True)
    sp.add_argument("--grid-rank", type=int, default=12)
    sp.add_argument("--budget", type=int, default=400)

    sp = add("smoothness", cmd_smoothness, "distance from 1 and norming functionals at 1")
    sp.add_argument("--generator", default=None)
    sp.add_argument("--scan-width", type=float, default=1e3)
    sp.add_argument("--rank", type=int, default=12, help="rank of candidate dual elements")
    sp.add_argument("--random", type=int, default=4, help="number of random candidates")

    sp = add("necessary", cmd_necessary, "dilation-ratio necessary condition", seed=False)
    sp.add_argument("--generator", required=True)
    sp.add_argument("--c-claim", type=float, default=1.0)
    sp.add_argument("--grid-rank", type=int, default=14)

    sp = add("membership", cmd_membership, "Lorentz multiplicator membership trend", space=False, seed=False)
    sp.add_argument("--phi", required=True, help="e.g. power:2, slowlog")
    sp.add_argument("--generator", required=True)
    sp.add_argument("--grid-rank", type=int, default=14)

    sp = add("submult", cmd_submult, "submultiplicativity constant of phi", space=False, seed=False)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--grid-rank", type=int, default=6)
    sp.add_argument("--refinements", type=int, default=3)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoContractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONTRACTION
    except (PreconditionError, UnsupportedDualError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DyadrepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
