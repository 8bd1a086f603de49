"""Command-line interface: repair pairs, run suites, export counterexamples.

Exit codes: 0 success, 1 a verification or certification failure, 2 bad input
(unreadable files, malformed JSON, contract violations). The default seed
comes from the FIXFORGE_SEED environment variable when set.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import classical, counterexamples, fixers, harness, serialize
from .classical import ProbabilityVector
from .errors import (
    CertificationError,
    FixforgeError,
    GapViolated,
    GenerationFailed,
    NoConvergence,
    OperatorInequalityViolated,
    TooFarFromNT,
    TooFarFromT,
)
from .quantum import DensityMatrix, PureState

VERIFICATION_ERRORS = (
    CertificationError,
    GapViolated,
    GenerationFailed,
    NoConvergence,
    OperatorInequalityViolated,
    TooFarFromNT,
    TooFarFromT,
)

COUNTEREXAMPLE_NAMES = (
    "tridiagonal", "classical", "quantum", "bipartite", "change-both", "optimality",
)


def _env_seed() -> int:
    raw = os.environ.get("FIXFORGE_SEED", "").strip()
    return int(raw) if raw else 0


def _parse_dims(text: str, suite: str) -> list:
    """Parse "2..8", "2,4,8", or bipartite "2x3,3x2" into a dims list."""
    dims: list = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo_text, hi_text = token.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError(f"empty dimension range {token!r}")
            span = range(lo, hi + 1)
            if suite == "local_pure":
                dims.extend((d, d) for d in span)
            else:
                dims.extend(span)
        elif "x" in token:
            a_text, b_text = token.split("x", 1)
            dims.append((int(a_text), int(b_text)))
        else:
            d = int(token)
            dims.append((d, d) if suite == "local_pure" else d)
    if not dims:
        raise ValueError("--dims parsed to an empty list")
    return dims


def _parse_eps(text: str) -> list[float]:
    eps = [float(token) for token in text.split(",") if token.strip()]
    if not eps:
        raise ValueError("--eps parsed to an empty list")
    return eps


def _emit(record: dict, out: str | None) -> None:
    if out:
        serialize.save(record, out)
    else:
        print(serialize.dumps(record))


def _decode_stochastic_payload(raw):
    if isinstance(raw, dict) and raw.get("kind") == "stochastic":
        return serialize.decode_stochastic(raw["columns"])
    if isinstance(raw, list):
        return serialize.decode_stochastic(raw)
    raise ValueError("a stochastic channel must be a column list or kind=stochastic record")


def _cmd_fix(args: argparse.Namespace) -> int:
    state = serialize.decode_state(serialize.load(args.state))
    raw_channel = serialize.load(args.channel)

    if args.fix_class == "classical":
        if not isinstance(state, ProbabilityVector):
            raise ValueError("the classical fixer needs a type=probability state")
        transfer = _decode_stochastic_payload(raw_channel)
        q, s, cert = classical.fix_classical(state, transfer, epsilon=args.eps)
        _emit(serialize.encode_classical_fix(q, s, cert), args.out)
        return 0 if cert.residual <= 1e-10 else 1

    expected = PureState if args.fix_class == "local_pure" else DensityMatrix
    if not isinstance(state, expected):
        raise ValueError(
            f"the {args.fix_class} fixer needs a {expected.__name__} state record"
        )
    channel = serialize.decode_channel(raw_channel)
    runner = {
        "general": fixers.fix_general,
        "unitary": fixers.fix_unitary,
        "mixed_unitary": fixers.fix_mixed_unitary,
        "unital": fixers.fix_unital,
        "local_pure": fixers.fix_local_pure,
    }[args.fix_class]
    result = runner(state, channel, epsilon=args.eps)
    _emit(serialize.encode_fix_result(result), args.out)
    return 0 if result.fixed_point_residual <= args.tol else 1


def _cmd_verify(args: argparse.Namespace) -> int:
    seed = _env_seed() if args.seed is None else args.seed
    dims = _parse_dims(args.dims, args.suite) if args.dims else None
    eps = _parse_eps(args.eps) if args.eps else None
    report = harness.run_suite(
        args.suite, dims=dims, epsilons=eps,
        instances_per_cell=args.n, seed=seed, tol=args.tol,
    )
    failures = sum(1 for record in report.records if not record.passed)
    verdict = "pass" if report.passed else "FAIL"
    print(
        f"{report.name}: {report.count} instances, {failures} failures, "
        f"{report.wall_time_s:.2f}s [{verdict}]"
    )
    if args.csv:
        harness.write_csv([report], args.csv)
    return 0 if report.passed else 1


def _cmd_counterexample(args: argparse.Namespace) -> int:
    name = args.name
    if name in ("tridiagonal", "classical"):
        instance = counterexamples.classical_counterexample(args.d or 6)
    elif name == "quantum":
        instance = counterexamples.quantum_counterexample(args.d or 6)
    elif name == "bipartite":
        instance = counterexamples.bipartite_counterexample(args.d or 4, args.d_a or 2)
    elif name == "change-both":
        instance = counterexamples.example_change_both(args.eps or 1e-2)
    else:
        instance = counterexamples.optimality_instance(args.eps or 1e-2)
    _emit(serialize.encode_counterexample(instance), args.out)
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    seed = _env_seed() if args.seed is None else args.seed
    if args.fix_class == "local_pure":
        d_a, d_b = args.d_a or 2, args.d_b or 2
        dim = d_a * d_b
    else:
        d_a = d_b = None
        dim = args.dim or 4
    spec = harness.InstanceSpec(
        args.fix_class, dim, d_a=d_a, d_b=d_b,
        epsilon_target=args.eps, seed=seed, strategy=args.strategy,
    )
    state, channel, measured = harness.generate_instance(spec)
    record = {
        "class": spec.fix_class,
        "dim": dim,
        "epsilon_target": spec.epsilon_target,
        "epsilon_measured": float(measured),
        "seed": seed,
        "strategy": spec.strategy,
        "state": serialize.encode_state(state),
        "channel": serialize.encode_channel_like(channel),
    }
    if d_a is not None:
        record["d_a"], record["d_b"] = d_a, d_b
    _emit(record, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixforge",
        description="Repair approximate fixed-point equations of channels and stochastic maps.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    fix = commands.add_parser("fix", help="repair one (state, channel) pair from JSON files")
    fix.add_argument("fix_class", choices=harness.FIX_CLASSES)
    fix.add_argument("--state", required=True, help="state JSON path")
    fix.add_argument("--channel", required=True, help="channel JSON path")
    fix.add_argument("--eps", type=float, default=None, help="promised deviation (default: measured)")
    fix.add_argument("--out", default=None, help="output JSON path (default: stdout)")
    fix.add_argument("--tol", type=float, default=harness.RESIDUAL_TOL)
    fix.set_defaults(handler=_cmd_fix)

    verify = commands.add_parser("verify", help="run a randomized verification suite")
    verify.add_argument("suite", choices=harness.SUITES)
    verify.add_argument("--dims", default=None, help='"2..8", "2,4,8", or "2x3,3x2" for local_pure')
    verify.add_argument("--eps", default=None, help="comma-separated target deviations")
    verify.add_argument("--n", type=int, default=None, help="instances per (d, eps) cell")
    verify.add_argument("--seed", type=int, default=None, help="default: FIXFORGE_SEED or 0")
    verify.add_argument("--csv", default=None, help="write per-instance records to this path")
    verify.add_argument("--tol", type=float, default=harness.RESIDUAL_TOL)
    verify.set_defaults(handler=_cmd_verify)

    ce = commands.add_parser("counterexample", help="build and export a named counterexample")
    ce.add_argument("name", choices=COUNTEREXAMPLE_NAMES)
    ce.add_argument("--d", type=int, default=None, help="chain dimension (default 6, bipartite 4)")
    ce.add_argument("--d-a", dest="d_a", type=int, default=None, help="spectator dimension")
    ce.add_argument("--eps", type=float, default=None, help="deviation for the parametric families")
    ce.add_argument("--out", default=None)
    ce.set_defaults(handler=_cmd_counterexample)

    gen = commands.add_parser("gen", help="generate one reproducible instance as JSON")
    gen.add_argument("fix_class", choices=harness.FIX_CLASSES)
    gen.add_argument("--dim", type=int, default=None)
    gen.add_argument("--d-a", dest="d_a", type=int, default=None)
    gen.add_argument("--d-b", dest="d_b", type=int, default=None)
    gen.add_argument("--eps", type=float, default=1e-3, help="target deviation band")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument(
        "--strategy", choices=("exact_then_perturb", "promise_measured"),
        default="exact_then_perturb",
    )
    gen.add_argument("--out", default=None)
    gen.set_defaults(handler=_cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except VERIFICATION_ERRORS as exc:
        print(f"fixforge: {exc}", file=sys.stderr)
        return 1
    except (FixforgeError, ValueError, KeyError, OSError) as exc:
        print(f"fixforge: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
