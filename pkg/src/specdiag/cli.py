"""Command-line front end.

Every command prints exactly one JSON document on stdout; diagnostics go
to stderr.  Exit codes: 0 success, 1 infeasible, 2 hypothesis fails,
3 residual failure, 4 violation, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .construct_compact import CasePlan, plan_case, realize_truncation
from .construct_finite import (
    projection_from_diagonal,
    rank_one,
    schur_horn,
    thompson_construct,
    unitary_from_diagonal,
)
from .dense import SCHEMA, DenseMatrix
from .errors import (
    Infeasible,
    NoConvergence,
    OracleViolation,
    PatternMismatch,
    NotUnitary,
    SearchExhausted,
    SpecDiagError,
)
from .majorization import (
    kadison_check,
    majorizes,
    strong_majorizes,
    thompson_majorizes,
    unitary_diagonal_check,
    weak_majorizes,
)
from .oracle import necessity_sweep, sample_orbit_diagonals
from .seqspec import SequenceSpec
from .verify import (
    Verdict,
    certify_tight_strong,
    certify_tight_unitary,
    certify_trace_equality,
    check_2x2_lemmas,
    verify_construction,
)

EXIT_OK, EXIT_INFEASIBLE, EXIT_HYPOTHESIS, EXIT_RESIDUAL, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2, 3, 4, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load(path: str, what: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _load_spec(path: str, what: str) -> SequenceSpec:
    obj = _load(path, what)
    try:
        return SequenceSpec.from_json(obj)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{path}: {what}: {exc}") from None


def _load_matrix(path: str) -> DenseMatrix:
    obj = _load(path, "matrix")
    try:
        return DenseMatrix.from_json(obj)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required for this command")
    return value


def _emit(doc: dict, out: str | None = None) -> None:
    doc = {"schema": SCHEMA, **doc}
    if out:
        with open(out, "w") as fh:
            json.dump(doc, fh)
            fh.write("\n")
    json.dump(doc, sys.stdout)
    sys.stdout.write("\n")


def _cmd_check(args) -> int:
    d = _load_spec(_need(args, "d"), "d")
    order = args.order
    if order == "kadison":
        rep = kadison_check(d, args.tol)
        _emit({"command": "check", "report": rep.to_dict()})
        return EXIT_OK if rep.verdict else EXIT_INFEASIBLE
    if order == "unitary":
        rep = unitary_diagonal_check(d, args.tol)
    else:
        s = _load_spec(_need(args, "s"), "s")
        if order == "weak":
            rep = weak_majorizes(d, s, args.depth, args.tol)
        elif order == "plain":
            rep = majorizes(d, s, args.depth, args.tol)
        elif order == "strong":
            rep = strong_majorizes(d, s, args.depth, args.tol)
        else:
            rep = thompson_majorizes(d, s, args.tol)
    _emit({"command": "check", "report": rep.to_dict()})
    return EXIT_OK if rep.verdict else EXIT_INFEASIBLE


def _head(spec: SequenceSpec, what: str) -> np.ndarray:
    if not spec.tail.is_zero:
        raise UsageError(f"{what} must be a finite sequence for this construction")
    return np.asarray(spec.head)


def _cmd_construct(args) -> int:
    d = _load_spec(_need(args, "d"), "d")
    extra = {}
    if args.kind == "thompson":
        M = thompson_construct(_head(d, "d"), _head(_load_spec(_need(args, "s"), "s"), "s"), args.tol)
    elif args.kind == "schurhorn":
        M = schur_horn(_head(d, "d"), _head(_load_spec(_need(args, "s"), "s"), "s"), args.tol)
    elif args.kind == "rank1":
        s = _load_spec(_need(args, "s"), "s")
        K = args.depth if args.depth is not None else max(len(d), 1)
        M = rank_one(d, float(np.real(s.values(1)[0])), K, args.tol)
    elif args.kind == "projection":
        M = projection_from_diagonal(_head(d, "d"), args.tol)
    else:
        w = unitary_from_diagonal(d, args.tol)
        M = w.matrix
        extra = {"witness": {k: v for k, v in w.to_json().items() if k != "matrix"}}
    _emit({"command": "construct", "kind": args.kind, **M.to_json(), **extra}, args.out)
    return EXIT_OK


def _cmd_plan(args) -> int:
    d = _load_spec(_need(args, "d"), "d")
    s = _load_spec(_need(args, "s"), "s")
    plan = plan_case(d, s, args.depth if args.depth is not None else 4, args.tol)
    _emit({"command": "plan", **plan.to_json()}, args.out)
    return EXIT_OK


def _cmd_realize(args) -> int:
    obj = _load(_need(args, "plan"), "plan")
    try:
        plan = CasePlan.from_json(obj)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{args.plan}: {exc}") from None
    M = realize_truncation(plan, args.tol)
    _emit({"command": "realize", **M.to_json()}, args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    A = _load_matrix(_need(args, "matrix"))
    d = _load_spec(args.d, "d").head if args.d else None
    s = _load_spec(args.s, "s").head if args.s else None
    rep = verify_construction(A, d, s, tol=args.svd_tol)
    _emit({"command": "verify", "report": rep.to_dict()})
    return EXIT_OK if rep.passed else EXIT_RESIDUAL


_CERTIFIERS = {
    "trace": certify_trace_equality,
    "tight-strong": certify_tight_strong,
    "tight-unitary": certify_tight_unitary,
    "2x2": check_2x2_lemmas,
}


def _cmd_certify(args) -> int:
    A = _load_matrix(_need(args, "matrix"))
    try:
        cert = _CERTIFIERS[args.theorem](A, args.tol)
    except (PatternMismatch, NotUnitary) as exc:
        _emit({"command": "certify", "theorem": args.theorem, "verdict": Verdict.HYPOTHESIS_FAILS.value, "reason": str(exc)})
        return EXIT_HYPOTHESIS
    _emit({"command": "certify", "certificate": cert.to_dict()})
    return {
        Verdict.HYPOTHESIS_FAILS: EXIT_HYPOTHESIS,
        Verdict.VERIFIED: EXIT_OK,
        Verdict.VIOLATION: EXIT_VIOLATION,
    }[Verdict(cert.verdict)]


def _cmd_sample(args) -> int:
    s = _head(_load_spec(_need(args, "s"), "s"), "s").astype(float)
    sample = sample_orbit_diagonals(s, args.trials, args.seed, args.real)
    report = necessity_sweep(s, args.trials, args.seed, args.real)
    doc = {"command": "sample", "report": report.to_dict()}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"schema": SCHEMA, **sample.to_json()}, fh)
            fh.write("\n")
        doc["out"] = args.out
    _emit(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specdiag", description="Diagonals of operators with prescribed singular values.")
    p.add_argument("--version", action="version", version=f"{SCHEMA} (specdiag {__version__})")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, handler, help_):
        q = sub.add_parser(name, help=help_)
        q.set_defaults(handler=handler)
        q.add_argument("--tol", type=float, default=1e-10, help="verdict tolerance")
        return q

    q = add("check", _cmd_check, "evaluate a majorization predicate")
    q.add_argument("--order", required=True, choices=["weak", "plain", "thompson", "strong", "unitary", "kadison"])
    q.add_argument("--d")
    q.add_argument("--s")
    q.add_argument("--depth", type=int, default=64, help="explicit prefix depth K")

    q = add("construct", _cmd_construct, "build a witness matrix")
    q.add_argument("--kind", required=True, choices=["thompson", "schurhorn", "rank1", "projection", "unitary"])
    q.add_argument("--d")
    q.add_argument("--s")
    q.add_argument("--depth", type=int)
    q.add_argument("--out")

    q = add("plan", _cmd_plan, "plan a finite truncation for compact operators")
    q.add_argument("--d")
    q.add_argument("--s")
    q.add_argument("--depth", type=int)
    q.add_argument("--out")

    q = add("realize", _cmd_realize, "realize a plan as a matrix")
    q.add_argument("--plan")
    q.add_argument("--out")

    q = add("verify", _cmd_verify, "check a matrix against its requested diagonal and singular values")
    q.add_argument("--matrix")
    q.add_argument("--d")
    q.add_argument("--s")
    q.add_argument("--svd-tol", type=float, default=1e-8, help="relative singular value tolerance")

    q = add("certify", _cmd_certify, "run an equality-case certifier")
    q.add_argument("--theorem", required=True, choices=sorted(_CERTIFIERS))
    q.add_argument("--matrix")

    q = add("sample", _cmd_sample, "sample orbit diagonals and check necessity")
    q.add_argument("--s")
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--real", action="store_true")
    q.add_argument("--out")
    return p


def _fail(code: int, kind: str, message: str, **extra) -> int:
    print(f"specdiag: {message}", file=sys.stderr)
    json.dump({"schema": SCHEMA, "error": kind, "message": message, **extra}, sys.stdout)
    sys.stdout.write("\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return args.handler(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except Infeasible as exc:
        return _fail(EXIT_INFEASIBLE, type(exc).__name__, str(exc), failed=list(getattr(exc, "failed", []) or []))
    except OracleViolation as exc:
        return _fail(EXIT_VIOLATION, type(exc).__name__, str(exc))
    except (SearchExhausted, NoConvergence) as exc:
        return _fail(EXIT_RESIDUAL, type(exc).__name__, str(exc))
    except (SpecDiagError, ValueError) as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
