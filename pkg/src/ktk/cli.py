"""Command-line front end: counts, bases, verification, operator checks.

stdout carries exactly one report per invocation (JSON or a stable text
rendering); diagnostics and errors go to stderr.  Exit status: 0 all checks
passed, 1 a check failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .constructors import KINDS, count
from .equations import count_eq_unknowns
from .operators import (
    build_symmetry_operator,
    check_symmetry,
    conformal_symmetry_operator,
    kgf,
)
from .solver import AnsatzSpec, full_rank_check, solve_basis, verify_basis
from .tensors import Basis, Signature


class ConfigError(Exception):
    pass


def _signature(args) -> Signature:
    if args.m is not None:
        if args.p is not None or args.q is not None:
            raise ConfigError("--m is a shorthand for --p N --q 0; do not mix")
        return Signature(args.m, 0)
    p = args.p if args.p is not None else 0
    q = args.q if args.q is not None else 0
    if p + q < 1:
        raise ConfigError("signature needs p + q >= 1 (use --p/--q or --m)")
    if p < 0 or q < 0:
        raise ConfigError("p and q must be nonnegative")
    return Signature(p, q)


def _emit(args, payload: dict, text: str) -> None:
    body = json.dumps(payload, indent=2) + "\n" if args.format == "json" else text
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _add_common(sub, signature=True):
    if signature:
        sub.add_argument("--p", type=int, default=None, help="number of +1 metric entries")
        sub.add_argument("--q", type=int, default=None, help="number of -1 metric entries")
        sub.add_argument("--m", type=int, default=None, help="Euclidean shorthand: p=m, q=0")
    sub.add_argument("--format", choices=("json", "text"), default="text")
    sub.add_argument("--output", default=None, help="write the report to this path")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktk",
        description="Exact Killing-tensor bases and wave-operator symmetries.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    c = subs.add_parser("count", help="closed-form family dimension")
    c.add_argument("--kind", choices=KINDS, required=True)
    c.add_argument("--rank", type=int, required=True, help="tensor rank j / operator order n")
    c.add_argument("--order", type=int, default=1, help="order s of the defining system")
    c.add_argument("--solve", action="store_true", help="also run the solver and compare")
    c.add_argument("--max-degree", type=int, default=None)
    _add_common(c)

    b = subs.add_parser("basis", help="solve for a complete basis, emit Basis JSON")
    b.add_argument("--kind", choices=("ordinary", "conformal"), required=True)
    b.add_argument("--rank", type=int, required=True)
    b.add_argument("--order", type=int, default=1)
    b.add_argument("--max-degree", type=int, default=None)
    _add_common(b)

    v = subs.add_parser("verify", help="re-check residuals/independence of a Basis JSON")
    v.add_argument("path", help="Basis JSON file")
    _add_common(v, signature=False)

    o = subs.add_parser("op-check", help="build symmetry operators from a basis file")
    o.add_argument("path", help="Basis JSON file")
    o.add_argument("--kappa2", default="0", help="mass-squared parameter, a rational like 3/7")
    _add_common(o, signature=False)

    r = subs.add_parser("prolong-rank", help="rank report for one prolonged system")
    r.add_argument("--rank", type=int, required=True, help="tensor rank j")
    r.add_argument("--k", type=int, required=True, help="prolongation rank k")
    r.add_argument("--order", type=int, default=1)
    _add_common(r)

    return parser


def _run_count(args) -> int:
    sig = _signature(args)
    try:
        value = count(args.kind, sig.m, args.rank, args.order)
    except ValueError as exc:
        raise ConfigError(str(exc))
    payload = {
        "kind": args.kind,
        "m": sig.m,
        "j": args.rank,
        "s": args.order,
        "count": value,
    }
    lines = [f"count[{args.kind}, m={sig.m}, j={args.rank}, s={args.order}] = {value}"]
    status = 0
    if args.solve:
        if args.kind not in ("ordinary", "conformal"):
            raise ConfigError("--solve applies to ordinary/conformal kinds only")
        try:
            basis = solve_basis(
                AnsatzSpec(args.kind, args.rank, args.order, sig, args.max_degree)
            )
        except ValueError as exc:
            raise ConfigError(str(exc))
        payload["solved"] = len(basis)
        payload["match"] = len(basis) == value
        lines.append(f"solver dimension = {len(basis)}")
        lines.append("match" if payload["match"] else "MISMATCH")
        if not payload["match"]:
            status = 1
    _emit(args, payload, "\n".join(lines) + "\n")
    return status


def _run_basis(args) -> int:
    sig = _signature(args)
    try:
        spec = AnsatzSpec(args.kind, args.rank, args.order, sig, args.max_degree)
        basis = solve_basis(spec)
    except ValueError as exc:
        raise ConfigError(str(exc))
    payload = basis.to_json()
    text = (
        f"{basis.kind} basis: j={basis.j} s={basis.s} signature=({sig.p},{sig.q}) "
        f"degree<={basis.degree_bound}: {len(basis)} elements\n"
    )
    if args.format == "text":
        # a readable listing is still JSON per element, one per line
        text += "\n".join(
            json.dumps(el.to_json()) for el in basis.elements
        )
        text += "\n" if basis.elements else ""
    _emit(args, payload, text)
    return 0


def _load_basis(path: str) -> Basis:
    try:
        with open(path) as fh:
            data = json.load(fh)
        return Basis.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot load basis file {path!r}: {exc}")


def _run_verify(args) -> int:
    basis = _load_basis(args.path)
    problems = verify_basis(basis)
    payload = {
        "kind": basis.kind,
        "j": basis.j,
        "s": basis.s,
        "signature": [basis.signature.p, basis.signature.q],
        "count": len(basis),
        "ok": not problems,
        "problems": problems,
    }
    lines = [f"{len(basis)} elements: " + ("all checks passed" if not problems else "FAILED")]
    lines.extend(problems)
    _emit(args, payload, "\n".join(lines) + "\n")
    for p in problems:
        print(p, file=sys.stderr)
    return 0 if not problems else 1


def _run_op_check(args) -> int:
    basis = _load_basis(args.path)
    try:
        kappa2 = Fraction(args.kappa2)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"--kappa2 must be rational, got {args.kappa2!r}")
    L = kgf(basis.signature, kappa2)
    build = (
        build_symmetry_operator if basis.kind == "ordinary" else conformal_symmetry_operator
    )
    results = []
    ok = True
    for n, F in enumerate(basis.elements):
        Q = build(F)
        rep = check_symmetry(Q, L)
        ok = ok and rep.is_symmetry
        results.append(
            {
                "element": n,
                "is_symmetry": rep.is_symmetry,
                "alpha": rep.alpha.to_json(),
            }
        )
    payload = {
        "kind": basis.kind,
        "kappa2": str(kappa2),
        "count": len(basis),
        "all_pass": ok,
        "results": results,
    }
    lines = [
        f"element {r['element']}: "
        + ("symmetry" if r["is_symmetry"] else "NOT a symmetry")
        for r in results
    ]
    lines.append("all pass" if ok else "FAILED")
    _emit(args, payload, "\n".join(lines) + "\n")
    return 0 if ok else 1


def _run_prolong_rank(args) -> int:
    sig = _signature(args)
    if args.rank < 0 or args.k < 0 or args.order < 1:
        raise ConfigError("need rank >= 0, k >= 0, order >= 1")
    report = full_rank_check(args.rank, args.k, args.order, sig)
    payload = report.to_json()
    n_e, n_u = count_eq_unknowns(args.rank, args.k, args.order, sig.m)
    text = (
        f"prolonged system j={args.rank} k={args.k} s={args.order} "
        f"signature=({sig.p},{sig.q}): {n_e} equations, {n_u} unknowns, "
        f"rank {report.rank} ({'full' if report.full_row_rank else 'NOT full'} row rank)\n"
    )
    _emit(args, payload, text)
    return 0 if report.full_row_rank else 1


_RUNNERS = {
    "count": _run_count,
    "basis": _run_basis,
    "verify": _run_verify,
    "op-check": _run_op_check,
    "prolong-rank": _run_prolong_rank,
}


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        return _RUNNERS[args.command](args)
    except ConfigError as exc:
        if getattr(args, "format", "text") == "json":
            print(json.dumps({"error": str(exc)}), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
