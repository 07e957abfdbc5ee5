"""Command line entry point.

Every command prints one JSON report. Exit status is 0 when all checks
pass, 1 when a verification fails and 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .moment import (
    InvariantViolation,
    MissingLocalType,
    SchemaViolation,
    assemble_moment,
    load_spectral_data,
    reciprocity_report,
)
from .numerics import decimal_string
from .periods import (
    LocalVector,
    TailBoundUnavailable,
    TruncationPlan,
    local_ell_v,
    normalized_Iv,
    verify_factorization,
    verify_kappa,
    verify_prop_atkin,
    verify_prop_hecke,
    verify_steinberg,
    verify_true_identity,
)
from .repn import NonUnitaryParameter, Steinberg, Unramified

SCHEMA = "1"
_CASES = {"away": "away", "unramified": "unramified-at-q", "unramified-at-q": "unramified-at-q",
          "steinberg": "steinberg-at-q", "steinberg-at-q": "steinberg-at-q"}


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _sign(text: str) -> int:
    if text not in ("1", "-1", "+1"):
        raise argparse.ArgumentTypeError("must be 1 or -1")
    return int(text)


def _plan(args) -> TruncationPlan:
    return TruncationPlan(radius=args.radius, sampling=args.sampling, prec=args.prec,
                          **({"threads": args.threads} if args.threads else {}))


def _plan_config(plan: TruncationPlan) -> dict:
    return {"radius": plan.radius, "sampling": plan.sampling, "collapse": plan.collapse,
            "prec": plan.prec, "threads": plan.threads}


def _add_plan(p: argparse.ArgumentParser) -> None:
    p.add_argument("--radius", type=int, default=60, help="outermost Cartan shell summed")
    p.add_argument("--sampling", choices=["K", "K0", "K0T", "B1"], default=None,
                   help="force K x K sampling over this subgroup")
    p.add_argument("--prec", type=int, default=128, help="working precision in bits")
    p.add_argument("--threads", type=int, default=None)


def _add_common(p: argparse.ArgumentParser, *, tol: float, lams=("lambda1", "lambda2")) -> None:
    p.add_argument("--q", type=int, required=True)
    for name in lams:
        p.add_argument(f"--{name}", type=_fraction, required=True)
    p.add_argument("--tol", type=float, default=tol)


def _verify(args) -> tuple[dict, bool]:
    what = args.check
    if what == "kappa":
        report = verify_kappa(args.q, args.lam, args.tol, allow_nonunitary=args.allow_nonunitary)
        return {"report": report.to_dict()}, report.passed
    plan = _plan(args)
    if what == "fact":
        reps = []
        for i in (1, 2, 3):
            alpha = getattr(args, f"alpha{i}")
            reps.append(Unramified.from_satake(alpha, args.q) if alpha is not None
                        else getattr(args, f"lambda{i}"))
        report = verify_factorization(args.q, *reps, plan, args.tol)
    elif what == "steinberg":
        report = verify_steinberg(args.q, args.lambda1, args.lambda2, args.twist, plan, args.tol)
    elif what == "true":
        report = verify_true_identity(args.q, args.lam, args.lambda1, args.lambda2, plan, args.tol)
    elif what == "hecke":
        report = verify_prop_hecke(args.q, args.lam, args.lambda1, args.lambda2, plan, args.tol)
    else:
        if args.steinberg:
            rep = Steinberg(args.q, args.twist)
        else:
            if args.lam is None:
                raise ValueError("--lambda or --steinberg is required")
            rep = Unramified.from_hecke(args.lam, args.q)
        report = verify_prop_atkin(args.q, rep, args.lambda1, args.lambda2, plan, args.tol,
                                   sign=args.sign, flip=args.flip)
    return {"config": _plan_config(plan), "report": report.to_dict()}, report.passed


def _compute(args) -> tuple[dict, bool]:
    if args.quantity == "iv":
        plan = _plan(args)
        vectors = []
        for token in args.vector:
            kind, _, rest = token.partition(":")
            level = rest.endswith("^m")
            value = rest[:-2] if level else rest
            if kind == "u":
                rep = Unramified.from_hecke(_fraction(value), args.q)
            elif kind == "st":
                rep = Steinberg(args.q, _sign(value or "1"))
            else:
                raise ValueError(f"vector must be u:<lambda>[^m] or st:<twist>, got {token!r}")
            v = LocalVector.new(rep)
            vectors.append(v.translate_m() if level else v)
        if len(vectors) != 3:
            raise ValueError("exactly three --vector options are required")
        res = normalized_Iv(vectors, plan)
        out = {"config": _plan_config(plan), "inputs": {"q": args.q, "vectors": args.vector},
               "value": decimal_string(res.value), "error_bound": decimal_string(res.err),
               "tail_bound": decimal_string(res.tail_bound)}
        return out, True
    plan = _plan(args)
    args.case = _CASES[args.case]
    if args.case != "away" and args.q is None:
        raise ValueError("--q is required")
    factor = local_ell_v(args.case, args.q, args.lam, args.lambda1, args.lambda2,
                         twist=args.twist, plan=plan)
    out = {"config": _plan_config(plan),
           "inputs": {"case": args.case, "q": args.q, "lambda": args.lam,
                      "lambda1": args.lambda1, "lambda2": args.lambda2, "twist": args.twist},
           "value": decimal_string(factor.value), "value_exact": str(factor.value),
           "readings": {k: decimal_string(v) for k, v in factor.readings.items()}}
    if factor.computed is not None:
        out["computed"] = decimal_string(factor.computed)
    out["inputs"] = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in out["inputs"].items()}
    return out, True


def _moment(args) -> tuple[dict, bool]:
    config = {"p": args.p, "q": args.q, "case_constant": str(args.case_constant), "radius": args.radius}
    if args.action == "assemble":
        data = load_spectral_data(args.data)
        report = assemble_moment(data, args.p, args.q, args.case_constant, args.side,
                                 lam1=args.lambda1, lam2=args.lambda2, radius=args.radius)
        config.update(side=args.side, lambda1=str(args.lambda1), lambda2=str(args.lambda2))
        return {"config": config, "report": report.to_dict()}, True
    left, right = load_spectral_data(args.data_qp), load_spectral_data(args.data_pq)
    report = reciprocity_report(left, right, args.p, args.q, args.case_constant,
                                lam1_q=args.lambda1_q, lam2_q=args.lambda2_q,
                                lam1_p=args.lambda1_p, lam2_p=args.lambda2_p, radius=args.radius)
    return {"config": config, "report": report}, True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locperiod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run one identity check")
    checks = verify.add_subparsers(dest="check", required=True)
    p = checks.add_parser("fact", help="normalized integral of spherical vectors is 1")
    _add_common(p, tol=1e-10, lams=())
    for i in (1, 2, 3):
        slot = p.add_mutually_exclusive_group(required=True)
        slot.add_argument(f"--lambda{i}", type=_fraction, help="Hecke eigenvalue")
        slot.add_argument(f"--alpha{i}", type=_fraction, help="rational Satake parameter")
    _add_plan(p)
    p = checks.add_parser("steinberg", help="Steinberg local factor")
    _add_common(p, tol=1e-8)
    p.add_argument("--twist", type=_sign, default=1)
    _add_plan(p)
    p = checks.add_parser("kappa", help="<phi^m, phi> against its closed form")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=_fraction, required=True)
    p.add_argument("--allow-nonunitary", action="store_true")
    p.add_argument("--tol", type=float, default=1e-12)
    for name, helptext in (("true", "basis-sum identity"), ("hecke", "Hecke move of the trilinear functional")):
        p = checks.add_parser(name, help=helptext)
        p.add_argument("--lambda", dest="lam", type=_fraction, required=True)
        _add_common(p, tol=1e-8)
        _add_plan(p)
    p = checks.add_parser("atkin", help="Atkin-Lehner move of the trilinear functional")
    _add_common(p, tol=1e-8)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=None)
    p.add_argument("--steinberg", action="store_true", help="use St with --twist instead of --lambda")
    p.add_argument("--twist", type=_sign, default=1)
    p.add_argument("--sign", type=_sign, default=1, help="eigenvector phi + sign*phi^m")
    p.add_argument("--flip", action="store_true", help="negate eta (negative control)")
    _add_plan(p)

    compute = sub.add_parser("compute", help="evaluate a local quantity")
    quantities = compute.add_subparsers(dest="quantity", required=True)
    p = quantities.add_parser("iv", help="normalized local integral")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--vector", action="append", default=[],
                   help="u:<lambda>, u:<lambda>^m or st:<twist>; give three")
    _add_plan(p)
    p = quantities.add_parser("ellv", help="local factor of the moment")
    p.add_argument("--case", choices=sorted(_CASES), required=True)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=None)
    p.add_argument("--lambda1", type=_fraction, default=Fraction(0))
    p.add_argument("--lambda2", type=_fraction, default=Fraction(0))
    p.add_argument("--twist", type=_sign, default=1)
    _add_plan(p)

    moment = sub.add_parser("moment", help="assemble the moment from spectral data")
    actions = moment.add_subparsers(dest="action", required=True)
    for name in ("assemble", "compare"):
        p = actions.add_parser(name)
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--q", type=int, required=True)
        p.add_argument("--case-constant", type=_fraction, default=Fraction(1))
        p.add_argument("--radius", type=int, default=60)
        if name == "assemble":
            p.add_argument("--data", required=True)
            p.add_argument("--side", choices=["q", "p"], default="q")
            p.add_argument("--lambda1", type=_fraction, default=Fraction(0),
                           help="first fixed form at the level prime")
            p.add_argument("--lambda2", type=_fraction, default=Fraction(0))
        else:
            p.add_argument("--data-qp", required=True)
            p.add_argument("--data-pq", required=True)
            for flag in ("lambda1-q", "lambda2-q", "lambda1-p", "lambda2-p"):
                p.add_argument(f"--{flag}", type=_fraction, default=Fraction(0))
    return parser


_HANDLERS = {"verify": _verify, "compute": _compute, "moment": _moment}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        payload, passed = _HANDLERS[args.command](args)
    except (SchemaViolation, InvariantViolation, MissingLocalType, NonUnitaryParameter,
            TailBoundUnavailable, ValueError, OSError) as exc:
        print(json.dumps({"schema": SCHEMA, "command": args.command, "error": str(exc)}))
        return 2
    except ArithmeticError as exc:
        print(json.dumps({"schema": SCHEMA, "command": args.command, "error": str(exc), "pass": False}))
        return 1
    out = {"schema": SCHEMA, "command": " ".join(filter(None, (
        args.command, getattr(args, "check", None), getattr(args, "quantity", None),
        getattr(args, "action", None))))}
    out.update(payload)
    out["pass"] = passed
    print(json.dumps(out, indent=2))
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
