"""Command-line front end.

Exit status: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .. import descent as dsc
from .. import frobenius as frb
from .. import structure as st
from ..field import FieldError, check_prime
from ..report import Report
from ..ring import DiffOp, Poly, ShapeError, apply, commutator, mul
from .parser import ParseError, infer_n, parse_element
from .serialize import (
    FormatError,
    dumps,
    element_to_obj,
    gens_from_obj,
    gens_to_obj,
    load_descent_like,
    params_from_obj,
    params_to_obj,
    sequence_from_obj,
    sequence_to_obj,
)

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SessionConfig:
    p: int
    n: int
    s: int = 1
    bound: int = 3
    depth: int = 3
    seed: int = 0
    json: bool = False

    def __post_init__(self):
        try:
            check_prime(self.p)
        except FieldError as exc:
            raise UsageError(str(exc)) from None
        if self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.s < 1:
            raise UsageError("--s must be >= 1")
        if self.bound < 0 or self.depth < 0:
            raise UsageError("--bound and --depth must be >= 0")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="the prime (default 2, or taken from an input file)")
    common.add_argument("--n", type=int, help="number of variables (default: inferred)")
    common.add_argument("--s", type=int, help="Frobenius level s >= 1 (default 1)")
    common.add_argument("--bound", type=int, default=None, help="descent bound / degree bound")
    common.add_argument("--depth", type=int, default=3, help="relation depth")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--u-file", dest="u_file", help="parameter matrix u (JSON)")
    common.add_argument("--expr", action="append", default=[], help="operator expression (repeatable)")
    common.add_argument("--in", dest="infile", help="input JSON file")
    common.add_argument("--out", dest="outfile", help="write output here instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = argparse.ArgumentParser(prog="divops", description="Arithmetic in D(P_n) over F_p.")
    sub = top.add_subparsers(dest="command", required=True)

    sub.add_parser("mul", parents=[common], help="product of the --expr operands")
    sub.add_parser("apply", parents=[common], help="apply the first --expr to the polynomial in the second")
    sub.add_parser("commutator", parents=[common], help="[a, b] of two --expr operands")

    frob = sub.add_parser("frob", help="Frobenius endomorphisms G_u").add_subparsers(dest="action", required=True)
    frob.add_parser("build", parents=[common], help="generator images G(d_i^[p^k]), k < depth")
    frob.add_parser("apply", parents=[common], help="G_u applied to each --expr")
    frob.add_parser("recover", parents=[common], help="u from a generator image table (--in)")
    fv = frob.add_parser("verify", parents=[common], help="homomorphism and Frobenius axioms")
    fv.add_argument("--samples", type=int, default=200)

    desc = sub.add_parser("descent", help="iterative delta-descents").add_subparsers(dest="action", required=True)
    dc = desc.add_parser("construct", parents=[common], help="rank-one descent from seeds y_0, y_1, ... (--expr)")
    dv = desc.add_parser("verify", parents=[common], help="check a descent (--in) or the canonical one")
    dv.add_argument("--full", action="store_true", help="check every index, not only generators")
    dcl = desc.add_parser("classify", parents=[common], help="parameters of a descent (--in) against the canonical one")
    dn = desc.add_parser("normalize", parents=[common], help="normalize an explicit sequence (--in)")
    for p in (dc, dv, dcl, dn):
        p.add_argument("--delta-level", dest="delta_level", type=int, default=0,
                       help="derivations -ad(x_i^(p^t)); 0 means -ad(x_i)")
    dc.add_argument("--axis", type=int, default=1)

    struct = sub.add_parser("struct", help="structural predicates").add_subparsers(dest="action", required=True)
    sm = struct.add_parser("member", parents=[common], help="membership of each --expr")
    sb = struct.add_parser("basis", parents=[common], help="monomial basis up to --bound")
    for p in (sm, sb):
        p.add_argument("--kind", required=True, choices=sorted(st.KINDS))
        p.add_argument("--axis", type=int)
        p.add_argument("--level", type=int)
        p.add_argument("--levels", type=lambda v: tuple(int(t) for t in v.split(",")), help="comma separated")
    sd = struct.add_parser("decompose", parents=[common], help="coefficients over G(D(P_n)), s = 1")
    sd.add_argument("--side", choices=("left", "right"), default="left")
    struct.add_parser("rigidity", parents=[common], help="rigidity check of a generator table (--in)")
    return top


# helpers


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON: {exc}") from None


def _merge(args, key: str, value):
    given = getattr(args, key)
    if given is not None and value is not None and given != value:
        raise UsageError(f"--{key} {given} conflicts with {key}={value} in the input file")
    if given is None:
        setattr(args, key, value)


def _config(args, file_obj: dict | None = None) -> SessionConfig:
    if file_obj is not None:
        for key in ("p", "n", "s"):
            if key in file_obj and not (key == "s" and file_obj[key] == 0):
                _merge(args, key, file_obj[key])
    if args.p is None:
        args.p = 2
    if args.n is None:
        try:
            args.n = max([infer_n(e) for e in args.expr] or [1])
        except ParseError as exc:
            raise UsageError(f"expression: {exc}") from None
    bound = args.bound if args.bound is not None else 3
    return SessionConfig(args.p, args.n, args.s if args.s is not None else 1, bound, args.depth, args.seed, args.json)


def _elements(args, cfg: SessionConfig, count: int | None = None) -> list[DiffOp]:
    if count is not None and len(args.expr) != count:
        raise UsageError(f"expected {count} --expr operand(s), got {len(args.expr)}")
    if not args.expr:
        raise UsageError("at least one --expr is required")
    out = []
    for src in args.expr:
        try:
            out.append(parse_element(src, cfg.p, cfg.n))
        except ParseError as exc:
            raise UsageError(f"expression {src!r}: {exc}") from None
    return out


def _frob_map(args):
    obj = _read_json(args.u_file) if args.u_file else None
    cfg = _config(args, obj)
    if obj is not None:
        u = params_from_obj(obj)
    else:
        u = frb.FrobParams.zero(cfg.p, cfg.n, cfg.s, cfg.depth)
    return cfg, u


def _report_out(report: Report, cfg: SessionConfig, emit) -> int:
    if cfg.json:
        emit(dumps({
            "name": report.name,
            "ok": report.ok,
            "checks": report.checks,
            "failures": [{"check": f.check, "where": [str(w) for w in f.where], "detail": f.detail} for f in report.failures],
            "notes": report.notes,
        }))
    else:
        for line in report.lines(limit=20):
            emit(line)
    return OK if report.ok else FAILED


def _element_out(a, cfg: SessionConfig, emit):
    emit(dumps(element_to_obj(a)) if cfg.json else str(a))


# commands


def cmd_mul(args, emit) -> int:
    cfg = _config(args)
    ops = _elements(args, cfg)
    out = ops[0]
    for b in ops[1:]:
        out = mul(out, b)
    _element_out(out, cfg, emit)
    return OK


def cmd_apply(args, emit) -> int:
    cfg = _config(args)
    a, f = _elements(args, cfg, 2)
    if not f.in_polynomials():
        raise UsageError("the second operand must be a polynomial")
    result = apply(a, Poly.from_op(f))
    _element_out(result.to_op(), cfg, emit)
    return OK


def cmd_commutator(args, emit) -> int:
    cfg = _config(args)
    a, b = _elements(args, cfg, 2)
    _element_out(commutator(a, b), cfg, emit)
    return OK


def cmd_frob(args, emit) -> int:
    action = args.action
    if action == "recover":
        if not args.infile:
            raise UsageError("frob recover needs --in with a generator image table")
        obj = _read_json(args.infile)
        p, n, s, gens = gens_from_obj(obj)
        cfg = _config(args, obj)
        if s < 1:
            raise UsageError("the image table needs a level s >= 1")
        u = frb.recover_u(gens, s=s)
        if cfg.json:
            emit(dumps(params_to_obj(u)))
        else:
            for i, row in enumerate(u.u):
                for k, e in enumerate(row):
                    emit(f"u[{i + 1}][{k}] = {e}")
        return OK
    cfg, u = _frob_map(args)
    G = frb.build_gu(u, depth=max(cfg.depth, u.depth))
    if action == "build":
        gens = G.generators(cfg.depth)
        if cfg.json:
            emit(dumps(gens_to_obj(cfg.p, cfg.n, cfg.s, gens)))
        else:
            for i, row in enumerate(gens):
                for k, g in enumerate(row):
                    emit(f"G(d{i + 1}[{cfg.p ** k}]) = {g}")
        return OK
    if action == "apply":
        for a in _elements(args, cfg):
            _element_out(frb.frob_apply(G, a), cfg, emit)
        return OK
    report = frb.verify_homomorphism(G, depth=cfg.depth, samples=args.samples, seed=cfg.seed)
    report.merge(frb.verify_frobenius_axioms(G, depth=cfg.depth, seed=cfg.seed))
    report.name = "frobenius"
    return _report_out(report, cfg, emit)


def _delta(args, n: int) -> dsc.DerivationSpec:
    if args.delta_level < 0:
        raise UsageError("--delta-level must be >= 0")
    return dsc.DerivationSpec(n, args.delta_level)


def _load_descent(args):
    obj = dict(_read_json(args.infile))
    # descents carry the derivation level in "s"; keep it away from the Frobenius level
    level = obj.pop("s", 0)
    cfg = _config(args, obj)
    obj["s"] = level
    return cfg, load_descent_like(obj)


def cmd_descent(args, emit) -> int:
    action = args.action
    if action == "construct":
        cfg = _config(args)
        seeds = _elements(args, cfg)
        delta = dsc.DerivationSpec(cfg.n, args.delta_level, (args.axis,))
        result = dsc.construct_rank1(delta, seeds)
        if cfg.json:
            emit(dumps(gens_to_obj(cfg.p, cfg.n, delta.s, result.gens)))
        else:
            for k, g in enumerate(result.gens[args.axis - 1]):
                emit(f"y{args.axis}[{cfg.p ** k}] = {g}")
        return OK
    if action == "verify":
        if args.infile:
            cfg, desc = _load_descent(args)
        else:
            cfg = _config(args)
            desc = dsc.canonical_descent(cfg.p, cfg.n, cfg.bound, s=args.delta_level)
        delta = _delta(args, cfg.n)
        return _report_out(dsc.verify_descent(desc, delta, full=args.full), cfg, emit)
    if not args.infile:
        raise UsageError(f"descent {action} needs --in")
    cfg, cand = _load_descent(args)
    delta = _delta(args, cfg.n)
    if action == "classify":
        if isinstance(cand, dsc.MultiSequence):
            cand = cand.to_descent()
        ref = dsc.canonical_descent(cfg.p, cfg.n, cand.bounds, s=delta.s)
        params = dsc.classify(delta, ref, cand)
        if cfg.json:
            emit(dumps({"reference": params.reference,
                        "lambda": [[element_to_obj(e) for e in row] for row in params.params]}))
        else:
            emit(f"reference: {params.reference}")
            for i, row in enumerate(params.params):
                for j, e in enumerate(row):
                    emit(f"lambda[{i + 1}][{j}] = {e}")
        return OK
    if isinstance(cand, dsc.Descent):
        cand = cand.sequence()
    bounds = [dsc._log_p(l, cfg.p) for l in cand.box]
    ref = dsc.canonical_descent(cfg.p, cfg.n, bounds, s=delta.s)
    seq = dsc.normalize(delta, ref, cand)
    if cfg.json:
        emit(dumps(sequence_to_obj(seq)))
    else:
        for alpha, e in seq.items():
            emit(f"y[{','.join(map(str, alpha))}] = {e}")
    return OK


def cmd_struct(args, emit) -> int:
    action = args.action
    if action in ("member", "basis"):
        cfg = _config(args)
        try:
            spec = st.SubalgebraSpec(args.kind, cfg.p, cfg.n, args.axis, args.level, args.levels)
        except st.StructureError as exc:
            raise UsageError(str(exc)) from None
        if action == "basis":
            basis = st.basis_upto(spec, cfg.bound)
            if cfg.json:
                emit(dumps([element_to_obj(b) for b in basis]))
            else:
                for b in basis:
                    emit(str(b))
            return OK
        status = OK
        for a in _elements(args, cfg):
            pattern = st.member(spec, a)
            direct = st.member_direct(spec, a)
            if pattern != direct and spec.exact:
                status = FAILED
            if cfg.json:
                emit(dumps({"element": element_to_obj(a), "member": direct, "pattern": pattern, "exact": spec.exact}))
            else:
                note = ""
                if pattern != direct:
                    note = " (outside the monomial closed form)" if spec.exact is False else " (pattern check disagrees)"
                emit(f"{a}: {'member' if direct else 'not a member'}{note}")
        return status
    if action == "decompose":
        cfg, u = _frob_map(args)
        if cfg.s != 1:
            raise UsageError("decomposition needs s = 1")
        G = frb.build_gu(u)
        status = OK
        for a in _elements(args, cfg):
            coeffs = st.decompose_over_frobenius_image(G, a, args.side)
            if st.reconstruct(G, coeffs, args.side) != a:
                status = FAILED
            if cfg.json:
                emit(dumps([{"x": list(al), "d": list(be), "coefficient": element_to_obj(c)}
                            for (al, be), c in sorted(coeffs.items())]))
            else:
                for (al, be), c in sorted(coeffs.items()):
                    if c:
                        emit(f"c[x={list(al)}, d={list(be)}] = {c}")
        return status
    if not args.infile:
        raise UsageError("struct rigidity needs --in with a generator table")
    obj = _read_json(args.infile)
    p, n, _, gens = gens_from_obj(obj)
    cfg = _config(args, {"p": p, "n": n})
    bounds = None if args.bound is None else [args.bound] * n
    return _report_out(st.rigidity_check(gens, bounds), cfg, emit)


COMMANDS = {
    "mul": cmd_mul,
    "apply": cmd_apply,
    "commutator": cmd_commutator,
    "frob": cmd_frob,
    "descent": cmd_descent,
    "struct": cmd_struct,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    lines: list[str] = []
    try:
        status = COMMANDS[args.command](args, lines.append)
    except (UsageError, FormatError, ParseError) as exc:
        print(f"error: {exc}", file=stderr)
        return USAGE
    except (FieldError, ShapeError, frb.FrobeniusError, dsc.DescentError, st.StructureError, IndexError) as exc:
        print(f"error: {exc}", file=stderr)
        return USAGE
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.outfile:
        try:
            with open(args.outfile, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.outfile}: {exc.strerror}", file=stderr)
            return USAGE
    else:
        stdout.write(text)
    return status


def entry():
    sys.exit(main())
