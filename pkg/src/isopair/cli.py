"""``isopair`` command line.

Exit codes: 0 when every check passes, 1 when some check reports a defect,
2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .certify import certify
from .context import SYMBOLIC, InadmissibleWeight, NonUnitarizable, VermaContext, weight_ratio
from .expr import ParseError, parse_expr
from .ipair import bundled_path, emit_pair_spec, parse_pair_spec
from .isotopic import AntisymmetryError, verify_compatibility, verify_composite, verify_jacobi
from .kernel import RationalFunction
from .report import Report, emit_report
from .rmatrix import mybe_defect, r_identity_defect, r_multiplicativity_defect
from .shift import (
    InadmissibleOperator,
    ShiftOperator,
    op_add,
    op_adjoint,
    op_commutator,
    op_compose,
    op_scale,
)
from .verma import (
    Representation,
    chart_overlap_consistency,
    rep_generator,
    verify_composed_representation,
    witt_deviation,
)

__all__ = ["main", "run_command", "build_parser", "UsageError"]


class UsageError(Exception):
    pass


# --- argument helpers --------------------------------------------------------


def _weight(text: str) -> VermaContext:
    if text == "symbolic":
        return SYMBOLIC
    try:
        return VermaContext(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid weight {text!r}") from None


def _schedule(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid schedule {text!r}") from None
    if not values or any(b <= a for a, b in zip(values, values[1:])) or values[0] < 1:
        raise argparse.ArgumentTypeError("schedule must be increasing positive integers")
    return values


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _load_spec(path):
    source = bundled_path() if path is None else path
    try:
        text = source.read_text(encoding="utf-8") if path is None else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    return parse_pair_spec(text)


# --- operator expressions ----------------------------------------------------


def parse_operator(text: str, ctx: VermaContext) -> ShiftOperator:
    """``e(k)``, ``f(k)``, scalars, ``h``, ``+ - * /``, and commutators ``[A, B]``."""
    node = parse_expr(text, calls={"e", "f"}, brackets=True)
    one = ShiftOperator.identity(ctx)

    def lift(x):
        return x if isinstance(x, ShiftOperator) else op_scale(one, x)

    def mul(a, b):
        if isinstance(a, ShiftOperator) and isinstance(b, ShiftOperator):
            return op_compose(a, b)
        if isinstance(a, ShiftOperator):
            return op_scale(a, b)
        if isinstance(b, ShiftOperator):
            return op_scale(b, a)
        return a * b

    def ev(n):
        kind = n[0]
        if kind == "num":
            return RationalFunction.const(n[1])
        if kind == "var":
            if n[1] != "h":
                raise ParseError(f"unknown variable {n[1]!r}")
            return ctx.h
        if kind == "neg":
            return mul(RationalFunction.const(-1), ev(n[1]))
        if kind in ("add", "sub"):
            a, b = ev(n[1]), ev(n[2])
            if kind == "sub":
                b = mul(RationalFunction.const(-1), b)
            if isinstance(a, RationalFunction) and isinstance(b, RationalFunction):
                return a + b
            return op_add(lift(a), lift(b))
        if kind == "mul":
            return mul(ev(n[1]), ev(n[2]))
        if kind == "div":
            a, b = ev(n[1]), ev(n[2])
            if isinstance(b, ShiftOperator):
                raise ParseError("cannot divide by an operator")
            return mul(a, RationalFunction.const(1) / b)
        if kind == "pow":
            base = ev(n[1])
            out = one if isinstance(base, ShiftOperator) else RationalFunction.const(1)
            for _ in range(n[2]):
                out = mul(out, base)
            return out
        if kind == "call":
            args = [ev(a) for a in n[2]]
            if len(args) != 1 or not isinstance(args[0], RationalFunction) or not args[0].is_constant():
                raise ParseError(f"{n[1]}(...) needs one integer index")
            k = args[0].constant_value()
            if k.denominator != 1:
                raise ParseError(f"{n[1]}(...) needs one integer index")
            return rep_generator(n[1], int(k), ctx)
        if kind == "bracket":
            return op_commutator(lift(ev(n[1])), lift(ev(n[2])))
        raise ParseError(f"unsupported expression {kind}")

    return lift(ev(node))


# --- subcommands -------------------------------------------------------------


def cmd_verify_pair(args) -> Report:
    P = _load_spec(args.spec)
    rep = Report("verify-pair", {"spec": args.spec or "bundled:witt.ipair", "K": args.K})
    for res in (verify_jacobi(P, args.K), verify_compatibility(P, args.K)):
        rep.add(res.check, {"pair": P.name, "K": args.K}, res.to_dict(), res.ok,
                {"id": res.check, "checked": res.checked, "defects": len(res.defects), "regime": res.regime})
    return rep


def cmd_verify_composite(args) -> Report:
    P = _load_spec(args.spec)
    rep = Report("verify-composite", {"spec": args.spec or "bundled:witt.ipair", "K": args.K})
    if not P.charts:
        raise UsageError("the pair declares no charts")
    res = verify_composite(P, P.charts, args.K)
    rep.add("composite", {"charts": [c.name for c in P.charts]}, res.to_dict(), res.ok)
    return rep


def cmd_verify_rep(args) -> Report:
    ctx = args.h
    R = Representation(ctx)
    rep = Report("verify-rep", {"K": args.K, "h": ctx.label})
    cross = [("T1", ("e", 3), ("e", -2), ("f", 0))]
    res = verify_composed_representation(R, args.K, cross)
    rep.add("in-chart", {"K": args.K}, {
        "checked": res.checked,
        "failures": [[s, list(X), list(Y), list(A), d.render()] for s, X, Y, A, d in res.in_chart_failures],
    }, not res.in_chart_failures)
    for gen, (same, op) in chart_overlap_consistency(ctx).items():
        rep.add(f"overlap {gen}", {}, {"operator": op.render()}, same)
    if ctx.unitarizable:
        for k in range(1, args.K + 1):
            for fam in ("e", "f"):
                ok = op_adjoint(R.T(fam, k)) == R.T(fam, -k)
                rep.add(f"adjoint {fam}({k})", {}, {"equal": ok}, ok)
    for side, X, Y, A, d, cert in res.cross_chart:
        rep.add(f"cross-chart {side} {X} {Y} {A}", {"side": side}, {
            "defect": d.render(), "certificate": cert.to_dict()}, cert.scalar_plus_hs)
    return rep


def cmd_rmatrix(args) -> Report:
    rep = Report("rmatrix", {"defect": args.defect, "normalization": args.normalization, "K": args.K,
                             "constant": str(args.constant)})
    K, norm = args.K, args.normalization
    rng = range(-K, K + 1)
    if args.defect == "identity":
        for fam in ("e", "f"):
            for i in rng:
                for j in rng:
                    for k in rng:
                        d = r_identity_defect(None, i, j, k, norm, fam)
                        rep.add(f"identity {fam} {i} {j} {k}", {"family": fam, "i": i, "j": j, "k": k},
                                d, d.is_zero(), {"family": fam, "i": i, "j": j, "k": k, "defect": d.render()})
    elif args.defect == "multiplicativity":
        for i in rng:
            for j in rng:
                table = r_multiplicativity_defect(i, j, norm, K)
                bad = {f"{fam}({l})": d for (fam, l), d in table.items() if not d.is_zero()}
                rep.add(f"multiplicativity {i} {j}", {"i": i, "j": j}, bad, not bad,
                        {"i": i, "j": j, "defect": "; ".join(f"{g}: {d.render()}" for g, d in bad.items())})
    else:
        for i in rng:
            for j in rng:
                for k in rng:
                    m = mybe_defect(i, j, k, norm, args.constant)
                    ok = m.defect.is_zero() and m.compensated.is_zero()
                    rep.add(f"mybe {i} {j} {k}", {"i": i, "j": j, "k": k},
                            {"defect": m.defect, "compensated": m.compensated}, ok,
                            {"i": i, "j": j, "k": k, "defect": m.defect.render(),
                             "compensated": m.compensated.render()})
    return rep


def cmd_certify(args) -> Report:
    ctx = args.h
    A = parse_operator(args.op, ctx)
    cert = certify(A, modulo_scalars=args.modulo_scalars)
    rep = Report("certify", {"op": args.op, "h": ctx.label, "modulo_scalars": args.modulo_scalars})
    ok = True if args.expect is None else cert.verdict == args.expect
    rep.add("certificate", {"op": args.op}, {"operator": A.render(), **cert.to_dict()}, ok)
    return rep


def cmd_deviation(args) -> Report:
    ctx = args.h
    R = Representation(ctx)
    rep = Report("deviation", {"K": args.K, "h": ctx.label})
    for i in range(-args.K, args.K + 1):
        for j in range(i + 1, args.K + 1):
            d = witt_deviation(R, i, j)
            cert = certify(d, modulo_scalars=True)
            ok = d.is_zero() or cert.scalar_plus_hs
            rep.add(f"deviation {i} {j}", {"i": i, "j": j}, {"deviation": d.render(), "certificate": cert.to_dict()},
                    ok, {"i": i, "j": j, "verdict": cert.verdict,
                         "scalar_part": "" if cert.scalar_part is None else cert.scalar_part.render()})
    return rep


def cmd_lab(args) -> Report:
    from . import lab

    h = args.h
    if h.is_symbolic:
        h = VermaContext(Fraction(1))
    h.require_unitarizable()
    hv = h.weight
    config = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    Ns = args.N_schedule or tuple(config.get("N_schedule", (64, 128, 256)))
    M = args.window or int(config.get("window", 16))
    rep = Report(f"lab {args.experiment}", {"h": h.label, "N_schedule": list(Ns), "window": M}, floating=True)

    def spec_from(key, default):
        doc = config.get(key, default)
        doc = {**doc, "h": str(hv)}
        return lab.FlowSpec.from_json(doc)

    exp = args.experiment
    if exp == "matexp":
        import numpy as np

        rng = np.random.default_rng(int(config.get("seed", 0)))
        for N in (2, 4, 8):
            A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
            A *= 5 / np.linalg.norm(A, 2)
            err = float(np.max(np.abs(lab.matexp(A) - lab.taylor_exp(A))))
            rep.add(f"taylor N={N}", {"N": N}, {"error": err}, err <= 1e-12)
    elif exp == "unitarity":
        spec = spec_from("flow", {"generator": [[2, 0, 1], [-2, 0, 1]], "t": 0.2})
        curve = lab.unitarity_deviation(spec, M, Ns)
        rep.curve = curve
        rep.add("unitarity", {"generator": [list(g) for g in config.get("flow", {}).get("generator", [])]},
                curve, curve.last <= 1e-8 and curve.converged)
    elif exp == "monoassoc":
        spec = spec_from("flow", {"generator": [[1, 0, 1], [-1, 0, 1]], "N": 64})
        t, s = complex(config.get("t", 0.1)), complex(config.get("s", 0.2))
        r = lab.monoassociativity_check(spec, t, s)
        rep.add("monoassociativity", {"t": t, "s": s, "N": spec.N}, {"residual": r}, r <= 1e-10)
    elif exp == "mobius":
        w1 = lab.MobiusWord(*config.get("w1", (0.1, 0.05, -0.08)))
        w2 = lab.MobiusWord(*config.get("w2", (-0.05, 0.1, 0.07)))
        curve = lab.group_defect_mobius(w1, w2, M, Ns, hv)
        rep.curve = curve
        ok = curve.last <= 1e-6 and abs(curve.extra["phase_modulus"] - 1) <= 1e-8
        rep.add("mobius", {"w1": [w1.a, w1.b, w1.c], "w2": [w2.a, w2.b, w2.c]}, curve, ok)
    elif exp == "commutator":
        X = spec_from("X", {"generator": [[1, 0, 1], [-1, 0, 1]], "N": Ns[0]})
        Y = spec_from("Y", {"generator": [[0, 0, 2]], "N": Ns[0]})
        r = lab.commutator_flow_scaling(X, Y, tuple(config.get("t", (0.01, 0.02, 0.04, 0.08))), M,
                                        config.get("correction", "scalar"))
        rep.add("commutator-scaling", {}, r, r.exponent >= 2.7)
    elif exp == "semigroup":
        q1, q2 = complex(config.get("q1", 0.5)), complex(config.get("q2", 0.5))
        r = lab.semigroup_probe(q1, q2, int(config.get("k", 1)), complex(config.get("tau", 0.1 + 0.05j)),
                                int(config.get("N", 32)), hv)
        rep.add("semigroup", {"q1": q1, "q2": q2}, r,
                r.product_error <= 1e-12 and r.singular_ratio_error <= 1e-10 and r.cr_residual <= 1e-6)
    elif exp == "orbit":
        w = lab.MobiusWord(*config.get("word", (0.1, 0.0, 0.0)))
        v = lab.orbit_coefficients(w, int(config.get("N", 8)), hv)
        rep.add("orbit", {"word": [w.a, w.b, w.c]}, {"coefficients": [complex(x) for x in v]}, True)
    return rep


def cmd_emit_tables(args) -> Report:
    ctx = args.h
    rep = Report("emit-tables", {"what": args.what, "K": args.K, "h": ctx.label})
    if args.what == "generators":
        for fam in ("e", "f"):
            for k in range(-args.K, args.K + 1):
                op = rep_generator(fam, k, ctx)
                rep.add(f"{fam}({k})", {"family": fam, "k": k}, op.render(), True,
                        {"family": fam, "k": k, "operator": op.render()})
    elif args.what == "ratios":
        for s in range(-args.K, args.K + 1):
            r = weight_ratio(s, ctx)
            rep.add(f"ratio {s}", {"s": s}, r.render(), True, {"s": s, "ratio": r.render()})
    else:
        P = _load_spec(args.spec)
        rep.add("spec", {"spec": args.spec or "bundled:witt.ipair"}, emit_pair_spec(P), True)
    return rep


# --- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", metavar="PATH")

    p = _Parser(prog="isopair", description="Exact checks for the Witt isotopic pair and its representation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("verify-pair", parents=[common], help="Jacobi and compatibility identities")
    s.add_argument("--spec")
    s.add_argument("--K", type=_positive, default=6)
    s.set_defaults(func=cmd_verify_pair)

    s = sub.add_parser("verify-composite", parents=[common], help="chart closure, density, connectedness")
    s.add_argument("--spec")
    s.add_argument("--K", type=_positive, default=8)
    s.set_defaults(func=cmd_verify_composite)

    s = sub.add_parser("verify-rep", parents=[common], help="representation identities per chart")
    s.add_argument("--K", type=_positive, default=5)
    s.add_argument("--h", type=_weight, default=SYMBOLIC)
    s.set_defaults(func=cmd_verify_rep)

    s = sub.add_parser("rmatrix", parents=[common], help="r-matrix defects")
    s.add_argument("--defect", choices=("identity", "multiplicativity", "mybe"), default="identity")
    s.add_argument("--normalization", choices=("paper", "half"), default="paper")
    s.add_argument("--K", type=_positive, default=4)
    s.add_argument("--constant", type=Fraction, default=Fraction(1))
    s.set_defaults(func=cmd_rmatrix)

    s = sub.add_parser("certify", parents=[common], help="operator-class certificate")
    s.add_argument("--op", required=True)
    s.add_argument("--h", type=_weight, default=SYMBOLIC)
    s.add_argument("--modulo-scalars", action="store_true")
    s.add_argument("--expect", choices=("zero", "trace-class", "HS", "bounded-not-compact", "unbounded"))
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("deviation", parents=[common], help="Witt-relation deviations and their classes")
    s.add_argument("--K", type=_positive, default=4)
    s.add_argument("--h", type=_weight, default=SYMBOLIC)
    s.set_defaults(func=cmd_deviation)

    s = sub.add_parser("lab", parents=[common], help="floating-point truncation experiments")
    s.add_argument("experiment", choices=("matexp", "unitarity", "monoassoc", "mobius", "commutator",
                                          "semigroup", "orbit"))
    s.add_argument("--config")
    s.add_argument("--h", type=_weight, default=VermaContext(Fraction(1)))
    s.add_argument("--N-schedule", dest="N_schedule", type=_schedule)
    s.add_argument("--window", type=_positive)
    s.set_defaults(func=cmd_lab)

    s = sub.add_parser("emit-tables", parents=[common], help="generator, weight-ratio or spec tables")
    s.add_argument("--what", choices=("generators", "ratios", "spec"), default="generators")
    s.add_argument("--K", type=_positive, default=3)
    s.add_argument("--h", type=_weight, default=SYMBOLIC)
    s.add_argument("--spec")
    s.set_defaults(func=cmd_emit_tables)
    return p


def _threads():
    raw = os.environ.get("ISOPAIR_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"ISOPAIR_THREADS must be a positive integer, not {raw!r}") from None
    if n < 1:
        raise UsageError("ISOPAIR_THREADS must be a positive integer")
    return n


def run_command(argv) -> tuple[int, Report | None]:
    """Parse and execute; returns the exit code and the report (if any)."""
    try:
        _threads()
        args = build_parser().parse_args(argv)
        report = args.func(args)
    except (UsageError, ParseError, AntisymmetryError, InadmissibleWeight, NonUnitarizable,
            InadmissibleOperator) as exc:
        print(f"isopair: {exc}", file=sys.stderr)
        return 2, None
    except SystemExit as exc:  # --help
        return int(exc.code or 0), None
    report.format = args.format
    report.out = args.out
    return (0 if report.ok else 1), report


def main(argv=None) -> int:
    code, report = run_command(sys.argv[1:] if argv is None else argv)
    if report is not None:
        data = emit_report(report, report.format)
        if report.out:
            with open(report.out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
