"""Command-line front end.

    hvkit demo toy|segregate|mix|pbr|additivity
    hvkit check MODEL
    hvkit transform segregate|mix --in MODEL --out MODEL
    hvkit audit equivalence --a MODEL --b MODEL [--suite full|SUITE]
    hvkit audit strictness --seed N [--count K]
    hvkit compose --rule independent|compatible|compact-native --component MODEL --pair a,b --L n --out FILE
    hvkit compose prism --component MODEL --pair a,b --L n --measurement FILE --out FILE
    hvkit pbr demo | verify --scenario FILE | additivity --composite FILE --cell ID

Exit status is 0 iff every check in the emitted report passes; usage and
input errors exit with 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from . import modelio
from .composer import (
    NativeCell,
    attach_prism_table,
    check_compactness,
    check_compatibility,
    compose,
    compose_independent,
    strictness_survey,
)
from .demos import DEMOS, run_demo
from .errors import HVError, MissingEntryError
from .hvframe import check_born_reproduction, check_conditional_reproduction, classify, overlap_report
from .pbrcheck import additivity_audit, canonical_scenario, verify_antidistinguishing
from .qcore import ATOL, gram_residual, identity_resolution_residual
from .report import FORMATS, RunReport, emit_report
from .transforms import EquivalenceSuite, assert_equivalent, full_suite, mix, segregate


def _emit(report: RunReport, args) -> int:
    text = emit_report(report, args.format)
    if getattr(args, "report", None):
        Path(args.report).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return report.exit_status


def cmd_demo(args):
    return _emit(run_demo(args.name, args.tolerance), args)


def cmd_check(args):
    model = modelio.load_model(args.model)
    report = RunReport(f"check {args.model}")
    cls = classify(model).as_strings()
    report.add("model", "loaded", True, None, cells=len(model.space), states=list(model.densities),
               classification=list(cls))
    for a, b in combinations(model.densities, 2):
        r = overlap_report(model, a, b)
        report.add("overlap", f"q[{a},{b}]", True, None, q_base=r.q_base,
                   q_under_first=r.q_under_first, q_under_second=r.q_under_second)
    for name in model.observable_ids:
        meas = model.observables.get(name)
        if meas is None:
            report.add("born reproduction", name, True, None,
                       message="no measurement definition in file; Born audit skipped")
            continue
        for sid in model.densities:
            try:
                t = model.table_for(name, sid)
            except MissingEntryError:
                continue
            audit = check_conditional_reproduction if t.augmented else check_born_reproduction
            section = "conditional born reproduction" if t.augmented else "born reproduction"
            for o in meas.outcomes:
                r = audit(model, sid, meas, {o})
                report.add(section, f"[{sid},{name},{o}]", r <= args.tolerance, r)
    return _emit(report, args)


def cmd_transform(args):
    fn = {"segregate": segregate, "mix": mix}[args.op]
    model = modelio.load_model(args.inp)
    out = fn(model)
    modelio.save_model(out, args.out)
    report = RunReport(f"transform {args.op}")
    report.add("transform", args.op, True, None, classification=list(classify(out).as_strings()), out=args.out)
    rep = assert_equivalent(model, out, full_suite(model))
    report.add("transform", "statistics preserved", rep.passed, rep.max_delta, triples=len(rep.rows))
    return _emit(report, args)


def cmd_audit_equivalence(args):
    a, b = modelio.load_model(args.a), modelio.load_model(args.b)
    if args.suite == "full":
        suite = full_suite(a, tolerance=args.tolerance)
    else:
        suite = EquivalenceSuite.from_json(Path(args.suite).read_text(encoding="utf-8"))
    rep = assert_equivalent(a, b, suite)
    report = RunReport(f"audit equivalence {args.a} {args.b}")
    for row in rep.rows:
        report.add("triples", f"[{row.state},{row.observable},{','.join(map(str, row.outcomes))}]",
                   row.delta <= rep.tolerance, row.delta, prob_a=row.prob_a, prob_b=row.prob_b)
    report.add("summary", "equivalence", rep.passed, rep.max_delta, tolerance=rep.tolerance)
    return _emit(report, args)


def cmd_audit_strictness(args):
    stats = strictness_survey(args.seed, args.count)
    report = RunReport(f"audit strictness --seed {args.seed} --count {args.count}")
    report.add("strictness", "compatibility implies compactness", not stats["violations"], None,
               fixtures=stats["fixtures"], compatible=stats["compatible"], compact=stats["compact"],
               violations=[k for k, _ in stats["violations"]])
    report.add("strictness", "compactness without compatibility observed", stats["compact_not_compatible"] > 0,
               None, count=stats["compact_not_compatible"])
    return _emit(report, args)


def _pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError("--pair expects two state ids as a,b")
    return parts[0], parts[1]


def cmd_compose(args):
    component = modelio.load_model(args.component)
    report = RunReport(f"compose {args.kind or args.rule}")
    if args.kind == "prism":
        if not args.measurement:
            raise HVError("compose prism needs --measurement")
        meas = modelio.load_measurement(args.measurement)
        composite = attach_prism_table(compose_independent(component, args.pair, args.L), meas, args.deterministic)
    else:
        kw = {}
        if args.rule == "compact-native":
            kw["native"] = (NativeCell("native", Fraction(args.native_measure)),)
        composite = compose(component, args.pair, args.L, args.rule, **kw)
    modelio.save_composite(composite, args.out)
    report.add("compose", "built", True, None, rule=composite.rule, L=composite.L,
               cells=len(composite.base.space), preparations=composite.prep_ids, out=args.out)
    compat = check_compatibility(composite, component, args.pair)
    compact = check_compactness(composite, component, args.pair)
    report.add("conditions", "compatibility", True, None, holds=compat.holds, counterexample=compat.counterexample)
    report.add("conditions", "compactness", True, None, status=compact.status, witness=compact.witness)
    return _emit(report, args)


def _scenario(args):
    return modelio.load_scenario(args.scenario) if getattr(args, "scenario", None) else canonical_scenario()


def cmd_pbr(args):
    if args.op == "demo":
        return _emit(run_demo("pbr", args.tolerance), args)
    if args.op == "verify":
        sc = _scenario(args)
        report = RunReport("pbr verify")
        report.add("scenario", "gram", gram_residual(sc.meas) <= args.tolerance, gram_residual(sc.meas))
        r = identity_resolution_residual(sc.meas)
        report.add("scenario", "identity resolution", r <= args.tolerance, r)
        for j, res in enumerate(verify_antidistinguishing(sc.meas, sc.products), 1):
            report.add("scenario", f"P(phi_{j} -> {j})", res <= args.tolerance, res)
        return _emit(report, args)
    if args.op == "additivity":
        if not args.composite or args.cell is None:
            raise HVError("pbr additivity needs --composite and --cell")
        composite = modelio.load_composite(args.composite)
        sc = _scenario(args)
        try:
            cell = modelio.freeze_id(json.loads(args.cell))
        except json.JSONDecodeError:
            cell = args.cell
        a = additivity_audit(composite, sc, cell)
        report = RunReport(f"pbr additivity --cell {args.cell}")
        report.add("additivity", "value of sum equals sum of values", not a.mismatch, a.operator_residual,
                   cell=cell, projector_values=a.projector_values, identity_value=a.identity_value,
                   message=f"sum of values {a.sum_of_values}, value of sum {a.identity_value}")
        return _emit(report, args)
    raise HVError(f"unknown pbr operation {args.op!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="human")
    common.add_argument("--tolerance", type=float, default=None,
                        help="absolute tolerance (default 1e-12; 0 for equivalence audits)")
    reporting = argparse.ArgumentParser(add_help=False)
    reporting.add_argument("--out", dest="report", help="also write the report to this file")

    p = argparse.ArgumentParser(prog="hvkit", description="Audit finite hidden-variables models.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("demo", parents=[common, reporting], help="run a canonical end-to-end demo")
    d.add_argument("name", choices=DEMOS)
    d.set_defaults(func=cmd_demo)

    c = sub.add_parser("check", parents=[common, reporting], help="validate a model file and audit it")
    c.add_argument("model")
    c.set_defaults(func=cmd_check)

    t = sub.add_parser("transform", parents=[common], help="segregate or mix a model")
    t.add_argument("op", choices=("segregate", "mix"))
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_transform)

    a = sub.add_parser("audit", help="equivalence or strictness audits")
    asub = a.add_subparsers(dest="audit", required=True)
    ae = asub.add_parser("equivalence", parents=[common, reporting])
    ae.add_argument("--a", required=True)
    ae.add_argument("--b", required=True)
    ae.add_argument("--suite", default="full")
    ae.set_defaults(func=cmd_audit_equivalence, default_tolerance=0.0)
    ast = asub.add_parser("strictness", parents=[common, reporting])
    ast.add_argument("--seed", type=int, required=True)
    ast.add_argument("--count", type=int, default=100)
    ast.set_defaults(func=cmd_audit_strictness)

    k = sub.add_parser("compose", parents=[common], help="build a composite model")
    k.add_argument("kind", nargs="?", choices=("prism",))
    k.add_argument("--rule", choices=("independent", "compatible", "compact-native"), default="independent")
    k.add_argument("--component", required=True)
    k.add_argument("--pair", type=_pair, required=True)
    k.add_argument("--L", type=int, default=2)
    k.add_argument("--measurement")
    k.add_argument("--deterministic", action="store_true")
    k.add_argument("--native-measure", default="1/4")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_compose)

    b = sub.add_parser("pbr", parents=[common, reporting], help="antidistinguishing scenario tools")
    b.add_argument("op", choices=("demo", "verify", "additivity"))
    b.add_argument("--scenario")
    b.add_argument("--composite")
    b.add_argument("--cell")
    b.set_defaults(func=cmd_pbr)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tolerance", None) is None:
        args.tolerance = getattr(args, "default_tolerance", ATOL)
    try:
        return args.func(args)
    except (HVError, ValueError, OSError) as exc:
        print(f"hvkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
