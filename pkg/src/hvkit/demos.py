"""Canonical end-to-end runs, one per result the package reproduces."""

from __future__ import annotations

from dataclasses import replace
from itertools import combinations

from .composer import (
    CompositeModel,
    enumerate_preparations,
    build_prism_composite,
    compose_independent,
    find_common_cell,
    force_state_independent_table,
    attach_state_dependent_born,
)
from .hvframe import HVModel, check_born_reproduction, check_conditional_reproduction, classify, overlap_report
from .pbrcheck import (
    additivity_audit,
    builtin_inefficiency,
    canonical_scenario,
    detect_lemma_contradiction,
    verify_antidistinguishing,
)
from .qcore import (
    ATOL,
    KET_0,
    KET_PLUS,
    KET_PLUS_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    gram_residual,
    identity_resolution_residual,
)
from .report import RunReport
from .toymodels import Geometry, build_mixed_toy, build_overlap_fixture, build_segregated_toy, build_uniform_state_dependent
from .transforms import assert_equivalent, full_suite, mix, segregate

DEMOS = ("toy", "segregate", "mix", "pbr", "additivity")

TOY_STATES = (KET_0, KET_PLUS, KET_PLUS_I)
TOY_OBSERVABLES = (PAULI_X, PAULI_Y, PAULI_Z)
PRISM_Q = 0.25


def born_audits(report: RunReport, section: str, model: HVModel, tol: float):
    for sid in model.densities:
        for name, meas in model.observables.items():
            for o in meas.outcomes:
                r = check_born_reproduction(model, sid, meas, {o})
                report.add(section, f"born[{sid},{name},{o}]", r <= tol, r)


def _classification(report, section, model, expect):
    got = classify(model).as_strings()
    report.add(section, "classification", got == expect, None, got=list(got), expected=list(expect))


def _pairwise_overlap(report, section, model, expect_zero: bool):
    for a, b in combinations(model.densities, 2):
        q = overlap_report(model, a, b).q_base
        ok = (q == 0) if expect_zero else (q > 0)
        report.add(section, f"q_base[{a},{b}]", ok, None, q_base=q)


def _equivalence(report, section, name, a, b, tol):
    rep = assert_equivalent(a, b, full_suite(a, tolerance=0.0))
    report.add(section, name, rep.max_delta <= tol and rep.passed, rep.max_delta,
               triples=len(rep.rows), max_delta=rep.max_delta)


def demo_toy(tol: float = ATOL) -> RunReport:
    report = RunReport("demo toy")
    model = build_mixed_toy(TOY_STATES, TOY_OBSERVABLES)
    born_audits(report, "born reproduction (mixed toy)", model, tol)
    _classification(report, "classification", model, ("mixed", "state-dependent", "deterministic"))
    seg = build_segregated_toy(TOY_STATES, TOY_OBSERVABLES, Geometry.UNIT_CIRCLE_RAYS)
    born_audits(report, "born reproduction (segregated ray toy)", seg, tol)
    return report


def demo_segregate(tol: float = ATOL) -> RunReport:
    report = RunReport("demo segregate")
    model = build_mixed_toy(TOY_STATES, TOY_OBSERVABLES)
    seg = segregate(model)
    _classification(report, "segregate(mixed toy)", seg, ("segregated", "state-dependent", "deterministic"))
    _pairwise_overlap(report, "segregate(mixed toy)", seg, expect_zero=True)
    _equivalence(report, "segregate(mixed toy)", "equivalence[mixed toy, segregated]", model, seg, 0.0)
    return report


def demo_mix(tol: float = ATOL) -> RunReport:
    report = RunReport("demo mix")
    seg = build_segregated_toy(TOY_STATES, TOY_OBSERVABLES, Geometry.DISJOINT_INTERVALS)
    mixed = mix(seg)
    _classification(report, "mix(segregated toy)", mixed, ("mixed", "state-dependent", "deterministic"))
    _pairwise_overlap(report, "mix(segregated toy)", mixed, expect_zero=False)
    _equivalence(report, "mix(segregated toy)", "equivalence[segregated toy, mixed]", seg, mixed, 0.0)
    toy = build_mixed_toy(TOY_STATES, TOY_OBSERVABLES)
    _equivalence(report, "round trip", "equivalence[mixed toy, mix(segregate(mixed toy))]", toy, mix(segregate(toy)), 0.0)
    return report


def contradiction_fixture():
    """Independent L=2 composite of the qubit toy with the table Born zeros force."""
    sc = canonical_scenario()
    toy = build_mixed_toy([KET_0, KET_PLUS], [PAULI_Z])
    comp = compose_independent(toy, ("0", "+"), 2)
    return force_state_independent_table(comp, sc.meas), sc


def state_dependent_fixture():
    sc = canonical_scenario()
    toy = build_mixed_toy([KET_0, KET_PLUS], [PAULI_Z])
    comp = compose_independent(toy, ("0", "+"), 2)
    return attach_state_dependent_born(comp, sc.meas), sc


def uniform_composite_fixture():
    """The one-cell uniform model, relabelled as an L=2 composite of the scenario's products."""
    sc = canonical_scenario()
    uni = build_uniform_state_dependent(sc.meas, sc.products)
    preps = enumerate_preparations(("0", "+"), 2)
    relabel = {sid: pid for sid, (pid, _) in zip(uni.densities, preps)}
    tables = [replace(t, state_tag=relabel[t.state_tag]) for t in uni.responses.values()]
    base = HVModel(
        uni.space,
        {relabel[s]: psi for s, psi in uni.states.items()},
        {relabel[s]: d for s, d in uni.densities.items()},
        {(t.observable, t.state_tag): t for t in tables},
        uni.observables,
    )
    return CompositeModel(base, 2, ("0", "+"), "independent", tuple(preps), {"u": None}, uni.space), sc


def prism_fixture(q=PRISM_Q, L: int = 2, deterministic: bool = False):
    sc = canonical_scenario()
    return build_prism_composite(build_overlap_fixture(q), ("0", "+"), L, sc.meas, deterministic), sc


def demo_pbr(tol: float = ATOL) -> RunReport:
    report = RunReport("demo pbr")
    sc = canonical_scenario()
    sec = "antidistinguishing scenario"
    report.add(sec, "gram", gram_residual(sc.meas) <= tol, gram_residual(sc.meas))
    r = identity_resolution_residual(sc.meas)
    report.add(sec, "identity resolution", r <= tol, r)
    for j, res in enumerate(verify_antidistinguishing(sc.meas, sc.products), 1):
        report.add(sec, f"P(phi_{j} -> {j})", res <= tol, res)

    comp, _ = contradiction_fixture()
    v = detect_lemma_contradiction(comp, sc)
    report.add("CONTRADICTION", "verdict", v.kind.value == "CONTRADICTION", None,
               kind=v.kind, witness=v.witness, chain=v.chain, totality=v.totality,
               message="R({j}, λc) = 0 for every j, so R(S(M), λc) = 0 although a row must sum to 1")

    comp, _ = state_dependent_fixture()
    v = detect_lemma_contradiction(comp, sc)
    report.add("CONSISTENT_STATE_DEPENDENT", "verdict", v.kind.value == "CONSISTENT_STATE_DEPENDENT", None,
               kind=v.kind, witness=v.witness)
    comp, _ = uniform_composite_fixture()
    v = detect_lemma_contradiction(comp, sc)
    report.add("CONSISTENT_STATE_DEPENDENT", "uniform model verdict", v.kind.value == "CONSISTENT_STATE_DEPENDENT",
               None, kind=v.kind, witness=v.witness)
    uni = comp.base
    worst = max(check_born_reproduction(uni, sid, sc.meas, {o}) for sid in uni.densities for o in sc.meas.outcomes)
    report.add("CONSISTENT_STATE_DEPENDENT", "uniform model born reproduction", worst <= tol, worst)

    comp, _ = prism_fixture()
    v = detect_lemma_contradiction(comp, sc)
    report.add("INEFFICIENCY", "verdict", v.kind.value == "INEFFICIENCY", None,
               kind=v.kind, witness=v.witness, theta=v.theta)
    worst = max(check_conditional_reproduction(comp.base, pid, sc.meas, {o})
                for pid in comp.prep_ids for o in sc.meas.outcomes)
    report.add("INEFFICIENCY", "conditional born reproduction", worst <= tol, worst)
    ineff = builtin_inefficiency(comp, sc)
    expect = 1 - (1 - PRISM_Q) ** 2
    for pid, val in ineff.per_preparation.items():
        report.add("INEFFICIENCY", f"no-show[{pid}]", abs(val - expect) <= tol, abs(val - expect),
                   no_show=val, expected=expect)
    return report


def demo_additivity(tol: float = ATOL) -> RunReport:
    report = RunReport("demo additivity")
    comp, sc = contradiction_fixture()
    w = find_common_cell(comp)
    a = additivity_audit(comp, sc, w)
    report.add("additivity at shared variable", "mismatch", a.mismatch and a.sum_of_values == 0, a.operator_residual,
               cell=w, projector_values=a.projector_values, identity_value=a.identity_value,
               message=f"sum of values {a.sum_of_values}, value of sum {a.identity_value}")

    comp = force_state_independent_table(
        compose_independent(build_overlap_fixture(PRISM_Q), ("0", "+"), 2), sc.meas, deterministic=True
    )
    w = find_common_cell(comp)
    a = additivity_audit(comp, sc, w)
    report.add("partial-overlap composite", "mismatch at shared variable", a.mismatch, None,
               cell=w, projector_values=a.projector_values,
               message=f"sum of values {a.sum_of_values}, value of sum {a.identity_value}")
    sup = comp.supports()
    clean = [c for c in comp.base.space.ids if sum(c in s for s in sup.values()) == 1]
    sums = {additivity_audit(comp, sc, c).sum_of_values for c in clean}
    report.add("partial-overlap composite", "non-overlap cells sum to 1", sums == {1}, None,
               cells=len(clean), sums=sorted(sums))
    return report


RUNNERS = {
    "toy": demo_toy,
    "segregate": demo_segregate,
    "mix": demo_mix,
    "pbr": demo_pbr,
    "additivity": demo_additivity,
}


def run_demo(name: str, tol: float = ATOL) -> RunReport:
    try:
        runner = RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}") from None
    return runner(tol)
