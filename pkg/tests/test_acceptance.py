"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from fractions import Fraction
from itertools import combinations

import pytest

from hvkit.composer import (
    NativeCell,
    check_compactness,
    check_compatibility,
    common_support_measure,
    compose_compact_native,
    compose_independent,
    find_common_cell,
    force_state_independent_table,
    strictness_survey,
    zero_cells,
)
from hvkit.demos import (
    TOY_OBSERVABLES,
    TOY_STATES,
    contradiction_fixture,
    prism_fixture,
    uniform_composite_fixture,
)
from hvkit.hvframe import check_born_reproduction, check_conditional_reproduction, classify, overlap_report
from hvkit.pbrcheck import (
    VerdictKind,
    additivity_audit,
    builtin_inefficiency,
    canonical_scenario,
    detect_lemma_contradiction,
)
from hvkit.qcore import born_probability, gram_residual, identity_resolution_residual
from hvkit.toymodels import (
    Geometry,
    build_mixed_toy,
    build_overlap_fixture,
    build_segregated_toy,
)
from hvkit.transforms import assert_equivalent, full_suite, mix, segregate

TOL = 1e-12


def gate(number: int, title: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    print("\n" + line)
    assert ok, line


def _pairwise_q(model):
    return [overlap_report(model, a, b).q_base for a, b in combinations(model.densities, 2)]


def test_criterion_1_born_reproduction():
    model = build_mixed_toy(TOY_STATES, TOY_OBSERVABLES)
    res = [
        check_born_reproduction(model, sid, A, {o})
        for sid in model.densities for A in TOY_OBSERVABLES for o in A.outcomes
    ]
    gate(1, "mixed toy Born reproduction", len(res) == 18 and max(res) <= TOL,
         f"{len(res)} audits, max residual {max(res):.2e}")


def test_criterion_2_segregation():
    toy = build_mixed_toy(TOY_STATES, TOY_OBSERVABLES)
    seg = segregate(toy)
    rep = assert_equivalent(toy, seg, full_suite(toy))
    qs = _pairwise_q(seg)
    ok = classify(seg).mixing.value == "segregated" and all(q == 0 for q in qs) and rep.passed and rep.max_delta == 0
    gate(2, "segregate preserves statistics", ok, f"q_base {qs}, max delta {float(rep.max_delta)}")


def test_criterion_3_mixing_and_round_trip():
    seg = build_segregated_toy(TOY_STATES, TOY_OBSERVABLES, Geometry.DISJOINT_INTERVALS)
    mixed = mix(seg)
    rep = assert_equivalent(seg, mixed, full_suite(seg))
    toy = build_mixed_toy(TOY_STATES, TOY_OBSERVABLES)
    rt = assert_equivalent(toy, mix(segregate(toy)), full_suite(toy))
    ok = (classify(mixed).mixing.value == "mixed" and rep.passed and rep.max_delta == 0
          and rt.passed and rt.max_delta == 0)
    gate(3, "mix preserves statistics and round trip holds", ok,
         f"max delta {float(rep.max_delta)}, round trip {float(rt.max_delta)}")


def test_criterion_4_antidistinguishing_basis():
    sc = canonical_scenario()
    g, r = gram_residual(sc.meas), identity_resolution_residual(sc.meas)
    probs = [born_probability(phi, sc.meas, {j}) for phi, j in zip(sc.products, sc.meas.outcomes)]
    gate(4, "antidistinguishing basis", g <= TOL and r <= TOL and max(probs) <= TOL,
         f"gram {g:.1e}, identity {r:.1e}, max P(phi_j -> j) {max(probs):.1e}")


def test_criterion_5_lemma_verdicts():
    comp, sc = contradiction_fixture()
    v = detect_lemma_contradiction(comp, sc)
    uni_comp, _ = uniform_composite_fixture()
    u = detect_lemma_contradiction(uni_comp, sc)
    ok = (v.kind is VerdictKind.CONTRADICTION and v.chain == (0, 0, 0, 0) and v.totality == 0
          and u.kind is VerdictKind.CONSISTENT_STATE_DEPENDENT)
    gate(5, "contradiction vs state-dependent verdicts", ok,
         f"{v.kind.value} chain {v.chain} totality {v.totality}; uniform model {u.kind.value}")


def test_criterion_6_builtin_inefficiency():
    comp, sc = prism_fixture(0.25, 2)
    res = max(check_conditional_reproduction(comp.base, pid, sc.meas, {o})
              for pid in comp.prep_ids for o in sc.meas.outcomes)
    ineff = builtin_inefficiency(comp, sc).per_preparation
    expect = 1 - (1 - 0.25) ** 2
    dev = max(abs(v - expect) for v in ineff.values())
    gate(6, "prism conditional reproduction and no-show", len(ineff) == 4 and res <= TOL and dev <= TOL,
         f"max conditional residual {res:.1e}, no-show {sorted(set(ineff.values()))}")


def test_criterion_7_common_support_q_to_the_L():
    worst = 0.0
    for q in (0.1, 0.25, 0.5, 1.0):
        for L in (1, 2, 3):
            comp = compose_independent(build_overlap_fixture(q), ("0", "+"), L)
            worst = max(worst, abs(float(common_support_measure(comp)) - q ** L))
    gate(7, "common support measure equals q^L", worst <= TOL, f"max deviation {worst:.1e}")


def test_criterion_8_additivity():
    comp, sc = contradiction_fixture()
    w = find_common_cell(comp)
    a = additivity_audit(comp, sc, w)
    det = force_state_independent_table(
        compose_independent(build_overlap_fixture(0.25), ("0", "+"), 2), sc.meas, deterministic=True
    )
    sup = det.supports()
    clean = [c for c in det.base.space.ids if sum(c in s for s in sup.values()) == 1]
    sums = {additivity_audit(det, sc, c).sum_of_values for c in clean}
    ok = a.projector_values == (0, 0, 0, 0) and a.identity_value == 1 and a.mismatch and bool(clean) and sums == {1}
    gate(8, "additivity breaks at the shared cell only", ok,
         f"witness values {a.projector_values} vs identity {a.identity_value}; {len(clean)} non-overlap cells sum to {sums}")


def test_criterion_9_strictness():
    fx = build_overlap_fixture(0.25)
    comp = compose_compact_native(fx, ("0", "+"), 2, (NativeCell("native", Fraction(1, 4)),))
    comp = zero_cells(comp, "0⊗+", [("shared", "shared")])
    compact, compat = check_compactness(comp, fx, ("0", "+")), check_compatibility(comp, fx, ("0", "+"))
    stats = strictness_survey(seed=20261018, count=120)
    ok = bool(compact) and not compat and stats["fixtures"] >= 100 and not stats["violations"]
    gate(9, "compatibility strictly stronger than compactness", ok,
         f"explicit fixture compact={compact.status.value} compatible={compat.holds}; "
         f"{stats['fixtures']} seeded fixtures, {stats['compatible']} compatible, 0 violations expected, "
         f"{len(stats['violations'])} found")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
