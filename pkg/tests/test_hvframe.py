from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TOY_OBS
from hvkit.errors import InvariantError, MissingEntryError, TotalNoShowError, WrongAuditError
from hvkit.hvframe import (
    ANY,
    HVModel,
    HVSpace,
    ResponseTable,
    StateDensity,
    augment,
    check_born_reproduction,
    check_conditional_reproduction,
    classify,
    overlap_report,
)
from hvkit.qcore import KET_0, KET_1, KET_PLUS, PAULI_Z, born_probability
from hvkit.toymodels import build_interval_fixture, build_uniform_state_dependent


def test_space_requires_unit_measure_and_distinct_ids():
    with pytest.raises(InvariantError, match="unit-measure"):
        HVSpace((("a", 0.5), ("b", 0.4)))
    with pytest.raises(InvariantError, match="distinct-cells"):
        HVSpace((("a", 0.5), ("a", 0.5)))


def test_density_normalization_names_the_state():
    space = HVSpace((("a", 0.5), ("b", 0.5)))
    with pytest.raises(InvariantError, match="density-normalization") as exc:
        HVModel(space, {"0": KET_0}, {"0": StateDensity({"a": 1.8})})
    assert exc.value.where["state"] == "0"


def test_row_totality_names_cell_and_observable():
    with pytest.raises(InvariantError, match="outcome-totality") as exc:
        ResponseTable("Z", (1, -1), {"a": (0.6, 0.5)})
    assert exc.value.where["cell"] == "a"
    assert exc.value.where["observable"] == "Z"


def test_theta_is_reserved():
    with pytest.raises(InvariantError):
        ResponseTable("Z", ("θ", 1), {})


def test_tagging_styles_cannot_mix():
    space = HVSpace((("a", 1),))
    t_any = ResponseTable("Z", (1, -1), {"a": (1, 0)})
    t_one = ResponseTable("Z", (1, -1), {"a": (1, 0)}, state_tag="0")
    with pytest.raises(InvariantError, match="single-tagging-style"):
        HVModel(space, {"0": KET_0}, {"0": {"a": 1}}, {("Z", ANY): t_any, ("Z", "0"): t_one})


def test_born_reproduction_mixed_toy(mixed_toy):
    for sid in mixed_toy.densities:
        for A in TOY_OBS:
            assert check_born_reproduction(mixed_toy, sid, A, {1}) == 0.0


def test_born_reproduction_uniform_state_dependent(scenario):
    model = build_uniform_state_dependent(scenario.meas, scenario.products)
    for sid in model.densities:
        for o in scenario.meas.outcomes:
            assert check_born_reproduction(model, sid, scenario.meas, {o}) <= 1e-12


def test_born_reproduction_detects_corrupted_density():
    # cells (0, .5] and (.5, 1]; +1 on the lower cell, as the toy does for |+>
    space = HVSpace((("lo", 0.5), ("hi", 0.5)))
    table = ResponseTable("Z", (1, -1), {"lo": (1, 0), "hi": (0, 1)}, state_tag="+")
    model = HVModel(space, {"+": KET_PLUS}, {"+": {"lo": 2}}, {("Z", "+"): table}, {"Z": PAULI_Z})
    assert check_born_reproduction(model, "+", PAULI_Z, {1}) == pytest.approx(0.5, abs=1e-15)


def test_born_reproduction_errors(mixed_toy):
    with pytest.raises(MissingEntryError):
        check_born_reproduction(mixed_toy, "nope", PAULI_Z, {1})
    aug = mixed_toy.with_table(augment(mixed_toy.table_for("Z", "0")))
    with pytest.raises(WrongAuditError):
        check_born_reproduction(aug, "0", PAULI_Z, {1})


def test_conditional_with_zero_theta_equals_plain(mixed_toy):
    wrapped = mixed_toy
    for sid in mixed_toy.densities:
        wrapped = wrapped.with_table(augment(mixed_toy.table_for("X", sid)))
    for sid in mixed_toy.densities:
        for o in (1, -1):
            assert check_conditional_reproduction(wrapped, sid, TOY_OBS[0], {o}) == check_born_reproduction(
                mixed_toy, sid, TOY_OBS[0], {o}
            )


def test_conditional_total_no_show():
    space = HVSpace((("a", 1),))
    t = ResponseTable("Z", (1, -1), {"a": (0, 0, 1)}, augmented=True)
    model = HVModel(space, {"0": KET_0}, {"0": {"a": 1}}, {("Z", ANY): t}, {"Z": PAULI_Z})
    with pytest.raises(TotalNoShowError):
        check_conditional_reproduction(model, "0", PAULI_Z, {1})


def test_overlap_reports():
    toy_overlap = overlap_report(
        build_uniform_state_dependent(PAULI_Z, [KET_0, KET_PLUS]), "0", "+"
    )
    assert toy_overlap.q_base == 1.0
    fx = build_interval_fixture({"0": (0, 0.5), "1": (0.25, 0.75)}, {"0": KET_0, "1": KET_1})
    r = overlap_report(fx, "0", "1")
    assert (r.q_base, r.q_under_first, r.q_under_second) == (0.25, 0.5, 0.5)
    with pytest.raises(MissingEntryError):
        overlap_report(fx, "0", "x")


def test_classify_examples(mixed_toy, segregated_toy, scenario):
    assert classify(mixed_toy).as_strings() == ("mixed", "state-dependent", "deterministic")
    assert classify(segregated_toy).as_strings() == ("segregated", "state-dependent", "deterministic")
    uni = build_uniform_state_dependent(scenario.meas, scenario.products)
    assert classify(uni).as_strings() == ("mixed", "state-dependent", "stochastic")


def test_outcome_sets_exclude_theta(mixed_toy):
    with pytest.raises(ValueError):
        mixed_toy.reproduced("0", "Z", {"θ"})


# -- properties ----------------------------------------------------------------


def test_row_totality_invariant_holds_on_builders(mixed_toy, scenario):
    from hvkit.demos import prism_fixture

    prism, _ = prism_fixture()
    for model in (mixed_toy, prism.base, build_uniform_state_dependent(scenario.meas, scenario.products)):
        for t in model.responses.values():
            for row in t.rows.values():
                assert abs(float(sum(row)) - 1) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=2, max_size=6), st.data())
def test_monotone_in_outcome_set(weights, data):
    n = len(weights)
    ids = [f"c{k}" for k in range(n)]
    space = HVSpace(tuple((c, Fraction(1, n)) for c in ids))
    z = Fraction(sum(weights), n)
    dens = {c: Fraction(w) / z for c, w in zip(ids, weights)}
    outcomes = ("a", "b", "c")
    rows = {}
    for c in ids:
        raw = data.draw(st.lists(st.integers(0, 5), min_size=3, max_size=3).filter(any))
        rows[c] = tuple(Fraction(r, sum(raw)) for r in raw)

    model = HVModel(space, {"s": KET_0}, {"s": dens}, {("T", ANY): ResponseTable("T", outcomes, rows)})
    s1 = data.draw(st.sets(st.sampled_from(outcomes)))
    s2 = s1 | data.draw(st.sets(st.sampled_from(outcomes)))
    assert model.reproduced("s", "T", s1) <= model.reproduced("s", "T", s2)
    assert model.reproduced("s", "T", outcomes) == 1


def test_pointwise_support_lemma(scenario):
    """A zero Born probability reproduced exactly forces R({j}, c) = 0 on the support."""
    model = build_uniform_state_dependent(scenario.meas, scenario.products)
    for sid, o in zip(model.densities, scenario.meas.outcomes):
        assert born_probability(model.states[sid], scenario.meas, {o}) <= 1e-12
        assert check_born_reproduction(model, sid, scenario.meas, {o}) <= 1e-12
        t = model.table_for(scenario.meas.name, sid)
        for c in model.support(sid):
            assert float(t.value(c, {o})) <= 1e-12
