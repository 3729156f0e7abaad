"""Antidistinguishing scenarios, the shared-variable contradiction, built-in
inefficiency, and the additivity audit for projector sums."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .composer import CompositeModel, find_common_cell
from .errors import NoWitnessError, PreconditionError
from .hvframe import ANY, ResponseTable
from .qcore import (
    ATOL,
    KET_0,
    KET_1,
    KET_MINUS,
    KET_PLUS,
    ProjectiveMeasurement,
    PureState,
    born_probability,
    gram_residual,
    identity_resolution_residual,
    state,
    tensor_product,
)


def build_product_states(psi1: PureState, psi2: PureState, L: int) -> list[PureState]:
    """All ψ_{x1}⊗...⊗ψ_{xL}, x_i ∈ {1, 2}, in binary order of x."""
    if L < 1:
        raise ValueError("L must be at least 1")
    if abs(psi1.inner(psi2)) >= 1 - ATOL:
        raise ValueError("psi1 and psi2 must be distinct states")
    out = []
    for k in range(2 ** L):
        bits = [(k >> (L - 1 - i)) & 1 for i in range(L)]
        out.append(tensor_product([psi2 if b else psi1 for b in bits]))
    return out


def _sum(*terms: PureState) -> np.ndarray:
    return sum(t.amplitudes for t in terms) / np.sqrt(2)


def pbr_basis_L2() -> ProjectiveMeasurement:
    """Four-outcome basis that antidistinguishes |00>, |0+>, |+0>, |++>."""
    t = lambda a, b: tensor_product([a, b])  # noqa: E731
    vecs = [
        _sum(t(KET_0, KET_1), t(KET_1, KET_0)),
        _sum(t(KET_0, KET_MINUS), t(KET_1, KET_PLUS)),
        _sum(t(KET_PLUS, KET_1), t(KET_MINUS, KET_0)),
        _sum(t(KET_PLUS, KET_MINUS), t(KET_MINUS, KET_PLUS)),
    ]
    meas = ProjectiveMeasurement(tuple(state(v, f"Φ{j}") for j, v in enumerate(vecs, 1)), (1, 2, 3, 4), "M_PBR")
    products = build_product_states(KET_0, KET_PLUS, 2)
    if (gram_residual(meas) > ATOL or identity_resolution_residual(meas) > ATOL
            or max(verify_antidistinguishing(meas, products)) > ATOL):
        raise RuntimeError("canonical antidistinguishing basis failed certification")
    return meas


def verify_antidistinguishing(meas: ProjectiveMeasurement, products: Sequence[PureState]) -> tuple[float, ...]:
    """Born probability that product j yields its own outcome j, for each j."""
    products = list(products)
    if len(products) != len(meas.outcomes):
        raise ValueError(f"{len(products)} states for {len(meas.outcomes)} outcomes")
    return tuple(born_probability(phi, meas, {o}) for phi, o in zip(products, meas.outcomes))


@dataclass(frozen=True)
class PbrScenario:
    psi1: PureState
    psi2: PureState
    L: int
    meas: ProjectiveMeasurement
    products: tuple[PureState, ...] = field(default=())

    def __post_init__(self):
        products = tuple(self.products) or tuple(build_product_states(self.psi1, self.psi2, self.L))
        object.__setattr__(self, "products", products)
        if len(products) != 2 ** self.L:
            raise ValueError("scenario needs 2^L product states")
        res = verify_antidistinguishing(self.meas, products)
        bad = [j for j, r in enumerate(res, 1) if r > ATOL]
        if bad:
            raise ValueError(f"measurement does not antidistinguish products {bad} (residuals {res})")

    @property
    def N(self) -> int:
        return len(self.meas.outcomes)


def canonical_scenario() -> PbrScenario:
    return PbrScenario(KET_0, KET_PLUS, 2, pbr_basis_L2())


class VerdictKind(str, enum.Enum):
    CONTRADICTION = "CONTRADICTION"
    CONSISTENT_STATE_DEPENDENT = "CONSISTENT_STATE_DEPENDENT"
    INEFFICIENCY = "INEFFICIENCY"


@dataclass(frozen=True)
class LemmaVerdict:
    kind: VerdictKind
    witness: object
    chain: tuple[float, ...]
    totality: float | None
    theta: float = 0.0


def _check_alignment(composite: CompositeModel, scenario: PbrScenario):
    if len(composite.preparations) != len(scenario.products):
        raise ValueError("composite and scenario disagree on the number of preparations")
    for pid, phi in zip(composite.prep_ids, scenario.products):
        if not composite.base.state(pid).close_to(phi):
            raise ValueError(f"composite preparation {pid!r} is not the scenario's product state")


def _tables(composite: CompositeModel, meas: ProjectiveMeasurement) -> list[ResponseTable]:
    tables = composite.base.tables(meas.name)
    if not tables:
        raise PreconditionError(f"composite carries no response table for {meas.name!r}")
    return tables


def detect_lemma_contradiction(composite: CompositeModel, scenario: PbrScenario) -> LemmaVerdict:
    """Read R({j}, λc) for every outcome j at a variable λc shared by all preparations."""
    _check_alignment(composite, scenario)
    meas = scenario.meas
    tables = _tables(composite, meas)
    witness = find_common_cell(composite)
    if tables[0].state_tag != ANY:
        chain = ()
        if witness is not None:
            chain = tuple(
                float(composite.base.table_for(meas.name, pid).value(witness, {o}))
                for pid, o in zip(composite.prep_ids, meas.outcomes)
            )
        return LemmaVerdict(VerdictKind.CONSISTENT_STATE_DEPENDENT, witness, chain, None)
    if witness is None:
        raise NoWitnessError("no hidden variable lies in every preparation's support")
    table = tables[0]
    chain = tuple(table.value(witness, {o}) for o in meas.outcomes)
    # every outcome j has Born probability 0 for the j-th preparation, and the
    # witness is in that preparation's support: R({j}, λc) must vanish
    if table.augmented:
        return LemmaVerdict(
            VerdictKind.INEFFICIENCY, witness, tuple(map(float, chain)),
            float(table.detection(witness)), float(table.theta(witness)),
        )
    nonzero = [o for o, v in zip(meas.outcomes, chain) if v != 0]
    if nonzero:
        raise PreconditionError(
            f"table gives outcome(s) {nonzero} weight at {witness!r}, so it cannot reproduce "
            "the zero Born probabilities of the preparations that share it"
        )
    return LemmaVerdict(VerdictKind.CONTRADICTION, witness, tuple(map(float, chain)), float(table.detection(witness)))


@dataclass(frozen=True)
class InefficiencyReport:
    per_cell: dict
    per_preparation: dict
    worst_case: float
    note: str = ""


def builtin_inefficiency(composite: CompositeModel, scenario: PbrScenario) -> InefficiencyReport:
    """No-show weight R({θ}, c) per cell and its average under each preparation."""
    _check_alignment(composite, scenario)
    tables = _tables(composite, scenario.meas)
    table = tables[0]
    base = composite.base
    if table.state_tag != ANY:
        raise PreconditionError("built-in inefficiency is defined for state-independent tables")
    if not table.augmented:
        zeros = {pid: 0.0 for pid in composite.prep_ids}
        return InefficiencyReport({}, zeros, 0.0, "table is not augmented: no-show weight is zero by definition")
    per_cell = {c: float(table.theta(c)) for c in base.space.ids}
    per_prep = {}
    for pid in composite.prep_ids:
        per_prep[pid] = float(sum((table.theta(c) * base.mass(pid, c) for c in base.support(pid)), Fraction(0)))
    return InefficiencyReport(per_cell, per_prep, max(per_prep.values()))


@dataclass(frozen=True)
class IdentityResolutionAudit:
    cell: object
    projector_values: tuple[int, ...]
    identity_value: int
    operator_residual: float

    @property
    def sum_of_values(self) -> int:
        return sum(self.projector_values)

    @property
    def mismatch(self) -> bool:
        return self.sum_of_values != self.identity_value


def additivity_audit(composite: CompositeModel, scenario: PbrScenario, cell) -> IdentityResolutionAudit:
    """Compare the value of I = Σ_j P_j at ``cell`` with the sum of the P_j values.

    The identity always takes value 1: measuring it always gives its single
    outcome.
    """
    tables = _tables(composite, scenario.meas)
    table = tables[0]
    if table.state_tag != ANY:
        raise PreconditionError("additivity audit needs a state-independent table")
    if not table.deterministic:
        raise PreconditionError("additivity audit needs a deterministic table; values are undefined otherwise")
    composite.base.space.measure(cell)
    values = tuple(int(table.value(cell, {o})) for o in scenario.meas.outcomes)
    return IdentityResolutionAudit(cell, values, 1, identity_resolution_residual(scenario.meas))
