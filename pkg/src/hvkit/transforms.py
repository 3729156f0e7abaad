"""Relabeling transforms between mixed and segregated models, and the
statistical-equivalence auditor that certifies them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MissingEntryError, PreconditionError
from .hvframe import (
    ANY,
    HVModel,
    HVSpace,
    ResponseTable,
    StateDensity,
    freeze_id,
    is_segregated,
)


def segregate(model: HVModel) -> HVModel:
    """Rename each cell c seen by state s as the pair (c, s).

    Every state gets its own copy of the space. Copies are scaled to measure
    1/n and densities multiplied by n, so cell masses are unchanged and the
    total stays at one. Per-state tables move to their state's copy; an ANY
    table is repeated on every copy and keeps its tag.
    """
    sids = list(model.densities)
    n = len(sids)
    cells = [((c, s), m / n) for s in sids for c, m in model.space.cells]
    densities = {
        s: StateDensity({(c, s): w * n for c, w in model.density(s).weights.items()}) for s in sids
    }
    responses = {}
    for (obs, tag), t in model.responses.items():
        if tag == ANY:
            rows = {(c, s): t.rows[c] for s in sids for c in model.space.ids if c in t.rows}
        else:
            rows = {(c, tag): v for c, v in t.rows.items()}
        responses[(obs, tag)] = ResponseTable(obs, t.outcomes, rows, tag, t.augmented, t.partial)
    space = HVSpace(tuple(cells), label=f"segregated({model.space.label})")
    return HVModel(space, model.states, densities, responses, model.observables)


def _block_cuts(model: HVModel, sid: str):
    """Support cells of ``sid`` laid end to end on (0, 1], scaled by the block's measure."""
    support = model.support(sid)
    total = sum((model.space.measure(c) for c in support), Fraction(0))
    spans, lo = [], Fraction(0)
    for c in support:
        hi = lo + model.space.measure(c) / total
        spans.append((c, lo, hi))
        lo = hi
    return spans, total


def mix(model: HVModel) -> HVModel:
    """Identify every state's block with one shared copy of (0, 1].

    Each block (the support of one state) is rescaled to unit length; the
    blocks are refined to the union of their cut points and the k-th piece
    of every block becomes shared cell ``("m", k)``. Tables become per-state
    tables on the shared cells, except that an ANY table stays ANY when all
    blocks give it identical rows.
    """
    if not is_segregated(model):
        raise PreconditionError("mix expects a segregated model")
    sids = list(model.densities)
    blocks = {s: _block_cuts(model, s) for s in sids}
    cuts = sorted({x for spans, _ in blocks.values() for _, lo, hi in spans for x in (lo, hi)})
    pieces = [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]
    ids = [("m", k) for k in range(len(pieces))]

    # source cell of each shared piece, per state
    source: dict[str, list] = {}
    for s in sids:
        spans, _ = blocks[s]
        out, j = [], 0
        for a, b in pieces:
            while spans[j][2] < b:
                j += 1
            out.append(spans[j][0])
        source[s] = out

    space = HVSpace(tuple(zip(ids, (b - a for a, b in pieces))), label=f"mixed({model.space.label})")
    densities = {}
    for s in sids:
        _, total = blocks[s]
        d = model.density(s)
        densities[s] = StateDensity({i: d.weight(c) * total for i, c in zip(ids, source[s])})

    responses = {}
    for obs in model.observable_ids:
        any_table = model.responses.get((obs, ANY))
        per_state = {}
        for s in sids:
            try:
                t = model.table_for(obs, s)
            except MissingEntryError:
                continue
            per_state[s] = ResponseTable(
                obs, t.outcomes, {i: t.row(c) for i, c in zip(ids, source[s])}, s, t.augmented, t.partial
            )
        if any_table is not None and len({tuple(t.rows.values()) for t in per_state.values()}) == 1:
            t = next(iter(per_state.values()))
            responses[(obs, ANY)] = ResponseTable(obs, t.outcomes, t.rows, ANY, t.augmented, t.partial)
        else:
            responses.update({(obs, s): t for s, t in per_state.items()})
    return HVModel(space, model.states, densities, responses, model.observables)


# -- equivalence -------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceSuite:
    triples: tuple[tuple[str, str, frozenset], ...]
    tolerance: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "triples", tuple((s, o, frozenset(freeze_id(x) for x in out)) for s, o, out in self.triples)
        )

    @classmethod
    def from_json(cls, text: str) -> "EquivalenceSuite":
        data = json.loads(text)
        return cls(tuple((s, o, out) for s, o, out in data["triples"]), float(data.get("tolerance", 0.0)))


def full_suite(model: HVModel, tolerance: float = 0.0) -> EquivalenceSuite:
    """Every (state, observable, singleton outcome) the model can answer."""
    triples = []
    for sid in model.densities:
        for obs in model.observable_ids:
            try:
                t = model.table_for(obs, sid)
            except MissingEntryError:
                continue
            triples += [(sid, obs, frozenset([o])) for o in t.outcomes]
    return EquivalenceSuite(tuple(triples), tolerance)


def audited_probability(model: HVModel, sid: str, obs: str, s) -> Fraction:
    """Unconditional probability for plain tables, conditional for augmented ones."""
    t = model.table_for(obs, sid)
    return model.conditional(sid, obs, s) if t.augmented else model.reproduced(sid, obs, s)


@dataclass(frozen=True)
class EquivalenceRow:
    state: str
    observable: str
    outcomes: tuple
    prob_a: float
    prob_b: float
    delta: float


@dataclass(frozen=True)
class EquivalenceReport:
    rows: tuple[EquivalenceRow, ...]
    tolerance: float
    max_delta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "max_delta", max((r.delta for r in self.rows), default=0.0))

    @property
    def passed(self) -> bool:
        return self.max_delta <= self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def assert_equivalent(a: HVModel, b: HVModel, suite: EquivalenceSuite | None = None) -> EquivalenceReport:
    """Compare audited probabilities of two models triple by triple.

    Despite the name this does not raise on a mismatch; read ``verdict``.
    """
    suite = suite or full_suite(a)
    rows = []
    for sid, obs, s in suite.triples:
        try:
            pa = audited_probability(a, sid, obs, s)
            pb = audited_probability(b, sid, obs, s)
        except MissingEntryError as exc:
            raise MissingEntryError(f"triple ({sid!r}, {obs!r}, {sorted(s, key=repr)!r}): {exc}") from None
        rows.append(EquivalenceRow(sid, obs, tuple(sorted(s, key=repr)), float(pa), float(pb), float(abs(pa - pb))))
    return EquivalenceReport(tuple(rows), suite.tolerance)

