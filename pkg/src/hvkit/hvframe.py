"""Finite-partition hidden-variables models and their statistical audits.

A model carries one hidden-variable space (a finite list of cells, each
with a measure), one density per prepared state, and response tables that
give, for every cell, a probability vector over an observable's outcomes.

Measures, density weights and response entries are held as
:class:`fractions.Fraction`. Floats are converted exactly on the way in, so
every integral over the space is an exact finite sum and comparisons between
models that differ only by relabeling come out identical, not merely close.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, NamedTuple

from .errors import InvariantError, MissingEntryError, TotalNoShowError, WrongAuditError
from .qcore import ATOL, THETA, ProjectiveMeasurement, PureState, born_probability

ANY = "*"

CellId = Hashable


def as_fraction(x) -> Fraction:
    """Exact rational value of ``x`` (int, float, Fraction, or ``"p/q"`` text)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, str)):
        return Fraction(x)
    f = float(x)
    if f != f or f in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite number {x!r}")
    return Fraction(f)


def freeze_id(cell):
    """Turn JSON-decoded lists into tuples so cell ids are hashable."""
    if isinstance(cell, list):
        return tuple(freeze_id(c) for c in cell)
    return cell


def _near(x: Fraction, target: float = 1.0) -> bool:
    return abs(float(x) - target) <= ATOL


@dataclass(frozen=True)
class HVSpace:
    """Hidden-variable space as an ordered partition into measurable cells."""

    cells: tuple[tuple[CellId, Fraction], ...]
    label: str = "Λ"
    _measure: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cells = tuple((freeze_id(c), as_fraction(m)) for c, m in self.cells)
        object.__setattr__(self, "cells", cells)
        measure = {}
        for c, m in cells:
            if c in measure:
                raise InvariantError("distinct-cells", "duplicate cell id", cell=c)
            if m < 0:
                raise InvariantError("nonnegative-measure", f"negative measure {float(m)}", cell=c)
            measure[c] = m
        total = sum(measure.values(), Fraction(0))
        if not _near(total):
            raise InvariantError(
                "unit-measure", f"cell measures sum to {float(total)!r}, expected 1", space=self.label
            )
        object.__setattr__(self, "_measure", measure)

    @property
    def ids(self) -> tuple:
        return tuple(c for c, _ in self.cells)

    def measure(self, cell) -> Fraction:
        try:
            return self._measure[cell]
        except KeyError:
            raise MissingEntryError(f"no cell {cell!r} in space {self.label!r}") from None

    def __contains__(self, cell) -> bool:
        return cell in self._measure

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class StateDensity:
    """Density weights per cell; cells not listed have weight 0."""

    weights: Mapping[CellId, Fraction]

    def __post_init__(self):
        w = {freeze_id(c): as_fraction(v) for c, v in dict(self.weights).items()}
        object.__setattr__(self, "weights", w)

    def weight(self, cell) -> Fraction:
        return self.weights.get(cell, Fraction(0))

    def support(self, space: HVSpace) -> tuple:
        """Cells of positive weight, in the space's order."""
        return tuple(c for c in space.ids if self.weight(c) > 0)

    def total(self, space: HVSpace) -> Fraction:
        return sum((self.weight(c) * m for c, m in space.cells), Fraction(0))


@dataclass(frozen=True)
class ResponseTable:
    """Response function of one observable, as a row per cell.

    Row entries follow ``outcomes``; when ``augmented`` a final entry holds the
    no-show weight. ``state_tag`` is :data:`ANY` for a state-independent table
    or the id of the single state it serves. ``partial`` admits rows summing to
    less than one; it exists only to exhibit tables that cannot satisfy the
    outcome-totality requirement.
    """

    observable: str
    outcomes: tuple
    rows: Mapping[CellId, tuple[Fraction, ...]]
    state_tag: str = ANY
    augmented: bool = False
    partial: bool = False

    def __post_init__(self):
        outcomes = tuple(freeze_id(o) for o in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if THETA in outcomes:
            raise InvariantError("theta-reserved", "θ cannot be a spectrum label", observable=self.observable)
        width = len(outcomes) + int(self.augmented)
        rows = {}
        for c, vals in dict(self.rows).items():
            c = freeze_id(c)
            vals = tuple(as_fraction(v) for v in vals)
            if len(vals) != width:
                raise InvariantError(
                    "row-width", f"row has {len(vals)} entries, expected {width}",
                    observable=self.observable, cell=c,
                )
            for v in vals:
                if v < 0 or v > 1:
                    raise InvariantError(
                        "entry-range", f"entry {float(v)!r} outside [0,1]",
                        observable=self.observable, cell=c,
                    )
            total = sum(vals, Fraction(0))
            ok = (float(total) <= 1 + ATOL) if self.partial else _near(total)
            if not ok:
                rule = "augmented-totality" if self.augmented else "outcome-totality"
                raise InvariantError(
                    rule, f"row sums to {float(total)!r}, expected 1",
                    observable=self.observable, cell=c, state_tag=self.state_tag,
                )
            rows[c] = vals
        object.__setattr__(self, "rows", rows)

    @property
    def state_independent(self) -> bool:
        return self.state_tag == ANY

    @property
    def deterministic(self) -> bool:
        return all(v in (0, 1) for vals in self.rows.values() for v in vals)

    def indices(self, s: Iterable) -> list[int]:
        out = []
        for label in s:
            if label == THETA:
                raise ValueError("outcome sets range over the spectrum; θ is not a member")
            try:
                out.append(self.outcomes.index(label))
            except ValueError:
                raise ValueError(f"{label!r} is not an outcome of {self.observable!r}") from None
        return out

    def row(self, cell) -> tuple[Fraction, ...]:
        try:
            return self.rows[cell]
        except KeyError:
            raise MissingEntryError(
                f"table {self.observable!r}/{self.state_tag!r} has no row for cell {cell!r}"
            ) from None

    def value(self, cell, s: Iterable) -> Fraction:
        """R(s, cell)."""
        row = self.row(cell)
        return sum((row[k] for k in self.indices(s)), Fraction(0))

    def theta(self, cell) -> Fraction:
        return self.row(cell)[-1] if self.augmented else Fraction(0)

    def detection(self, cell) -> Fraction:
        """R(S(M), cell): weight on the genuine spectrum."""
        row = self.row(cell)
        return sum(row[: len(self.outcomes)], Fraction(0))


def augment(table: ResponseTable) -> ResponseTable:
    """Same table over the augmented spectrum with zero no-show weight."""
    if table.augmented:
        return table
    rows = {c: vals + (Fraction(0),) for c, vals in table.rows.items()}
    return replace(table, rows=rows, augmented=True)


@dataclass(frozen=True)
class HVModel:
    """Space, per-state densities, response tables, and the state catalog."""

    space: HVSpace
    states: Mapping[str, PureState]
    densities: Mapping[str, StateDensity]
    responses: Mapping[tuple[str, str], ResponseTable] = field(default_factory=dict)
    observables: Mapping[str, ProjectiveMeasurement] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", dict(self.states))
        object.__setattr__(self, "observables", dict(self.observables))
        dens = {
            sid: d if isinstance(d, StateDensity) else StateDensity(d)
            for sid, d in dict(self.densities).items()
        }
        object.__setattr__(self, "densities", dens)
        resp = {}
        for key, t in dict(self.responses).items():
            if tuple(key) != (t.observable, t.state_tag):
                raise InvariantError(
                    "table-key", f"key {key!r} does not match table", observable=t.observable
                )
            resp[(t.observable, t.state_tag)] = t
        object.__setattr__(self, "responses", resp)
        self._validate()

    def _validate(self):
        space = self.space
        for sid, d in self.densities.items():
            if sid not in self.states:
                raise InvariantError("catalog", "density for a state missing from the catalog", state=sid)
            for c, w in d.weights.items():
                if c not in space:
                    raise InvariantError("density-cells", "weight on an unknown cell", state=sid, cell=c)
                if w < 0:
                    raise InvariantError("density-nonnegative", f"negative weight {float(w)}", state=sid, cell=c)
            total = d.total(space)
            if not _near(total):
                raise InvariantError(
                    "density-normalization", f"density integrates to {float(total)!r}, expected 1",
                    state=sid,
                )
        styles: dict[str, set] = {}
        for (obs, tag), t in self.responses.items():
            styles.setdefault(obs, set()).add(tag == ANY)
            meas = self.observables.get(obs)
            if meas is not None and tuple(meas.outcomes) != t.outcomes:
                raise InvariantError("table-outcomes", "outcomes differ from the observable", observable=obs)
            for c in t.rows:
                if c not in space:
                    raise InvariantError("table-cells", "row for an unknown cell", observable=obs, cell=c)
            if tag == ANY:
                needed = space.ids
            else:
                if tag not in self.densities:
                    raise InvariantError("table-state", "table tagged with an unknown state", observable=obs, state=tag)
                needed = self.densities[tag].support(space)
            for c in needed:
                if c not in t.rows:
                    raise InvariantError("table-coverage", "missing row", observable=obs, state_tag=tag, cell=c)
        for obs, kinds in styles.items():
            if len(kinds) > 1:
                raise InvariantError(
                    "single-tagging-style", "observable mixes ANY-tagged and per-state tables", observable=obs
                )

    # -- lookups ---------------------------------------------------------

    def density(self, sid: str) -> StateDensity:
        try:
            return self.densities[sid]
        except KeyError:
            raise MissingEntryError(f"no density for state {sid!r}") from None

    def state(self, sid: str) -> PureState:
        try:
            return self.states[sid]
        except KeyError:
            raise MissingEntryError(f"no state {sid!r} in the catalog") from None

    def support(self, sid: str) -> tuple:
        return self.density(sid).support(self.space)

    def mass(self, sid: str, cell) -> Fraction:
        """p(cell)·μ(cell): probability of the cell under the state's density."""
        return self.density(sid).weight(cell) * self.space.measure(cell)

    def table_for(self, observable: str, sid: str) -> ResponseTable:
        t = self.responses.get((observable, ANY)) or self.responses.get((observable, sid))
        if t is None:
            raise MissingEntryError(f"no response table for observable {observable!r} and state {sid!r}")
        return t

    def tables(self, observable: str) -> list[ResponseTable]:
        return [t for (o, _), t in self.responses.items() if o == observable]

    @property
    def observable_ids(self) -> list[str]:
        seen = dict.fromkeys(o for o, _ in self.responses)
        return list(seen)

    # -- integrals -------------------------------------------------------

    def reproduced(self, sid: str, observable: str, s: Iterable) -> Fraction:
        """Σ_cells R(s, c)·p(c)·μ(c), exactly."""
        t = self.table_for(observable, sid)
        idx = t.indices(s)
        total = Fraction(0)
        for c in self.support(sid):
            row = t.row(c)
            total += sum((row[k] for k in idx), Fraction(0)) * self.mass(sid, c)
        return total

    def detection(self, sid: str, observable: str) -> Fraction:
        """Σ_cells R(S(M), c)·p(c)·μ(c)."""
        t = self.table_for(observable, sid)
        return sum((t.detection(c) * self.mass(sid, c) for c in self.support(sid)), Fraction(0))

    def conditional(self, sid: str, observable: str, s: Iterable) -> Fraction:
        den = self.detection(sid, observable)
        if float(den) <= ATOL:
            raise TotalNoShowError(
                f"state {sid!r} never yields an outcome for {observable!r} (detection {float(den)!r})"
            )
        return self.reproduced(sid, observable, s) / den

    # -- functional updates ------------------------------------------------

    def with_table(self, table: ResponseTable) -> "HVModel":
        """Attach ``table``, dropping tables of the same observable it would clash with."""
        def clashes(key):
            obs, tag = key
            return obs == table.observable and (table.state_tag == ANY or tag in (ANY, table.state_tag))

        responses = {k: v for k, v in self.responses.items() if not clashes(k)}
        responses[(table.observable, table.state_tag)] = table
        return replace(self, responses=responses)

    def with_tables(self, tables: Iterable[ResponseTable]) -> "HVModel":
        tables = list(tables)
        obs = {t.observable for t in tables}
        responses = {k: v for k, v in self.responses.items() if k[0] not in obs}
        responses.update({(t.observable, t.state_tag): t for t in tables})
        return replace(self, responses=responses)

    def with_density(self, sid: str, density: StateDensity | Mapping) -> "HVModel":
        dens = dict(self.densities)
        dens[sid] = density if isinstance(density, StateDensity) else StateDensity(density)
        return replace(self, densities=dens)


# -- audits ----------------------------------------------------------------


def _table_and_state(model: HVModel, sid: str, meas: ProjectiveMeasurement):
    psi = model.state(sid)
    model.density(sid)
    return model.table_for(meas.name, sid), psi


def check_born_reproduction(model: HVModel, sid: str, meas: ProjectiveMeasurement, s: Iterable) -> float:
    """|∫ R(s,λ) p(λ) dλ − Born(s)| for a non-augmented table."""
    s = meas.outcome_set(s)
    table, psi = _table_and_state(model, sid, meas)
    if table.augmented:
        raise WrongAuditError(
            f"table for {meas.name!r} is augmented; use check_conditional_reproduction"
        )
    got = model.reproduced(sid, meas.name, s)
    return abs(float(got - as_fraction(born_probability(psi, meas, s))))


def check_conditional_reproduction(model: HVModel, sid: str, meas: ProjectiveMeasurement, s: Iterable) -> float:
    """Residual of Born statistics conditional on the measurement having an outcome."""
    s = meas.outcome_set(s)
    table, psi = _table_and_state(model, sid, meas)
    if not table.augmented:
        table = augment(table)
        model = model.with_table(table)
    got = model.conditional(sid, meas.name, s)
    return abs(float(got - as_fraction(born_probability(psi, meas, s))))


@dataclass(frozen=True)
class OverlapReport:
    pair: tuple[str, str]
    q_base: float
    q_under_first: float
    q_under_second: float
    cells: tuple = ()

    @property
    def q(self) -> float:
        return self.q_base


def overlap_report(model: HVModel, a: str, b: str) -> OverlapReport:
    """Measure of the intersection of two states' supports."""
    sa, sb = set(model.support(a)), set(model.support(b))
    shared = tuple(c for c in model.space.ids if c in sa and c in sb)
    base = sum((model.space.measure(c) for c in shared), Fraction(0))
    qa = sum((model.mass(a, c) for c in shared), Fraction(0))
    qb = sum((model.mass(b, c) for c in shared), Fraction(0))
    return OverlapReport((a, b), float(base), float(qa), float(qb), shared)


class Mixing(str, enum.Enum):
    MIXED = "mixed"
    SEGREGATED = "segregated"


class Dependence(str, enum.Enum):
    STATE_DEPENDENT = "state-dependent"
    STATE_INDEPENDENT = "state-independent"


class Determinism(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


class Classification(NamedTuple):
    mixing: Mixing
    dependence: Dependence
    determinism: Determinism

    def as_strings(self) -> tuple[str, str, str]:
        return tuple(x.value for x in self)


def is_segregated(model: HVModel) -> bool:
    ids = list(model.densities)
    supports = {sid: set(model.support(sid)) for sid in ids}
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            shared = supports[a] & supports[b]
            if any(model.space.measure(c) > 0 for c in shared):
                return False
    return True


def classify(model: HVModel) -> Classification:
    mixing = Mixing.SEGREGATED if is_segregated(model) else Mixing.MIXED
    tables = list(model.responses.values())
    indep = all(t.state_independent for t in tables)
    det = all(t.deterministic for t in tables)
    return Classification(
        mixing,
        Dependence.STATE_INDEPENDENT if indep else Dependence.STATE_DEPENDENT,
        Determinism.DETERMINISTIC if det else Determinism.STOCHASTIC,
    )


def uniform_space(n: int = 1, prefix: str = "u") -> HVSpace:
    """n equal cells covering a unit-measure space."""
    return HVSpace(tuple((f"{prefix}{k}", Fraction(1, n)) for k in range(n)))
