"""Composite-system models built from a component model and a pair of states.

A composite over components ``(a, b)`` and ``L`` systems has one preparation
per choice x in {1, 2}^L, enumerated in binary order, with id ``"a⊗b⊗..."``.
Its cells are tuples of component cells (product cells) plus optional
native cells that belong to the composite alone.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import prod
from typing import Mapping, Sequence

import numpy as np

from .errors import MissingEntryError, PreconditionError, TotalNoShowError
from .hvframe import (
    ANY,
    HVModel,
    HVSpace,
    ResponseTable,
    StateDensity,
    as_fraction,
    overlap_report,
)
from .qcore import KET_0, KET_PLUS, ProjectiveMeasurement, tensor_product
from .toymodels import born_rows

SEP = "⊗"


class CompositionRule(str, enum.Enum):
    INDEPENDENT_PRODUCT = "independent"
    COMPATIBLE = "compatible"
    COMPACT_NATIVE = "compact-native"


@dataclass(frozen=True)
class CompositeModel:
    """A model of L systems plus the bookkeeping that ties it to its component.

    ``components`` maps each composite cell to the tuple of component cells it
    refines, or ``None`` for a native cell.
    """

    base: HVModel
    L: int
    pair: tuple[str, str]
    rule: CompositionRule
    preparations: tuple[tuple[str, tuple[int, ...]], ...]
    components: Mapping
    component_space: HVSpace

    def __post_init__(self):
        object.__setattr__(self, "rule", CompositionRule(self.rule))
        object.__setattr__(self, "pair", tuple(self.pair))
        if len(self.preparations) != 2 ** self.L:
            raise ValueError(f"expected {2 ** self.L} preparations, got {len(self.preparations)}")
        for pid, x in self.preparations:
            if pid not in self.base.densities:
                raise MissingEntryError(f"composite lacks a density for preparation {pid!r}")
        missing = [c for c in self.base.space.ids if c not in self.components]
        if missing:
            raise ValueError(f"cells without component provenance: {missing[:3]!r}")
        self._check_product_measures()

    def _check_product_measures(self):
        groups: dict[tuple, Fraction] = {}
        for c, m in self.base.space.cells:
            comp = self.components[c]
            if comp is not None:
                groups[comp] = groups.get(comp, Fraction(0)) + m
        scale = None
        for comp, m in groups.items():
            expect = prod((self.component_space.measure(c) for c in comp), start=Fraction(1))
            if expect == 0:
                continue
            ratio = m / expect
            if scale is None:
                scale = ratio
            elif abs(float(ratio - scale)) > 1e-12:
                raise ValueError(f"product cell {comp!r} does not carry the product measure")

    @property
    def prep_ids(self) -> list[str]:
        return [pid for pid, _ in self.preparations]

    def native_cells(self) -> list:
        return [c for c in self.base.space.ids if self.components[c] is None]

    def supports(self) -> dict[str, set]:
        return {pid: set(self.base.support(pid)) for pid in self.prep_ids}

    def with_base(self, base: HVModel, components: Mapping | None = None) -> "CompositeModel":
        return replace(self, base=base, components=dict(components or self.components))


def preparation_id(ids: Sequence[str]) -> str:
    return SEP.join(ids)


def enumerate_preparations(pair: tuple[str, str], L: int) -> list[tuple[str, tuple[int, ...]]]:
    out = []
    for x in itertools.product((1, 2), repeat=L):
        out.append((preparation_id([pair[i - 1] for i in x]), x))
    return out


def _check_pair(component: HVModel, pair, L):
    if L < 1:
        raise ValueError("L must be at least 1")
    a, b = pair
    if a == b:
        raise ValueError("the pair needs two distinct states")
    for sid in pair:
        component.density(sid)
        component.state(sid)


def _catalog(component: HVModel, pair, preps):
    return {pid: tensor_product([component.state(pair[i - 1]) for i in x]) for pid, x in preps}


def compose_independent(component: HVModel, pair: tuple[str, str], L: int) -> CompositeModel:
    """L-fold product space; each preparation's density is the product of component densities."""
    _check_pair(component, pair, L)
    preps = enumerate_preparations(pair, L)
    cells, comps = [], {}
    for combo in itertools.product(component.space.cells, repeat=L):
        cid = tuple(c for c, _ in combo)
        cells.append((cid, prod((m for _, m in combo), start=Fraction(1))))
        comps[cid] = cid
    space = HVSpace(tuple(cells), label=f"{component.space.label}^{L}")
    dens = {}
    for pid, x in preps:
        per = [component.density(pair[i - 1]) for i in x]
        supports = [d.support(component.space) for d in per]
        dens[pid] = StateDensity({
            cid: prod((d.weight(c) for d, c in zip(per, cid)), start=Fraction(1))
            for cid in itertools.product(*supports)
        })
    base = HVModel(space, _catalog(component, pair, preps), dens)
    return CompositeModel(base, L, pair, CompositionRule.INDEPENDENT_PRODUCT, tuple(preps), comps, component.space)


def compose_compatible(component: HVModel, pair: tuple[str, str], L: int) -> CompositeModel:
    """Perfectly correlated composite: all L systems share one component variable.

    Preparation x puts mass ∝ Π_i p_{x_i}(λ)·μ(λ) on the diagonal cell
    (λ, ..., λ). A component variable shared by both states therefore lies in
    every preparation's support. Mixed preparations need overlapping supports.
    """
    _check_pair(component, pair, L)
    preps = enumerate_preparations(pair, L)
    cells, comps = [], {}
    for combo in itertools.product(component.space.cells, repeat=L):
        cid = tuple(c for c, _ in combo)
        cells.append((cid, prod((m for _, m in combo), start=Fraction(1))))
        comps[cid] = cid
    space = HVSpace(tuple(cells), label=f"diag({component.space.label}^{L})")
    dens = {}
    for pid, x in preps:
        per = [component.density(pair[i - 1]) for i in x]
        mass = {}
        for lam, mu in component.space.cells:
            if mu == 0:
                continue
            m = prod((d.weight(lam) for d in per), start=Fraction(1)) * mu
            if m > 0:
                mass[lam] = m
        z = sum(mass.values(), Fraction(0))
        if z == 0:
            raise PreconditionError(
                f"preparation {pid!r}: component supports do not meet, no correlated composite exists"
            )
        dens[pid] = StateDensity({
            (lam,) * L: m / z / space.measure((lam,) * L) for lam, m in mass.items()
        })
    base = HVModel(space, _catalog(component, pair, preps), dens)
    return CompositeModel(base, L, pair, CompositionRule.COMPATIBLE, tuple(preps), comps, component.space)


@dataclass(frozen=True)
class NativeCell:
    """A composite-only hidden variable.

    ``weights`` is one density weight shared by all preparations, or a map
    from preparation id to weight (missing preparations get 0).
    """

    id: str
    measure: Fraction
    weights: Fraction | Mapping[str, Fraction] = Fraction(1)

    def weight(self, pid: str) -> Fraction:
        if isinstance(self.weights, Mapping):
            return as_fraction(self.weights.get(pid, 0))
        return as_fraction(self.weights)


def compose_compact_native(component: HVModel, pair: tuple[str, str], L: int,
                           native: Sequence[NativeCell] = (NativeCell("native", Fraction(1, 4)),)
                           ) -> CompositeModel:
    """Independent product cells scaled by (1 - ν), plus native cells of total measure ν.

    Each preparation keeps its declared native weights; its product part is
    the independent product density rescaled to carry the remaining mass.
    With ν = 1 the product cells are dropped altogether.
    """
    _check_pair(component, pair, L)
    native = list(native)
    nu = sum((as_fraction(n.measure) for n in native), Fraction(0))
    if not 0 <= nu <= 1:
        raise ValueError(f"native measures must total at most 1, got {float(nu)}")
    indep = compose_independent(component, pair, L)
    keep_products = nu < 1
    cells = [(c, m * (1 - nu)) for c, m in indep.base.space.cells] if keep_products else []
    comps = dict(indep.components) if keep_products else {}
    for n in native:
        if n.id in comps:
            raise ValueError(f"native cell id {n.id!r} collides with a product cell")
        cells.append((n.id, as_fraction(n.measure)))
        comps[n.id] = None
    space = HVSpace(tuple(cells), label=f"{indep.base.space.label}+native")
    dens = {}
    for pid, _ in indep.preparations:
        native_mass = sum((n.weight(pid) * as_fraction(n.measure) for n in native), Fraction(0))
        weights = {n.id: n.weight(pid) for n in native if n.weight(pid) > 0}
        if keep_products:
            scale = (1 - native_mass) / (1 - nu)
            if scale < 0:
                raise ValueError(f"native weights exceed unit mass for {pid!r}")
            if scale > 0:
                weights.update({c: w * scale for c, w in indep.base.density(pid).weights.items()})
        dens[pid] = StateDensity(weights)
    base = HVModel(space, indep.base.states, dens)
    return CompositeModel(base, L, pair, CompositionRule.COMPACT_NATIVE, indep.preparations, comps, component.space)


COMPOSERS = {
    CompositionRule.INDEPENDENT_PRODUCT: compose_independent,
    CompositionRule.COMPATIBLE: compose_compatible,
    CompositionRule.COMPACT_NATIVE: compose_compact_native,
}


def compose(component: HVModel, pair, L: int, rule=CompositionRule.INDEPENDENT_PRODUCT, **kw) -> CompositeModel:
    return COMPOSERS[CompositionRule(rule)](component, tuple(pair), L, **kw)


def zero_cells(composite: CompositeModel, pid: str, cells) -> CompositeModel:
    """Remove ``cells`` from one preparation's support and renormalize its density."""
    base = composite.base
    cells = set(cells)
    d = base.density(pid)
    weights = {c: w for c, w in d.weights.items() if c not in cells}
    total = sum((w * base.space.measure(c) for c, w in weights.items()), Fraction(0))
    if total == 0:
        raise ValueError(f"zeroing these cells leaves preparation {pid!r} with no mass")
    return composite.with_base(base.with_density(pid, {c: w / total for c, w in weights.items()}))


def common_support_measure(composite: CompositeModel) -> Fraction:
    """Base measure of the cells lying in every preparation's support."""
    sup = composite.supports()
    common = set.intersection(*sup.values())
    return sum((composite.base.space.measure(c) for c in common), Fraction(0))


# -- composition conditions -------------------------------------------------


def _check_provenance(composite: CompositeModel, component: HVModel, pair):
    if tuple(pair) != composite.pair:
        raise ValueError(f"composite was built for pair {composite.pair!r}, not {tuple(pair)!r}")
    if component.space.cells != composite.component_space.cells:
        raise ValueError("composite was not built over this component space")


def _component_overlap(component: HVModel, pair) -> tuple:
    return overlap_report(component, *pair).cells


@dataclass(frozen=True)
class CompatibilityResult:
    holds: bool
    counterexample: object = None
    preparation: str | None = None

    def __bool__(self):
        return self.holds


def check_compatibility(composite: CompositeModel, component: HVModel, pair) -> CompatibilityResult:
    """Each shared component variable λ must appear, as (λ, ..., λ), in every preparation's support."""
    _check_provenance(composite, component, pair)
    sup = composite.supports()
    by_comp: dict[tuple, list] = {}
    for c in composite.base.space.ids:
        comp = composite.components[c]
        if comp is not None:
            by_comp.setdefault(comp, []).append(c)
    for lam in _component_overlap(component, pair):
        diag = (lam,) * composite.L
        cells = by_comp.get(diag, [])
        for pid in composite.prep_ids:
            if not any(c in sup[pid] for c in cells):
                return CompatibilityResult(False, diag, pid)
    return CompatibilityResult(True)


class Compactness(str, enum.Enum):
    WITNESS = "witness"
    VACUOUS = "none-vacuous"
    VIOLATED = "none-violated"


@dataclass(frozen=True)
class CompactnessResult:
    status: Compactness
    witness: object = None

    def __bool__(self):
        return self.status is not Compactness.VIOLATED


def check_compactness(composite: CompositeModel, component: HVModel, pair) -> CompactnessResult:
    """Find the first composite cell lying in every preparation's support.

    Search order is product cells in lexicographic component order, then
    native cells in declaration order.
    """
    _check_provenance(composite, component, pair)
    if not _component_overlap(component, pair):
        return CompactnessResult(Compactness.VACUOUS)
    w = find_common_cell(composite)
    if w is None:
        return CompactnessResult(Compactness.VIOLATED)
    return CompactnessResult(Compactness.WITNESS, w)


def find_common_cell(composite: CompositeModel):
    sup = composite.supports()
    ids = composite.base.space.ids
    order = [c for c in ids if composite.components[c] is not None] + composite.native_cells()
    for c in order:
        if all(c in s for s in sup.values()):
            return c
    return None


# -- response tables on composites -----------------------------------------


def determined_preparation(composite: CompositeModel, cell, supports=None) -> str | None:
    """The single preparation whose support contains ``cell``, if exactly one does."""
    sup = supports or composite.supports()
    hits = [pid for pid in composite.prep_ids if cell in sup[pid]]
    return hits[0] if len(hits) == 1 else None


def _check_meas(composite: CompositeModel, meas: ProjectiveMeasurement):
    dim = composite.base.state(composite.prep_ids[0]).dim
    if meas.dim != dim:
        raise ValueError(f"measurement dimension {meas.dim} differs from composite dimension {dim}")


def attach_state_dependent_born(composite: CompositeModel, meas: ProjectiveMeasurement) -> CompositeModel:
    """Per-preparation tables whose every row is that preparation's Born vector."""
    _check_meas(composite, meas)
    base = composite.base
    tables = []
    for pid in composite.prep_ids:
        row = born_rows(base.state(pid), meas)
        tables.append(ResponseTable(meas.name, meas.outcomes, {c: row for c in base.support(pid)}, pid))
    base = replace(base, observables={**base.observables, meas.name: meas}).with_tables(tables)
    return composite.with_base(base)


def _refine(composite: CompositeModel, splits: Mapping) -> CompositeModel:
    """Split cells in place: ``splits[cell]`` is a list of (label, fraction of measure)."""
    base = composite.base
    cells, comps = [], {}
    for c, m in base.space.cells:
        if c in splits:
            for label, frac in splits[c]:
                cells.append(((c, label), m * frac))
                comps[(c, label)] = composite.components[c]
        else:
            cells.append((c, m))
            comps[c] = composite.components[c]

    def spread(mapping):
        out = {}
        for c, v in mapping.items():
            if c in splits:
                out.update({(c, label): v for label, _ in splits[c]})
            else:
                out[c] = v
        return out

    dens = {pid: StateDensity(spread(d.weights)) for pid, d in base.densities.items()}
    tables = {k: replace(t, rows=spread(t.rows)) for k, t in base.responses.items()}
    space = HVSpace(tuple(cells), label=base.space.label)
    new = HVModel(space, base.states, dens, tables, base.observables)
    return composite.with_base(new, comps)


def _attach_determined_table(composite: CompositeModel, meas: ProjectiveMeasurement, *,
                             augmented: bool, deterministic: bool) -> CompositeModel:
    _check_meas(composite, meas)
    sup = composite.supports()
    determined = {}
    for c in composite.base.space.ids:
        pid = determined_preparation(composite, c, sup)
        if pid is not None:
            determined[c] = born_rows(composite.base.state(pid), meas)
    n = len(meas.outcomes)
    if deterministic:
        splits = {}
        for c, row in determined.items():
            total = sum(row, Fraction(0))
            splits[c] = [(meas.outcomes[k], p / total) for k, p in enumerate(row) if p > 0]
        composite = _refine(composite, splits)
        refined = {(c, label) for c, parts in splits.items() for label, _ in parts}
        rows = {}
        for c in composite.base.space.ids:
            rows[c] = None
            if c in refined:
                one_hot = [Fraction(0)] * n
                one_hot[meas.index(c[1])] = Fraction(1)
                rows[c] = tuple(one_hot)
    else:
        rows = {c: determined.get(c) for c in composite.base.space.ids}
    no_show = (Fraction(0),) * n + ((Fraction(1),) if augmented else ())
    rows = {c: (r + (Fraction(0),) * augmented if r is not None else no_show) for c, r in rows.items()}
    table = ResponseTable(meas.name, meas.outcomes, rows, ANY, augmented=augmented, partial=not augmented)
    base = composite.base
    base = replace(base, observables={**base.observables, meas.name: meas}).with_table(table)
    return composite.with_base(base)


def force_state_independent_table(composite: CompositeModel, meas: ProjectiveMeasurement,
                                  deterministic: bool = False) -> CompositeModel:
    """Attach the ANY-tagged, non-augmented table that Born zeros force.

    Wherever a cell lies in the support of several preparations, every
    preparation that sees it forbids its own antidistinguished outcome and
    no single row serves them all, so the row carries no outcome weight.
    Cells seen by exactly one preparation get that preparation's Born vector
    (split into one-hot sub-cells when ``deterministic``). Rows that sum to
    zero violate outcome totality; the table is marked ``partial`` so that it
    can be built and audited.
    """
    return _attach_determined_table(composite, meas, augmented=False, deterministic=deterministic)


def attach_prism_table(composite: CompositeModel, meas: ProjectiveMeasurement,
                       deterministic: bool = False) -> CompositeModel:
    """ANY-tagged augmented table: Born vector where the preparation is determined, θ elsewhere."""
    out = _attach_determined_table(composite, meas, augmented=True, deterministic=deterministic)
    for pid in out.prep_ids:
        if float(out.base.detection(pid, meas.name)) <= 1e-12:
            raise TotalNoShowError(
                f"preparation {pid!r} never yields an outcome: its support lies entirely in overlaps"
            )
    return out


def build_prism_composite(component: HVModel, pair, L: int, meas: ProjectiveMeasurement,
                          deterministic: bool = False) -> CompositeModel:
    """Independent composite carrying a prism table for ``meas``."""
    comp_dim = component.state(pair[0]).dim
    if meas.dim != comp_dim ** L:
        raise ValueError(f"measurement dimension {meas.dim} != {comp_dim}^{L}")
    return attach_prism_table(compose_independent(component, tuple(pair), L), meas, deterministic)


# -- seeded random fixtures ---------------------------------------------------


@dataclass
class RandomFixture:
    composite: CompositeModel
    component: HVModel
    pair: tuple[str, str]
    notes: list = field(default_factory=list)


def _random_density(rng, cells):
    w = {c: Fraction(int(rng.integers(1, 5))) for c in cells}
    return w


def random_fixture(rng: np.random.Generator) -> RandomFixture:
    """A small component with overlapping (or not) supports, composed by a random rule
    and then perturbed by removing random cells from random preparations."""
    n = int(rng.integers(2, 6))
    raw = [int(rng.integers(1, 6)) for _ in range(n)]
    total = sum(raw)
    ids = [f"k{j}" for j in range(n)]
    space = HVSpace(tuple((c, Fraction(r, total)) for c, r in zip(ids, raw)))
    while True:
        s1 = [c for c in ids if rng.random() < 0.6]
        s2 = [c for c in ids if rng.random() < 0.6]
        if s1 and s2 and set(s1) != set(s2):
            break
    dens = {}
    for sid, sup in (("0", s1), ("+", s2)):
        w = _random_density(rng, sup)
        z = sum(w[c] * space.measure(c) for c in sup)
        dens[sid] = StateDensity({c: v / z for c, v in w.items()})
    component = HVModel(space, {"0": KET_0, "+": KET_PLUS}, dens)
    pair = ("0", "+")
    L = int(rng.integers(1, 4))
    rule = str(rng.choice([r.value for r in CompositionRule]))
    notes = [f"n={n}", f"L={L}", f"rule={rule}"]
    try:
        if rule == CompositionRule.COMPACT_NATIVE.value:
            preps = [pid for pid, _ in enumerate_preparations(pair, L)]
            natives = []
            for j in range(int(rng.integers(1, 3))):
                ws = {pid: 1 for pid in preps if rng.random() < 0.7}
                natives.append(NativeCell(f"native{j}", Fraction(1, 8), ws))
            composite = compose_compact_native(component, pair, L, natives)
        else:
            composite = compose(component, pair, L, rule)
    except PreconditionError:
        composite = compose_independent(component, pair, L)
        notes.append("fallback=independent")
    for _ in range(int(rng.integers(0, 3))):
        pid = composite.prep_ids[int(rng.integers(len(composite.prep_ids)))]
        sup = composite.base.support(pid)
        drop = [c for c in sup if rng.random() < 0.3]
        if drop and len(drop) < len(sup):
            composite = zero_cells(composite, pid, drop)
            notes.append(f"zeroed {len(drop)} in {pid}")
    return RandomFixture(composite, component, pair, notes)


def strictness_survey(seed: int, count: int = 100) -> dict:
    """Check compatibility ⇒ compactness on ``count`` seeded random fixtures."""
    rng = np.random.default_rng(seed)
    stats = {"fixtures": 0, "compatible": 0, "compact": 0, "compact_not_compatible": 0, "violations": []}
    for k in range(count):
        fx = random_fixture(rng)
        compat = check_compatibility(fx.composite, fx.component, fx.pair)
        compact = check_compactness(fx.composite, fx.component, fx.pair)
        stats["fixtures"] += 1
        stats["compatible"] += bool(compat)
        stats["compact"] += bool(compact)
        if compact and not compat:
            stats["compact_not_compatible"] += 1
        if compat and not compact:
            stats["violations"].append((k, fx.notes))
    return stats
