"""Concrete qubit models: the shared-interval toy, its segregated variants,
the uniform state-dependent model, and small overlap fixtures."""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Mapping, Sequence

from .hvframe import HVModel, HVSpace, ResponseTable, StateDensity, as_fraction
from .qcore import (
    KET_0,
    KET_PLUS,
    ProjectiveMeasurement,
    PureState,
    born_probability,
    born_vector,
)


class Geometry(str, enum.Enum):
    SHARED_UNIT_INTERVAL = "shared-unit-interval"
    DISJOINT_INTERVALS = "disjoint-intervals"
    UNIT_CIRCLE_RAYS = "unit-circle-rays"


def state_catalog(states: Sequence[PureState] | Mapping[str, PureState]) -> dict[str, PureState]:
    """Id each state by its label, falling back to ``psi<k>``.

    Raises if two entries describe the same ray.
    """
    if isinstance(states, Mapping):
        catalog = dict(states)
    else:
        labels = [s.label for s in states]
        usable = all(labels) and len(set(labels)) == len(labels)
        catalog = {(s.label if usable else f"psi{k}"): s for k, s in enumerate(states)}
    items = list(catalog.items())
    for i, (a, sa) in enumerate(items):
        for b, sb in items[i + 1:]:
            if sa.same_ray(sb):
                raise ValueError(f"states {a!r} and {b!r} are not distinct")
    return catalog


def _check_toy_inputs(catalog, observables):
    for sid, s in catalog.items():
        if s.dim != 2:
            raise ValueError(f"state {sid!r} is not a qubit")
    for obs in observables:
        if obs.dim != 2 or len(obs.outcomes) != 2 or set(obs.outcomes) != {1, -1}:
            raise ValueError(f"observable {obs.name!r} is not a bivalent (+1/-1) qubit observable")


def _thresholds(psi: PureState, observables) -> dict[str, Fraction]:
    return {A.name: as_fraction(born_probability(psi, A, {1})) for A in observables}


def _cut(points) -> list[tuple[Fraction, Fraction]]:
    """Half-open cells (a, b] between consecutive distinct cut points of (0, 1]."""
    pts = sorted({Fraction(0), Fraction(1), *points})
    return [(a, b) for a, b in zip(pts, pts[1:]) if b > a]


def _threshold_row(upper: Fraction, threshold: Fraction, outcomes) -> tuple[int, int]:
    plus = 1 if upper <= threshold else 0
    return (plus, 1 - plus) if outcomes[0] == 1 else (1 - plus, plus)


def build_mixed_toy(states, observables: Sequence[ProjectiveMeasurement]) -> HVModel:
    """Every state shares (0, 1] with uniform density; A = +1 iff λ ≤ P_A^ψ(+1).

    The interval is cut at every threshold that occurs, so each response
    function is constant on each cell.
    """
    catalog = state_catalog(states)
    observables = list(observables)
    _check_toy_inputs(catalog, observables)
    thresholds = {sid: _thresholds(psi, observables) for sid, psi in catalog.items()}
    cells = _cut(t for per in thresholds.values() for t in per.values())
    ids = [f"c{k}" for k in range(len(cells))]
    space = HVSpace(tuple(zip(ids, (b - a for a, b in cells))), label="(0,1]")
    densities = {sid: StateDensity({c: 1 for c in ids}) for sid in catalog}
    tables = {}
    for A in observables:
        for sid in catalog:
            t = thresholds[sid][A.name]
            rows = {c: _threshold_row(b, t, A.outcomes) for c, (_, b) in zip(ids, cells)}
            tables[(A.name, sid)] = ResponseTable(A.name, A.outcomes, rows, state_tag=sid)
    return HVModel(space, catalog, densities, tables, {A.name: A for A in observables})


def build_segregated_toy(states, observables: Sequence[ProjectiveMeasurement],
                         geometry: Geometry = Geometry.DISJOINT_INTERVALS) -> HVModel:
    """Give each state its own copy of (0, 1] and repeat the threshold construction there.

    With n states each copy is a block of total measure 1/n and density
    weight n, keeping the whole space at unit measure. Interval cells are
    ``("I", k, j)`` for the j-th cell of the k-th interval (k, k+1]; ray cells
    are ``("ray", state_id, j)``.
    """
    geometry = Geometry(geometry)
    if geometry is Geometry.SHARED_UNIT_INTERVAL:
        raise ValueError("a segregated model needs DISJOINT_INTERVALS or UNIT_CIRCLE_RAYS")
    catalog = state_catalog(states)
    observables = list(observables)
    _check_toy_inputs(catalog, observables)
    n = len(catalog)
    cells, densities, tables = [], {}, {}
    for k, (sid, psi) in enumerate(catalog.items()):
        th = _thresholds(psi, observables)
        block = _cut(th.values())
        tag = ("I", k) if geometry is Geometry.DISJOINT_INTERVALS else ("ray", sid)
        ids = [tag + (j,) for j in range(len(block))]
        cells += [(c, (b - a) / n) for c, (a, b) in zip(ids, block)]
        densities[sid] = StateDensity({c: n for c in ids})
        for A in observables:
            rows = {c: _threshold_row(b, th[A.name], A.outcomes) for c, (_, b) in zip(ids, block)}
            tables[(A.name, sid)] = ResponseTable(A.name, A.outcomes, rows, state_tag=sid)
    space = HVSpace(tuple(cells), label=geometry.value)
    return HVModel(space, catalog, densities, tables, {A.name: A for A in observables})


def born_rows(psi: PureState, meas: ProjectiveMeasurement) -> tuple[Fraction, ...]:
    return tuple(as_fraction(float(p)) for p in born_vector(psi, meas))


def build_uniform_state_dependent(meas: ProjectiveMeasurement, states) -> HVModel:
    """One shared cell, uniform density, and per-state rows equal to the Born vector."""
    catalog = state_catalog(states)
    for sid, psi in catalog.items():
        if psi.dim != meas.dim:
            raise ValueError(f"state {sid!r} has dimension {psi.dim}, measurement {meas.dim}")
    space = HVSpace((("u", 1),), label="(0,1]")
    densities = {sid: StateDensity({"u": 1}) for sid in catalog}
    tables = {
        (meas.name, sid): ResponseTable(meas.name, meas.outcomes, {"u": born_rows(psi, meas)}, state_tag=sid)
        for sid, psi in catalog.items()
    }
    return HVModel(space, catalog, densities, tables, {meas.name: meas})


def build_overlap_fixture(q, psi1: PureState = KET_0, psi2: PureState = KET_PLUS) -> HVModel:
    """Two-state model whose supports share a cell of measure ``q``.

    Cells: ``only:<id1>`` and ``only:<id2>`` of measure (1-q)/2 with weight 2,
    ``shared`` of measure q with weight 1 in both densities, so the shared
    cell carries probability q under either state as well.
    """
    q = as_fraction(q)
    if not 0 <= q <= 1:
        raise ValueError(f"overlap must lie in [0, 1], got {float(q)}")
    catalog = state_catalog([psi1, psi2])
    a, b = catalog
    side = (1 - q) / 2
    cells = [(f"only:{a}", side), ("shared", q), (f"only:{b}", side)]
    cells = [(c, m) for c, m in cells if m > 0]
    present = {c for c, _ in cells}
    d1 = {c: w for c, w in ((f"only:{a}", 2), ("shared", 1)) if c in present}
    d2 = {c: w for c, w in (("shared", 1), (f"only:{b}", 2)) if c in present}
    space = HVSpace(tuple(cells), label=f"overlap q={float(q):g}")
    return HVModel(space, catalog, {a: StateDensity(d1), b: StateDensity(d2)})


def build_interval_fixture(supports: Mapping[str, tuple], states: Mapping[str, PureState]) -> HVModel:
    """Uniform densities on given sub-intervals (a, b] of (0, 1]."""
    spans = {sid: (as_fraction(a), as_fraction(b)) for sid, (a, b) in supports.items()}
    cells = _cut(x for span in spans.values() for x in span)
    ids = [f"c{k}" for k in range(len(cells))]
    densities = {}
    for sid, (a, b) in spans.items():
        if not 0 <= a < b <= 1:
            raise ValueError(f"bad interval for {sid!r}")
        w = 1 / (b - a)
        densities[sid] = StateDensity({c: w for c, (lo, hi) in zip(ids, cells) if a <= lo and hi <= b})
    space = HVSpace(tuple(zip(ids, (hi - lo for lo, hi in cells))), label="(0,1]")
    return HVModel(space, {sid: states[sid] for sid in spans}, densities)
