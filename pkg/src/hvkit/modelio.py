"""JSON model, measurement, scenario and suite files.

Model file layout::

    {
      "format": "hvkit-model", "version": 1,
      "space": {"label": "...", "cells": [[cell, measure], ...]},
      "states": {"id": [amplitude, ...]},
      "observables": {"id": {"outcomes": [...], "basis": [[amplitude, ...], ...]}},
      "densities": {"id": [[cell, weight], ...]},
      "responses": [{"observable": "id", "state_tag": "*" | "id", "augmented": false,
                     "partial": false, "outcomes": [...], "rows": [[cell, [p, ...]], ...]}],
      "composite": {...}            # optional, see composite_to_dict
    }

Cell ids are strings, integers, or (nested) lists standing for tuples.
Amplitudes are numbers or ``[re, im]`` pairs. Measures, weights and
probabilities are numbers, or ``"p/q"`` strings when a float would round.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .composer import CompositeModel
from .errors import HVError, InvariantError
from .hvframe import HVModel, HVSpace, ResponseTable, StateDensity, as_fraction, freeze_id
from .qcore import NAMED_STATES, ProjectiveMeasurement, PureState

FORMAT = "hvkit-model"
VERSION = 1


class ModelFormatError(HVError, ValueError):
    """The file is not valid JSON or lacks a required key."""


def num_out(x):
    f = as_fraction(x)
    if f.denominator == 1:
        return int(f)
    if Fraction(float(f)) == f:
        return float(f)
    return f"{f.numerator}/{f.denominator}"


def id_out(cell):
    if isinstance(cell, tuple):
        return [id_out(c) for c in cell]
    return cell


def amps_out(psi: PureState) -> list:
    out = []
    for a in psi.amplitudes:
        out.append(float(a.real) if a.imag == 0 else [float(a.real), float(a.imag)])
    return out


def amps_in(raw, label=None) -> PureState:
    if isinstance(raw, str):
        if raw not in NAMED_STATES:
            raise ModelFormatError(f"unknown named state {raw!r}; known: {sorted(NAMED_STATES)}")
        return NAMED_STATES[raw]
    vals = [complex(a[0], a[1]) if isinstance(a, list) else complex(a) for a in raw]
    try:
        return PureState(np.array(vals), label)
    except ValueError as exc:
        raise InvariantError("state-normalization", str(exc), state=label) from None


def measurement_to_dict(meas: ProjectiveMeasurement) -> dict:
    return {
        "name": meas.name,
        "outcomes": [id_out(o) for o in meas.outcomes],
        "basis": [amps_out(b) for b in meas.basis],
    }


def measurement_from_dict(data: dict, name: str | None = None) -> ProjectiveMeasurement:
    if data.get("canonical") == "pbr-L2":
        from .pbrcheck import pbr_basis_L2

        return pbr_basis_L2()
    try:
        basis = tuple(amps_in(v) for v in data["basis"])
        outcomes = tuple(freeze_id(o) for o in data["outcomes"])
    except KeyError as exc:
        raise ModelFormatError(f"measurement lacks key {exc}") from None
    try:
        return ProjectiveMeasurement(basis, outcomes, name or data.get("name", "M"))
    except ValueError as exc:
        raise InvariantError("measurement", str(exc), observable=name or data.get("name")) from None


def space_to_dict(space: HVSpace) -> dict:
    return {"label": space.label, "cells": [[id_out(c), num_out(m)] for c, m in space.cells]}


def space_from_dict(data: dict) -> HVSpace:
    return HVSpace(tuple((freeze_id(c), as_fraction(m)) for c, m in data["cells"]), data.get("label", "Λ"))


def model_to_dict(model: HVModel) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "space": space_to_dict(model.space),
        "states": {sid: amps_out(psi) for sid, psi in model.states.items()},
        "observables": {
            name: {k: v for k, v in measurement_to_dict(m).items() if k != "name"}
            for name, m in model.observables.items()
        },
        "densities": {
            sid: [[id_out(c), num_out(w)] for c, w in d.weights.items()] for sid, d in model.densities.items()
        },
        "responses": [
            {
                "observable": t.observable,
                "state_tag": t.state_tag,
                "augmented": t.augmented,
                "partial": t.partial,
                "outcomes": [id_out(o) for o in t.outcomes],
                "rows": [[id_out(c), [num_out(v) for v in vals]] for c, vals in t.rows.items()],
            }
            for t in model.responses.values()
        ],
    }


def model_from_dict(data: dict) -> HVModel:
    if data.get("format", FORMAT) != FORMAT:
        raise ModelFormatError(f"not an {FORMAT} file")
    try:
        space = space_from_dict(data["space"])
        states = {sid: amps_in(v, sid) for sid, v in data["states"].items()}
        observables = {
            name: measurement_from_dict(m, name) for name, m in data.get("observables", {}).items()
        }
        densities = {}
        for sid, pairs in data["densities"].items():
            densities[sid] = StateDensity({freeze_id(c): as_fraction(w) for c, w in pairs})
        tables = {}
        for t in data.get("responses", []):
            rows = {freeze_id(c): tuple(as_fraction(v) for v in vals) for c, vals in t["rows"]}
            outcomes = t.get("outcomes")
            if outcomes is None:
                outcomes = observables[t["observable"]].outcomes
            table = ResponseTable(
                t["observable"], tuple(freeze_id(o) for o in outcomes), rows,
                t.get("state_tag", "*"), bool(t.get("augmented", False)), bool(t.get("partial", False)),
            )
            tables[(table.observable, table.state_tag)] = table
    except KeyError as exc:
        raise ModelFormatError(f"missing key {exc}") from None
    return HVModel(space, states, densities, tables, observables)


def composite_to_dict(composite: CompositeModel) -> dict:
    data = model_to_dict(composite.base)
    data["composite"] = {
        "L": composite.L,
        "pair": list(composite.pair),
        "rule": composite.rule.value,
        "preparations": [[pid, list(x)] for pid, x in composite.preparations],
        "components": [
            [id_out(c), None if comp is None else id_out(comp)] for c, comp in composite.components.items()
        ],
        "component_space": space_to_dict(composite.component_space),
    }
    return data


def composite_from_dict(data: dict) -> CompositeModel:
    base = model_from_dict(data)
    try:
        meta = data["composite"]
    except KeyError:
        raise ModelFormatError("file has no 'composite' section") from None
    comps = {freeze_id(c): (None if comp is None else freeze_id(comp)) for c, comp in meta["components"]}
    preps = tuple((pid, tuple(x)) for pid, x in meta["preparations"])
    return CompositeModel(
        base, int(meta["L"]), tuple(meta["pair"]), meta["rule"], preps, comps,
        space_from_dict(meta["component_space"]),
    )


def _read(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None


def _write(path, data: dict):
    Path(path).write_text(json.dumps(data, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def load_model(path) -> HVModel:
    """Read and validate a model file; the first violated invariant is raised."""
    return model_from_dict(_read(path))


def save_model(model: HVModel, path):
    _write(path, model_to_dict(model))


def load_composite(path) -> CompositeModel:
    return composite_from_dict(_read(path))


def save_composite(composite: CompositeModel, path):
    _write(path, composite_to_dict(composite))


def load_measurement(path) -> ProjectiveMeasurement:
    return measurement_from_dict(_read(path))


def load_scenario(path):
    from .pbrcheck import PbrScenario, pbr_basis_L2

    data = _read(path)
    try:
        psi1, psi2 = amps_in(data["psi1"], "psi1"), amps_in(data["psi2"], "psi2")
        L = int(data.get("L", 2))
    except KeyError as exc:
        raise ModelFormatError(f"scenario lacks key {exc}") from None
    if data.get("canonical-basis"):
        meas = pbr_basis_L2()
    elif "basis" in data:
        meas = measurement_from_dict(data["basis"])
    else:
        raise ModelFormatError("scenario needs 'canonical-basis': true or an explicit 'basis'")
    return PbrScenario(psi1, psi2, L, meas)
