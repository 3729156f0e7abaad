import csv
import io
import json

import pytest

from hvkit import modelio
from hvkit.cli import main
from hvkit.errors import InvariantError
from hvkit.report import RunReport, emit_report
from hvkit.toymodels import Geometry, build_mixed_toy, build_overlap_fixture, build_segregated_toy
from hvkit.transforms import assert_equivalent
from hvkit.qcore import KET_0, KET_PLUS, KET_PLUS_I, PAULI_X, PAULI_Y, PAULI_Z

TOY = ([KET_0, KET_PLUS, KET_PLUS_I], [PAULI_X, PAULI_Y, PAULI_Z])


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.json"
    modelio.save_model(build_mixed_toy(*TOY), path)
    return path


def test_model_round_trip(toy_file):
    model = modelio.load_model(toy_file)
    original = build_mixed_toy(*TOY)
    assert model.space.cells == original.space.cells
    assert assert_equivalent(original, model).max_delta == 0


def test_segregated_round_trip_keeps_tuple_ids(tmp_path):
    seg = build_segregated_toy(*TOY, Geometry.UNIT_CIRCLE_RAYS)
    path = tmp_path / "seg.json"
    modelio.save_model(seg, path)
    back = modelio.load_model(path)
    assert back.space.ids == seg.space.ids
    assert all(isinstance(c, tuple) for c in back.space.ids)


def _edit(path, fn):
    data = json.loads(path.read_text())
    fn(data)
    path.write_text(json.dumps(data))


def test_bad_density_names_state(toy_file):
    def shrink(d):
        d["densities"]["+"] = [[c, 0.9] for c, _ in d["densities"]["+"]]

    _edit(toy_file, shrink)
    with pytest.raises(InvariantError, match="density-normalization") as exc:
        modelio.load_model(toy_file)
    assert exc.value.where["state"] == "+"


def test_bad_row_names_cell_and_observable(toy_file):
    def inflate(d):
        t = d["responses"][0]
        t["rows"][0][1] = [0.6, 0.5]

    _edit(toy_file, inflate)
    with pytest.raises(InvariantError, match="outcome-totality") as exc:
        modelio.load_model(toy_file)
    assert "cell" in exc.value.where and "observable" in exc.value.where


def test_non_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(modelio.ModelFormatError):
        modelio.load_model(p)


def test_composite_round_trip(tmp_path, scenario):
    from hvkit.demos import prism_fixture

    comp, _ = prism_fixture()
    p = tmp_path / "prism.json"
    modelio.save_composite(comp, p)
    back = modelio.load_composite(p)
    assert back.prep_ids == comp.prep_ids and back.components == comp.components


# -- report emitters -------------------------------------------------------------


def _report():
    r = RunReport("demo x")
    r.add("s", "a", True, 1e-16, value=0.5)
    r.add("s", "b", False, 0.25, message="bad")
    return r


def test_emit_human():
    text = emit_report(_report(), "human")
    assert text.splitlines()[0] == "$ demo x"
    assert "[PASS] a" in text and "[FAIL] b" in text
    assert text.rstrip().endswith("exit status: 1 (1/2 checks passed)")


def test_emit_structured():
    doc = json.loads(emit_report(_report(), "structured"))
    assert doc["schema_version"] == 1 and doc["verdict"] == "fail"
    assert [c["verdict"] for c in doc["checks"]] == ["pass", "fail"]


def test_emit_csv():
    rows = list(csv.reader(io.StringIO(emit_report(_report(), "csv"))))
    assert rows[0] == ["section", "name", "verdict", "residual", "message", "values"]
    assert rows[2][2] == "fail"


def test_emit_unknown_format():
    with pytest.raises(ValueError):
        emit_report(_report(), "xml")


# -- CLI -------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["toy", "segregate", "mix", "pbr", "additivity"])
def test_demos_pass(name, capsys):
    assert main(["demo", name]) == 0
    out = capsys.readouterr().out
    assert "exit status: 0" in out


def test_structured_output_is_byte_stable(capsys):
    main(["demo", "pbr", "--format", "structured"])
    first = capsys.readouterr().out
    main(["demo", "pbr", "--format", "structured"])
    assert capsys.readouterr().out == first
    assert '"verdict":"pass"' in first


def test_report_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["demo", "toy", "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text() == capsys.readouterr().out


def test_check_command(toy_file, capsys):
    assert main(["check", str(toy_file)]) == 0
    assert "born reproduction" in capsys.readouterr().out


def test_check_invalid_file_exits_2(toy_file, capsys):
    _edit(toy_file, lambda d: d["densities"].__setitem__("0", [[c, 0.9] for c, _ in d["densities"]["0"]]))
    assert main(["check", str(toy_file)]) == 2
    assert "density-normalization" in capsys.readouterr().err


def test_transform_and_equivalence(toy_file, tmp_path, capsys):
    seg = tmp_path / "seg.json"
    assert main(["transform", "segregate", "--in", str(toy_file), "--out", str(seg)]) == 0
    assert main(["audit", "equivalence", "--a", str(toy_file), "--b", str(seg)]) == 0
    mixed = tmp_path / "mixed.json"
    assert main(["transform", "mix", "--in", str(seg), "--out", str(mixed)]) == 0
    assert main(["audit", "equivalence", "--a", str(toy_file), "--b", str(mixed), "--format", "structured"]) == 0
    assert main(["transform", "mix", "--in", str(toy_file), "--out", str(mixed)]) == 2


def test_equivalence_failure_exits_1(toy_file, tmp_path):
    other = tmp_path / "other.json"
    modelio.save_model(build_mixed_toy([KET_0, KET_PLUS, KET_PLUS_I], [PAULI_X, PAULI_Y, PAULI_Z]), other)
    data = json.loads(other.read_text())
    t = next(t for t in data["responses"] if t["observable"] == "Z" and t["state_tag"] == "0")
    t["rows"] = [[c, list(reversed(v))] for c, v in t["rows"]]
    other.write_text(json.dumps(data))
    assert main(["audit", "equivalence", "--a", str(toy_file), "--b", str(other)]) == 1


def test_strictness_command(capsys):
    assert main(["audit", "strictness", "--seed", "1", "--count", "40"]) == 0


def test_compose_commands(tmp_path, capsys):
    comp_file = tmp_path / "overlap.json"
    modelio.save_model(build_overlap_fixture(0.25), comp_file)
    for rule in ("independent", "compatible", "compact-native"):
        out = tmp_path / f"{rule}.json"
        assert main(["compose", "--rule", rule, "--component", str(comp_file), "--pair", "0,+",
                     "--L", "2", "--out", str(out)]) == 0
        assert modelio.load_composite(out).rule.value == rule
    meas = tmp_path / "m.json"
    meas.write_text('{"canonical": "pbr-L2"}')
    prism = tmp_path / "prism.json"
    assert main(["compose", "prism", "--component", str(comp_file), "--pair", "0,+", "--L", "2",
                 "--measurement", str(meas), "--out", str(prism), "--deterministic"]) == 0
    capsys.readouterr()
    assert main(["pbr", "additivity", "--composite", str(prism), "--cell", '["shared", "shared"]']) == 1
    assert "sum of values 0, value of sum 1" in capsys.readouterr().out


def test_pbr_verify_with_scenario_file(tmp_path):
    sc = tmp_path / "sc.json"
    sc.write_text(json.dumps({"psi1": "0", "psi2": "+", "L": 2, "canonical-basis": True}))
    assert main(["pbr", "verify", "--scenario", str(sc)]) == 0
    assert main(["pbr", "verify"]) == 0
