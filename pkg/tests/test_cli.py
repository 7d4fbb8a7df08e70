import copy
import json

import numpy as np
import pytest

from maslov.cli import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_UNCERTIFIED,
    Scenario,
    main,
    parse_scenario,
    run_scenario,
)
from maslov.exceptions import ScenarioFormatError
from maslov.families import (
    list_builtins,
    sample_unitary_family,
    sampled_unitary_family,
    su2_tautological,
)
from maslov.sphere import random_unit
from maslov.unitary import mu_k_unitary

SU2_SCENARIO = {
    "model": {"id": "linear_contact_sphere", "params": {"n": 2}},
    "family": {"id": "su2_generator", "params": {"n": 2}},
    "request": {"kind": "index_A", "k": 2, "frame": {"policy": "ambient"}},
    "seed": 7,
}

EPSILON_SCENARIO = {
    "model": {"id": "s1xs2"},
    "family": {"id": "linear_contact_sphere_S"},
    "request": {"kind": "epsilon"},
    "seed": 3,
}


def test_run_index_scenario():
    report = run_scenario(copy.deepcopy(SU2_SCENARIO))
    assert report.error is None
    assert report.result == {"value": 1, "modulus": 0, "index_type": "A"}
    assert report.certified
    assert report.certificates["degree"]["certified"]


def test_run_epsilon_scenario():
    report = run_scenario(copy.deepcopy(EPSILON_SCENARIO))
    assert report.result["value"] == 1
    assert report.certified


def test_run_flux_scenario():
    report = run_scenario({
        "model": {"id": "torus", "params": {"dim": 2}},
        "family": {"id": "torus_translation",
                   "params": {"direction": 1, "turns": 1}},
        "request": {"kind": "flux", "cycle": {"axis": 1, "turns": 1}},
    })
    assert abs(report.result["value"] - 1.0) <= 1e-6
    assert report.certified


def test_run_index_b_scenario():
    report = run_scenario({
        "model": {"id": "cp1"},
        "family": {"id": "cp1_rotation", "params": {"turns": 1}},
        "request": {"kind": "index_B", "k": 1},
        "seed": 5,
    })
    assert report.result == {"value": 1, "modulus": 2, "index_type": "B"}


def test_run_degree_scenario():
    report = run_scenario({
        "family": {"id": "circle_power", "params": {"d": -2}},
        "request": {"kind": "degree"},
    })
    assert report.result["value"] == -2


def test_run_tables_scenario():
    report = run_scenario({"request": {"kind": "tables", "k": 2, "dim": 8}})
    assert report.result["group"] == "Z"


def test_unknown_family_is_an_error(capsys, tmp_path):
    scenario = copy.deepcopy(SU2_SCENARIO)
    scenario["family"]["id"] = "bogus"
    report = run_scenario(scenario)
    assert report.error is not None
    assert "unknown family" in report.error["message"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(scenario))
    assert main(["run", str(path)]) == EXIT_ERROR
    out = capsys.readouterr().out
    assert "unknown family" in out


def test_malformed_document_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"request": {"kind": "tables", }')
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(str(path))
    assert "line" in str(err.value) and "column" in str(err.value)
    assert main(["run", str(path)]) == EXIT_ERROR


def test_scenario_roundtrip_is_lossless():
    scenario = parse_scenario(json.dumps(SU2_SCENARIO))
    text = json.dumps(scenario.to_dict(), sort_keys=True)
    again = Scenario.from_dict(json.loads(text))
    assert again.to_dict() == scenario.to_dict()
    # defaults injected deterministically
    assert scenario.budget > 0
    assert scenario.seed == 7


def test_report_determinism_minus_wall_clock():
    a = run_scenario(copy.deepcopy(EPSILON_SCENARIO)).to_dict()
    b = run_scenario(copy.deepcopy(EPSILON_SCENARIO)).to_dict()
    a.pop("wall_clock_s")
    b.pop("wall_clock_s")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_result_identical_across_worker_counts():
    one = run_scenario(copy.deepcopy(SU2_SCENARIO), jobs=1).to_dict()
    four = run_scenario(copy.deepcopy(SU2_SCENARIO), jobs=4).to_dict()
    assert one["result"] == four["result"]


def test_cli_main_run_and_out_file(tmp_path, capsys):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(EPSILON_SCENARIO))
    out = tmp_path / "report.json"
    code = main(["run", str(path), "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["result"]["value"] == 1
    capsys.readouterr()


def test_cli_inline_json(capsys):
    code = main(["run", json.dumps({"request": {"kind": "tables", "k": 7, "dim": 16}})])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["result"]["group"] == "Z2"


def test_cli_uncertified_exit_code(capsys):
    scenario = copy.deepcopy(SU2_SCENARIO)
    scenario["budget"] = 200  # far below any full starting level
    code = main(["run", json.dumps(scenario)])
    capsys.readouterr()
    assert code == EXIT_UNCERTIFIED


def test_cli_list_and_tables(capsys):
    assert main(["list"]) == EXIT_OK
    names = {entry["name"] for entry in json.loads(capsys.readouterr().out)["builtins"]}
    for required in ("su2_generator", "delta_rotations", "linear_contact_sphere_S",
                     "torus_translation", "cp1_rotation"):
        assert required in names

    assert main(["tables", "--k", "2", "--dim", "8"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["group"] == "Z"


def test_catalog_descriptions_state_what_each_family_reproduces():
    for entry in list_builtins():
        assert entry["reproduces"]


def test_sampled_family_wire_format_roundtrip():
    taut = su2_tautological(2)
    payload = sample_unitary_family(taut, level=2)
    rebuilt = sampled_unitary_family(payload)
    X = random_unit(np.random.default_rng(0), 3, 200)
    direct = taut.batch(X)
    interp = rebuilt.batch(X)
    assert np.abs(direct - interp).max() < 0.2  # interpolation error only
    mu, _, dres = mu_k_unitary(rebuilt, 2, seed=1)
    assert mu == 1


def test_sampled_family_scenario():
    payload = sample_unitary_family(su2_tautological(2), level=2)
    report = run_scenario({
        "model": {"id": "linear_contact_sphere", "params": {"n": 2}},
        "family": {"id": "sampled_unitary", "params": payload},
        "request": {"kind": "index_A", "k": 2, "frame": {"policy": "ambient"}},
        "seed": 11,
    })
    assert report.error is None
    assert report.result["value"] == 1
