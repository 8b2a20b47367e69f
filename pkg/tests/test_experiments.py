import json
import math
import subprocess
import sys

import numpy as np
import pytest

from scqec.cli import main
from scqec.experiments import (PRESETS, ConfigError, CurveResult, initial_state, list_experiments,
                               resolve, run, validate)
from scqec.operators import CodeParams

# small versions of every preset: header and row count are the golden schema
SMALL = {
    "fig3": ({"r_grid": [1.0, 1.4], "m_list": [0, 5]}, {"fig3": (["r", "alpha", "nbar", "m", "fidelity"], 4)}),
    "figS1": ({"r_grid": [0.6], "m_list": [0, 10]}, {"figS1": (["r", "alpha", "nbar", "m", "fidelity"], 2)}),
    "fig4": ({"alpha_grid": [1.0, 3.0], "r_grid": [1.3]},
             {"fig4": (["alpha", "r", "alpha_prime", "population", "prediction"], 2)}),
    "fig6": ({"alpha_prime_grid": [3.0, 4.0, 5.0, 6.0, 8.0]},
             {"fig6": (["protocol", "alpha", "r", "alpha_prime", "p_1_given_0", "p_0_given_1", "p_err"], 35)}),
    "limitation": ({"m": 1}, {"limitation": (["input", "cycle", "fidelity_to_plus"], 4),
                              "limitation_profile": (["input", "gauge_level", "population_input",
                                                      "population_final"], 126)}),
    "zrot": ({"n_steps": 6, "total_angle": math.pi}, {
        "zrot": (["step", "accumulated_angle", "expect_XL", "gauge_pop_1", "fidelity_to_target"], 7),
        "zrot_noqec": (["step", "accumulated_angle", "expect_XL", "gauge_pop_1", "fidelity_to_target"], 7)}),
    "zzrot": ({"alpha": 1.0, "r": 0.5, "n_steps": 2, "total_angle": 0.5},
              {"zzrot": (["step", "accumulated_angle", "expect_XL", "gauge_pop_1", "fidelity_to_target"], 3)}),
    "wigner": ({"points": 21}, {"wigner": (["x", "p", "wigner"], 441)}),
    "custom": ({}, {"custom": (["stage", "operation", "fidelity_to_plus", "expect_XL",
                                "code_space_population", "trace"], 3)}),
}


def test_every_preset_has_a_schema():
    assert set(SMALL) == set(list_experiments()) == set(PRESETS)


@pytest.mark.parametrize("name", list(SMALL))
def test_golden_schema(name, tmp_path):
    overrides, expected = SMALL[name]
    results = run({"experiment": name, **overrides})
    assert {r.name for r in results} == set(expected)
    for res in results:
        columns, n_rows = expected[res.name]
        assert res.columns == columns and len(res.rows) == n_rows
        assert res.metadata["experiment"] == name and res.metadata["version"].startswith("scqec")
        back = CurveResult.read(res.write(tmp_path))
        assert back.columns == res.columns
        for a, b in zip(back.rows, res.rows):
            assert tuple(a) == tuple(float(v) if isinstance(v, float) else v for v in b)
        meta = json.loads((tmp_path / f"{res.name}.json").read_text())
        assert meta["n_rows"] == n_rows and meta["config"]["experiment"] == name


def test_runs_are_deterministic(tmp_path):
    cfg = {"experiment": "fig3", "r_grid": [1.2], "m_list": [0, 5]}
    a = run(cfg)[0].write(tmp_path / "a").read_text()
    b = run(cfg, workers=2)[0].write(tmp_path / "b").read_text()
    assert a == b


def test_resolve_fills_defaults_and_rejects_unknown_keys():
    cfg = resolve({"experiment": "fig4"})
    assert len(cfg["alpha_grid"]) * len(cfg["r_grid"]) == 30
    with pytest.raises(ConfigError):
        resolve({"experiment": "fig4", "colour": "blue"})
    with pytest.raises(ConfigError):
        resolve({"experiment": "nope"})


def test_validate_examples():
    errs = validate({"experiment": "fig3", "nbar": 5, "r_grid": [2.0]})
    assert errs and "13.15" in errs[0]["message"]
    assert validate({"experiment": "fig3", "nbar": 5, "alpha": 1.0})
    errs = validate({"experiment": "zzrot"}, env={"SCQEC_MAX_DIM": "1000"})
    assert errs and "1000" in json.dumps(errs)
    assert validate({"experiment": "zrot"}) == []
    assert validate({"experiment": "zrot", "n_steps": 0})
    assert validate({"experiment": "fig6", "protocols": ["psychic"]})


def test_initial_states():
    code = CodeParams(2.0, 1.0)
    for label in ("sc+", "sc-", "zero", "one", "vacuum", "cat"):
        rho = initial_state(code, label, 90)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        initial_state(code, "ghost", 90)


# --- command line -----------------------------------------------------------------------


def write_config(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_cli_run_and_list(tmp_path, capsys):
    cfg = write_config(tmp_path, {"experiment": "custom"})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "out"), "--workers", "1"]) == 0
    assert (tmp_path / "out" / "custom.csv").exists()
    assert main(["list-experiments"]) == 0
    assert "fig4" in capsys.readouterr().out.split()


def test_cli_validate_reports_json(tmp_path, capsys):
    cfg = write_config(tmp_path, {"experiment": "fig3", "nbar": 5, "r_grid": [2.0]})
    assert main(["validate", "--config", cfg]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] is False and report["errors"][0]["field"]
    cfg = write_config(tmp_path, {"experiment": "zrot"})
    assert main(["validate", "--config", cfg]) == 0


def test_cli_exit_codes(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    assert main(["run", "--config", str(bad_json), "--out", str(tmp_path)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    cfg = write_config(tmp_path, {"experiment": "custom", "truncation": 20})
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_cli_entry_point_honours_dimension_cap(tmp_path):
    cfg = write_config(tmp_path, {"experiment": "zzrot"})
    proc = subprocess.run([sys.executable, "-m", "scqec.cli", "validate", "--config", cfg],
                          capture_output=True, text=True, env={"SCQEC_MAX_DIM": "1000", "PATH": ""})
    assert proc.returncode == 2 and "1000" in proc.stdout
