import json

import pytest

from noisymoo.cli import main


@pytest.fixture
def config_path(tmp_path):
    config = {
        "schema_version": 1,
        "problems": ["uf1"],
        "noise": [{"kind": "none"}, {"kind": "gaussian", "sigma": 0.5},
                  {"kind": "chisq", "df": 1, "sigma": 0.5}],
        "strategies": [{"kind": "static", "grid": {"n": [1, 2]}},
                       {"kind": "rank", "grid": {"n_max": [2]}},
                       {"kind": "arb", "grid": {"alpha_l": [0.2], "alpha_u": [0.9],
                                                "init_popsize": [8], "seed_size": [6],
                                                "capacity": [20]}},
                       {"kind": "rtea", "grid": {"k": [1], "z": [0.1], "p": [6]}}],
        "budget": 300,
        "popsize": 6,
        "replications": 2,
        "base_seed": 11,
        "selection": {"n_select": 1, "n_compare": 1, "n_repeats": 5,
                      "prestudy_budget": 250},
        "output_dir": str(tmp_path / "default_out"),
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def test_run_one_slice(config_path, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_path), "--slice", "0",
                 "--out", str(out)]) == 0
    records = list((out / "records").iterdir())
    assert len(records) == 1
    payload = json.loads(records[0].read_text())
    assert payload["spent"] == 300


def test_run_rejects_bad_slice_index(config_path, tmp_path):
    assert main(["run", "--config", str(config_path), "--slice", "999",
                 "--out", str(tmp_path / "o")]) == 2


def test_sweep_select_report_pipeline(config_path, tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config_path), "--jobs", "2",
                 "--out", str(out)]) == 0
    n_slices = 3 * 5  # noise kinds x strategy configs
    assert len(list((out / "records").iterdir())) == n_slices * 2

    assert main(["select", "--config", str(config_path), "--protocol", "split",
                 "--out", str(out)]) == 0
    split = json.loads((out / "selection_split.json").read_text())
    assert split["protocol"] == "split"
    for per_family in split["fractions"].values():
        assert sum(per_family.values()) == pytest.approx(1.0, abs=1e-9)

    assert main(["select", "--config", str(config_path), "--protocol", "prestudy",
                 "--out", str(out)]) == 0
    table = json.loads((out / "selection_prestudy.json").read_text())
    assert table["families"] == ["arb", "dynamic", "static", "rtea"]
    assert table["noise_kinds"] == ["chisq", "gaussian", "none"]

    assert main(["report", "--config", str(config_path), "--out", str(out),
                 "--format", "csv"]) == 0
    per_run = (out / "report" / "per_run.csv").read_text().splitlines()
    assert len(per_run) == 1 + n_slices * 2


def test_output_dir_from_environment(config_path, tmp_path, monkeypatch):
    env_out = tmp_path / "env_out"
    monkeypatch.setenv("NOISYMOO_OUT", str(env_out))
    assert main(["run", "--config", str(config_path), "--slice", "0"]) == 0
    assert (env_out / "records").exists()
