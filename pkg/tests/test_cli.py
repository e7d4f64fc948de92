import json

import pytest

from covertbeam.cli import main
from covertbeam.experiment import default_config


@pytest.fixture()
def small_config_path(tmp_path):
    cfg = default_config(method="perfect", trials=1, n_tx=(2,), n_irs=2,
                         p_total_dbm=(-10.0,), master_seed=11)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg.to_dict()))
    return str(path)


def test_validate_subcommand():
    assert main(["validate"]) == 0


def test_sweep_reproducible(tmp_path, small_config_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["sweep", "--config", small_config_path, "--out", str(out1)]) == 0
    assert main(["sweep", "--config", small_config_path, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a.csv.manifest.json").exists()


def test_sweep_seed_override_changes_output(tmp_path, small_config_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    main(["sweep", "--config", small_config_path, "--out", str(out1)])
    main(["sweep", "--config", small_config_path, "--out", str(out2), "--seed", "99"])
    assert out1.read_bytes() != out2.read_bytes()


def test_perfect_design_json(tmp_path, small_config_path):
    out = tmp_path / "sol.json"
    assert main(["perfect", "--config", small_config_path, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["method"] == "perfect"
    assert len(doc["w_b"]) == 2


def test_no_irs_design(tmp_path, small_config_path):
    out = tmp_path / "sol.json"
    assert main(["no-irs", "--config", small_config_path, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["method"] == "no_irs"


def test_robust_cdf_output(tmp_path):
    cfg = default_config(method="robust_kl01", trials=1, n_tx=(2,), n_irs=2,
                         p_total_dbm=(5.0,), master_seed=2, kl_samples=8)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg.to_dict()))
    out = tmp_path / "sol.json"
    cdf = tmp_path / "cdf.csv"
    assert main(["robust", "--config", str(path), "--out", str(out),
                 "--cdf-out", str(cdf)]) == 0
    lines = cdf.read_text().splitlines()
    assert lines[0] == "kl_value,cdf"
    assert len(lines) == 9


def test_detect_subcommand(tmp_path):
    cfg = default_config(method="robust_kl01", trials=1, n_tx=(2,), n_irs=2,
                         p_total_dbm=(5.0,), epsilon=(0.1,), master_seed=5)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg.to_dict()))
    out = tmp_path / "detect.csv"
    assert main(["detect", "--config", str(path), "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header.endswith("p_fa_le_p_md,xi_ge_1_minus_eps")


def test_sweep_failure_exit_code(tmp_path, small_config_path, monkeypatch, capsys):
    import covertbeam.experiment as experiment

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic")

    monkeypatch.setattr(experiment, "alternate_optimize", boom)
    out = tmp_path / "fail.csv"
    rc = main(["sweep", "--config", small_config_path, "--out", str(out)])
    assert rc == 1
    assert out.exists()
