import json

import pytest

from umsrd.cli import main


def test_describe_all(capsys):
    assert main(["describe"]) == 0
    out = capsys.readouterr().out
    for k in range(1, 10):
        assert f"experiment {k}:" in out


def test_describe_single(capsys):
    assert main(["describe", "--experiment", "4"]) == 0
    out = capsys.readouterr().out
    assert "6 (p, tau) combos" in out


def test_run_experiment6(tmp_path, capsys):
    rc = main(["run", "--experiment", "6", "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "1.6666666666666667" in out
    assert "umsrd_drift_history" in out
    assert (tmp_path / "exp6_metadata.json").exists()
    assert (tmp_path / "exp6_srd_drift_history.csv").exists()


def test_run_with_overrides(tmp_path):
    rc = main(["run", "--experiment", "1", "--scheme", "umsrd",
               "--N", "40", "--out-dir", str(tmp_path)])
    assert rc == 0
    meta = json.loads((tmp_path / "exp1_metadata.json").read_text())
    assert meta["spec"]["ns"] == [40]
    assert meta["spec"]["schemes"] == ["umsrd"]
    assert not (tmp_path / "exp1_srd_errors.csv").exists()


def test_run_json_format(tmp_path):
    rc = main(["run", "--experiment", "6", "--format", "json",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "exp6_srd_drift_history.json").read_text())
    assert data["columns"] == ["step", "l1_drift", "max_drift"]


def test_invalid_scheme_exits_nonzero(tmp_path, capsys):
    rc = main(["run", "--experiment", "1", "--scheme", "fancy",
               "--out-dir", str(tmp_path)])
    assert rc == 1
    assert "unknown scheme" in capsys.readouterr().err


def test_invalid_experiment_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--experiment", "12", "--out-dir", str(tmp_path)])
    assert exc.value.code == 2


def test_config_file_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo config\nexperiment=6\nscheme=srd\n")
    rc = main(["run", "--experiment", "6", "--scheme", "umsrd",
               "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert rc == 0
    meta = json.loads((tmp_path / "o" / "exp6_metadata.json").read_text())
    assert meta["spec"]["schemes"] == ["umsrd"]  # flag beat the file


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("wibble=3\n")
    rc = main(["run", "--experiment", "6", "--config", str(cfg),
               "--out-dir", str(tmp_path)])
    assert rc == 1
    assert "unknown key" in capsys.readouterr().err


def test_convergence_subcommand(tmp_path):
    rc = main(["convergence", "--experiment", "1", "--ns", "40", "80",
               "--scheme", "base", "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "exp1_base_errors.csv").read_text().splitlines()
    assert len(lines) == 3  # header + two grids


def test_convergence_rejects_other_experiments(tmp_path, capsys):
    rc = main(["convergence", "--experiment", "3", "--out-dir", str(tmp_path)])
    assert rc == 1


def test_sweep_subcommand(tmp_path):
    rc = main(["sweep", "--experiment", "4", "--p-values", "2",
               "--tau-values", "0.05", "0.1", "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "exp4_umsrd_param_sweep.csv").read_text().splitlines()
    assert len(lines) == 3


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--experiment", "6", "--out-dir", str(d)]) == 0
    for p in sorted(a.iterdir()):
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_render_missing_inputs_fails(tmp_path, capsys):
    rc = main(["render", "--experiment", "1", "--in", str(tmp_path),
               "--out", str(tmp_path / "figs")])
    assert rc == 1
    assert "missing input table" in capsys.readouterr().err
