import pytest

from umsrd import plots


def test_figure_spec_validation(tmp_path):
    spec = plots.figure_spec(1, tmp_path, tmp_path)
    assert spec.kind == "loglog_convergence"
    assert spec.out_path.name == "exp1_convergence.png"
    with pytest.raises(ValueError):
        plots.figure_spec(4, tmp_path, tmp_path)  # table-only experiment
    with pytest.raises(ValueError):
        plots.FigureSpec(1, tmp_path, "sparkline", tmp_path / "x.png")


def test_missing_input_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        plots.render_experiment(1, tmp_path, tmp_path / "figs")


def test_schema_mismatch_names_column(tmp_path):
    for scheme in ("base", "srd", "umsrd"):
        (tmp_path / f"exp1_{scheme}_errors.csv").write_text(
            "N,h,wrong\n40,0.025,1.0\n")
    with pytest.raises(ValueError, match="L1"):
        plots.render_experiment(1, tmp_path, tmp_path / "figs")


def test_render_e1_and_e6(store, tmp_path):
    for k in (1, 6):
        store.csv_dir(k)
    figs = tmp_path / "figs"
    p1 = plots.render_experiment(1, store.root, figs)[0]
    p6 = plots.render_experiment(6, store.root, figs)[0]
    assert p1.stat().st_size > 1000
    assert p6.stat().st_size > 1000


def test_render_is_idempotent_and_read_only(store, tmp_path):
    store.csv_dir(8)
    inputs = {p.name: p.read_bytes() for p in store.root.glob("exp8_*")}
    figs = tmp_path / "figs"
    p = plots.render_experiment(8, store.root, figs)[0]
    first = p.read_bytes()
    p2 = plots.render_experiment(8, store.root, figs)[0]
    assert p2.read_bytes() == first
    for name, blob in inputs.items():
        assert (store.root / name).read_bytes() == blob
