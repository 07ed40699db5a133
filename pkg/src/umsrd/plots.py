"""Static figure rendering from experiment report CSVs.

Reads the CSV tables written by the CLI's run subcommand and renders one
PNG per experiment: convergence curves with a slope-1 reference line,
blending-parameter time histories with the 0 and 0.99 plateaus marked,
step/steady-state profiles, instability growth, a 2D solution field and
long-time error histories.  Rendering never touches the inputs and is
byte-idempotent for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_KINDS = ("loglog_convergence", "timeseries", "profile", "field2d")


@dataclass(frozen=True)
class FigureSpec:
    """One figure: experiment id, input directory, kind, output path."""

    experiment: int
    in_dir: Path
    kind: str
    out_path: Path

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _load(in_dir: Path, name: str, required: tuple[str, ...]) -> np.ndarray:
    path = Path(in_dir) / name
    if not path.exists():
        raise FileNotFoundError(f"missing input table {path}")
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in required:
        if col not in (data.dtype.names or ()):
            raise ValueError(f"{path}: missing column {col!r}")
    return np.atleast_1d(data)


def _save(fig, out_path: Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # strip the library version string so reruns are byte-identical
    fig.savefig(out_path, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return out_path


def _convergence_axes(ax, in_dir, eid, schemes=("base", "srd", "umsrd")):
    hs = None
    for scheme, marker in zip(schemes, "osx"):
        t = _load(in_dir, f"exp{eid}_{scheme}_errors.csv", ("h", "L1"))
        ax.loglog(t["h"], t["L1"], marker + "-", label=scheme, mfc="none")
        hs = t["h"]
    ref = t["L1"][0] * hs / hs[0]
    ax.loglog(hs, ref, "k--", lw=0.8, label="slope 1")
    ax.set_xlabel("h")
    ax.set_ylabel(r"$L^1$ error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)


def _fig_e1(in_dir, out_path):
    fig, ax = plt.subplots(figsize=(5, 4))
    _convergence_axes(ax, in_dir, 1)
    ax.set_title("smooth convergence, 1D cut cell")
    return _save(fig, out_path)


def _fig_e2(in_dir, out_path):
    fig, axes = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for ax, key, label in zip(axes, ("cfl0p5", "cfl0p01"),
                              ("CFL 0.5", "CFL 0.01")):
        t = _load(in_dir, f"exp2_umsrd_s_history_{key}.csv", ("t", "s"))
        ax.plot(t["t"], t["s"], lw=0.9)
        ax.axhline(0.0, color="k", lw=0.6, alpha=0.5)
        ax.axhline(0.99, color="r", ls=":", lw=0.8, label="s = 0.99")
        ax.set_ylabel("s")
        ax.set_title(label, fontsize=10)
        ax.legend(loc="center left")
    axes[-1].set_xlabel("t")
    return _save(fig, out_path)


def _fig_e3(in_dir, out_path):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    for scheme in ("srd", "umsrd"):
        t = _load(in_dir, f"exp3_{scheme}_profile.csv", ("x", "u"))
        ax0.plot(t["x"], t["u"], label=scheme)
        tv = _load(in_dir, f"exp3_{scheme}_tv_history.csv", ("t", "tv"))
        ax1.plot(tv["t"], tv["tv"], label=scheme)
    ax0.set_xlabel("x")
    ax0.set_ylabel("u")
    ax0.set_title("step profile at final time")
    ax0.legend()
    ax1.set_xlabel("t")
    ax1.set_ylabel("TV(u)")
    ax1.set_title("total variation history")
    ax1.legend()
    return _save(fig, out_path)


def _fig_e5(in_dir, out_path):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4))
    prof = _load(in_dir, "exp5_profiles_step5.csv", ("x",))
    for col in prof.dtype.names[1:]:
        style = "k-" if col == "base" else "-"
        ax0.plot(prof["x"], prof[col], style, lw=0.9, label=col)
    ax0.set_yscale("symlog", linthresh=1.0)
    ax0.set_xlabel("x")
    ax0.set_ylabel("u at step 5")
    ax0.legend(fontsize=8)
    hist = _load(in_dir, "exp5_maxabs_history.csv", ("step", "base"))
    for col in hist.dtype.names[2:]:
        ax1.semilogy(hist["step"], hist[col], lw=0.9, label=col)
    ax1.set_xlabel("step")
    ax1.set_ylabel("max |u|")
    ax1.legend(fontsize=8)
    ax1.set_title("growth under local CFL 10")
    return _save(fig, out_path)


def _fig_e6(in_dir, out_path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    for ax, scheme in zip(axes, ("srd", "umsrd")):
        t = _load(in_dir, f"exp6_{scheme}_profile_step1.csv",
                  ("x", "u0", "u1"))
        sel = slice(None)
        ax.plot(t["x"][sel], t["u0"][sel], "o-", mfc="none", label="step 0")
        ax.plot(t["x"][sel], t["u1"][sel], "s--", mfc="none", label="step 1")
        ax.set_xlim(0.40, 0.60)
        ax.set_xlabel("x")
        ax.set_title(scheme)
        ax.legend()
    axes[0].set_ylabel("u")
    fig.suptitle("zero-flux balance: one redistribution step", fontsize=10)
    return _save(fig, out_path)


def _fig_e7(in_dir, out_path):
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    _convergence_axes(ax0, in_dir, 7)
    ax0.set_title("smooth convergence, 2D cut cell")
    t = _load(in_dir, "exp7_umsrd_field_n160.csv", ("x", "y", "u"))
    im = ax1.tripcolor(t["x"], t["y"], t["u"], shading="gouraud",
                       cmap="RdBu_r")
    fig.colorbar(im, ax=ax1)
    ax1.set_aspect("equal")
    ax1.set_title("UM-SRD field at T = 1, N = 160")
    return _save(fig, out_path)


def _fig_e8(in_dir, out_path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for scheme in ("srd", "umsrd"):
        t = _load(in_dir, f"exp8_{scheme}_drift_history.csv",
                  ("step", "l1_drift"))
        ax.plot(t["step"], t["l1_drift"], label=scheme)
    ax.set_xlabel("redistribution step")
    ax.set_ylabel(r"$\sum_i |u^k_i - u^0_i|$")
    ax.set_title("drift under zero flux balance")
    ax.legend()
    return _save(fig, out_path)


def _fig_e9(in_dir, out_path):
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for ax, key, label in zip(axes, ("cfl0p4", "cfl0p005"),
                              ("CFL 0.4", "CFL 0.005")):
        for scheme, style in (("srd", "-"), ("umsrd", "--")):
            t = _load(in_dir, f"exp9_{scheme}_error_history_{key}.csv",
                      ("t", "L1"))
            ax.plot(t["t"], t["L1"], style, label=scheme)
        ax.set_ylabel(r"$L^1$ error")
        ax.set_title(label, fontsize=10)
        ax.legend()
    axes[-1].set_xlabel("t")
    return _save(fig, out_path)


_FIGURES = {
    1: ("convergence", "loglog_convergence", _fig_e1),
    2: ("s_history", "timeseries", _fig_e2),
    3: ("step_tvd", "profile", _fig_e3),
    5: ("instability", "timeseries", _fig_e5),
    6: ("steady_state", "profile", _fig_e6),
    7: ("convergence_field", "field2d", _fig_e7),
    8: ("drift", "timeseries", _fig_e8),
    9: ("error_history", "timeseries", _fig_e9),
}

PLOTTABLE_EXPERIMENTS = tuple(sorted(_FIGURES))


def figure_spec(experiment: int, in_dir, out_dir) -> FigureSpec:
    if experiment not in _FIGURES:
        raise ValueError(
            f"no figure registered for experiment {experiment} "
            f"(choose from {PLOTTABLE_EXPERIMENTS})")
    name, kind, _ = _FIGURES[experiment]
    return FigureSpec(experiment, Path(in_dir), kind,
                      Path(out_dir) / f"exp{experiment}_{name}.png")


def render(spec: FigureSpec) -> Path:
    """Render one figure; raises if any input table is missing or short
    a column (a missing series must not silently produce a blank plot)."""
    _, _, fn = _FIGURES[spec.experiment]
    return fn(spec.in_dir, spec.out_path)


def render_experiment(experiment: int, in_dir, out_dir) -> list[Path]:
    return [render(figure_spec(experiment, in_dir, out_dir))]
