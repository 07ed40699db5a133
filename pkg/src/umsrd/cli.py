"""Command-line front end.

Subcommands: run a registered experiment, drive a convergence study or a
blending-parameter sweep, describe registered defaults, and render figures
from previously written reports.  All runs are deterministic; output files
are byte-identical across repeated invocations with the same flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .diagnostics import DivergenceError
from .experiments import (EXPERIMENT_IDS, ExperimentReport, experiment_spec,
                          run_experiment)
from .redistribution import SCHEMES, BlendParams

_CONFIG_KEYS = ("experiment", "scheme", "pre_merge", "p", "tau", "eps",
                "N", "alpha", "cfl", "T", "out_dir", "format")


def _parse_config_file(path: str) -> dict:
    """key=value lines, '#' comments; unknown keys rejected."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = val.strip()
    return cfg


def _spec_overrides(args, base) -> dict:
    ov = {}
    if args.scheme:
        bad = [s for s in args.scheme if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown scheme(s): {bad}")
        ov["schemes"] = tuple(args.scheme)
    if args.pre_merge is not None:
        ov["pre_merge"] = args.pre_merge == "on"
    if args.N is not None:
        if base.ns is not None:
            ov["ns"] = (args.N,)
        else:
            ov["n"] = args.N
    if args.alpha is not None:
        ov["alpha"] = args.alpha
    if args.cfl is not None:
        if base.cfls is not None:
            ov["cfls"] = (args.cfl,)
        else:
            ov["cfl"] = args.cfl
    if args.T is not None:
        ov["final_time"] = args.T
    blend = {}
    for name in ("p", "tau", "eps"):
        v = getattr(args, name)
        if v is not None:
            blend[name] = v
    if blend:
        ov["blend"] = dataclasses.replace(base.blend, **blend)
    return ov


def _write_report(report: ExperimentReport, out_dir: str, fmt: str):
    if fmt == "csv":
        return report.write(out_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in sorted(report.tables):
        cols, rows = report.tables[name]
        p = out / f"exp{report.experiment_id}_{name}.json"
        p.write_text(json.dumps(
            {"columns": cols, "rows": [list(r) for r in rows]},
            sort_keys=True) + "\n")
        paths.append(p)
    return paths


def _print_summary(report: ExperimentReport, paths):
    print(f"experiment {report.experiment_id}: {report.title}")
    for name in sorted(report.tables):
        cols, rows = report.tables[name]
        print(f"  [{name}] {len(rows)} rows")
        if name.endswith("_errors") or "param_sweep" in name:
            print("    " + "  ".join(f"{c:>10s}" for c in cols))
            for r in rows:
                print("    " + "  ".join(
                    f"{v:10.4e}" if isinstance(v, float) else f"{v:>10}"
                    for v in r))
        else:
            r = rows[-1]
            print("    last: " + ", ".join(
                f"{c}={v:.6g}" if isinstance(v, float) else f"{c}={v}"
                for c, v in zip(cols, r)))
    for key, val in sorted(report.metadata.items()):
        if key in ("spec", "mass_rel_dev"):
            continue
        print(f"  {key}: {val}")
    dev = report.metadata.get("mass_rel_dev", {})
    if dev:
        print(f"  max mass deviation (relative): {max(dev.values()):.3e}")
    for p in paths:
        print(f"  wrote {p}")


def _add_run_flags(sub):
    sub.add_argument("--experiment", type=int, required=True,
                     choices=EXPERIMENT_IDS)
    sub.add_argument("--scheme", action="append",
                     help="restrict to a scheme (repeatable)")
    sub.add_argument("--pre-merge", dest="pre_merge", choices=("on", "off"))
    sub.add_argument("--p", type=float, help="blending exponent")
    sub.add_argument("--tau", type=float, help="blending threshold")
    sub.add_argument("--eps", type=float, help="indicator floor")
    sub.add_argument("--N", type=int, help="cells per direction")
    sub.add_argument("--alpha", type=float, help="cut-cell volume fraction")
    sub.add_argument("--cfl", type=float)
    sub.add_argument("--T", type=float, help="final time")
    sub.add_argument("--config", help="key=value config file; flags win")
    sub.add_argument("--out-dir", dest="out_dir",
                     default=os.environ.get("UMSRD_OUT_DIR", "out"))
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def _apply_config(args):
    if not getattr(args, "config", None):
        return args
    cfg = _parse_config_file(args.config)
    casts = {"experiment": int, "N": int, "p": float, "tau": float,
             "eps": float, "alpha": float, "cfl": float, "T": float}
    for key, val in cfg.items():
        dest = key
        if key == "scheme":
            if args.scheme is None:
                args.scheme = val.split(",")
            continue
        if getattr(args, dest, None) in (None,):
            setattr(args, dest, casts.get(key, str)(val))
    return args


def _cmd_run(args) -> int:
    args = _apply_config(args)
    base = experiment_spec(args.experiment)
    spec = experiment_spec(args.experiment, **_spec_overrides(args, base))
    report = run_experiment(spec)
    paths = _write_report(report, args.out_dir, args.format)
    _print_summary(report, paths)
    return 0


def _cmd_convergence(args) -> int:
    args = _apply_config(args)
    if args.experiment not in (1, 7):
        raise ValueError("convergence studies are experiments 1 and 7")
    base = experiment_spec(args.experiment)
    ov = _spec_overrides(args, base)
    if args.ns:
        ov["ns"] = tuple(args.ns)
    spec = experiment_spec(args.experiment, **ov)
    report = run_experiment(spec)
    paths = _write_report(report, args.out_dir, args.format)
    _print_summary(report, paths)
    return 0


def _sweep_point(task):
    experiment, ov = task
    return run_experiment(experiment_spec(experiment, **ov))


def _cmd_sweep(args) -> int:
    args = _apply_config(args)
    ps = args.p_values or [1.0, 2.0, 4.0]
    taus = args.tau_values or [0.05, 0.1]
    grid = tuple((p, t) for p in ps for t in taus)
    base = experiment_spec(args.experiment)
    ov = _spec_overrides(args, base)
    ov["param_grid"] = grid
    if args.experiment != 4:
        raise ValueError("parameter sweeps are defined on experiment 4")
    if args.jobs and args.jobs > 1:
        # one single-point run per grid entry, merged into one table
        tasks = [(4, {**ov, "param_grid": (pt,)}) for pt in grid]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(_sweep_point, tasks))
        report = parts[0]
        cols, rows = report.tables["umsrd_param_sweep"]
        for part in parts[1:]:
            rows.extend(part.tables["umsrd_param_sweep"][1])
            report.metadata["mass_rel_dev"].update(
                part.metadata["mass_rel_dev"])
        report.metadata["spec"]["param_grid"] = [list(pt) for pt in grid]
    else:
        report = run_experiment(experiment_spec(4, **ov))
    paths = _write_report(report, args.out_dir, args.format)
    _print_summary(report, paths)
    return 0


def _cmd_describe(args) -> int:
    ids = [args.experiment] if args.experiment else list(EXPERIMENT_IDS)
    for k in ids:
        spec = experiment_spec(k)
        print(f"experiment {k}: {spec.title}")
        for f in dataclasses.fields(spec):
            if f.name in ("id", "title"):
                continue
            val = getattr(spec, f.name)
            if val is None:
                continue
            print(f"  {f.name} = {val}")
        if spec.param_grid:
            print(f"  ({len(spec.param_grid)} (p, tau) combos)")
    return 0


def _cmd_render(args) -> int:
    from . import plots
    paths = plots.render_experiment(args.experiment, args.in_dir,
                                    args.out_dir)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="umsrd",
        description=__doc__,
        epilog="CSV schema: every table is written as exp{id}_{name}.csv "
               "with a header row; a JSON sidecar exp{id}_metadata.json "
               "records the full configuration and conservation residuals.",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sp = ap.add_subparsers(dest="command", required=True)

    run = sp.add_parser("run", help="run one registered experiment")
    _add_run_flags(run)
    run.set_defaults(func=_cmd_run)

    conv = sp.add_parser("convergence", help="refinement study (exp 1 or 7)")
    _add_run_flags(conv)
    conv.add_argument("--ns", type=int, nargs="+",
                      help="grid sizes, e.g. --ns 40 80 160")
    conv.set_defaults(func=_cmd_convergence)

    sw = sp.add_parser("sweep", help="blending-parameter sweep (exp 4)")
    _add_run_flags(sw)
    sw.add_argument("--p-values", type=float, nargs="+")
    sw.add_argument("--tau-values", type=float, nargs="+")
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=_cmd_sweep)

    desc = sp.add_parser("describe", help="print registered experiment specs")
    desc.add_argument("--experiment", type=int, choices=EXPERIMENT_IDS)
    desc.set_defaults(func=_cmd_describe)

    rend = sp.add_parser("render", help="render figures from report CSVs")
    rend.add_argument("--experiment", type=int, required=True,
                      choices=EXPERIMENT_IDS)
    rend.add_argument("--in", dest="in_dir", required=True)
    rend.add_argument("--out", dest="out_dir", required=True)
    rend.set_defaults(func=_cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as e:
        print(f"error: scheme diverged at step {e.step}: {e}",
              file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
