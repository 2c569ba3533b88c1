"""Command-line front end.

Run configurations are flat ``key = value`` text files (``#`` comments
allowed) with a mandatory ``schema_version = 1`` line; dotted keys group
sections.  The full schema is the ``SCHEMA`` table below; every key is
optional except ``schema_version`` (the task comes from the subcommand and,
when present in the file, must agree).  ``--set key=value`` overrides any
config field; ``--recipe NAME`` starts from a bundled figure-reproduction
configuration.

Subcommands: sweep-closed, sweep-open, evolve, inverted-region,
fidelity-scan, spectrum, recipes.  Exit codes: 0 success, 2 config error,
3 completed with per-point failures recorded in the dataset.

Artifacts: one or more CSV files plus ``manifest.json`` carrying the fully
resolved configuration, the sign convention of the scaled stability
parameter, the package version and wall time.  CSV bodies are deterministic
for a given configuration and version (rows in grid order, 17 significant
digits).
"""

from __future__ import annotations

import argparse
import functools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .closedphase import closed_row, hb_spectrum, sweep_closed
from .datasets import Dataset, GridAxis, GridSpec, write_dataset
from .dynamics import (IntegrationControls, MeanFieldODEState,
                       detect_attractor, integrate, os_probe, run_fidelity)
from .errors import ConfigError, NotConverged, VDickeError, ValidationError
from .fluctuations import build_inverted_form
from .opensteady import (inverted_region, np_rapidities, rapidities,
                         shape_matrix, solve_sp_steady, sweep_open)
from .params import OMEGA_SIGN_CONVENTION, ModelParams
from .recipes import list_recipes, recipe_config

TASKS = ("sweep-closed", "sweep-open", "evolve", "inverted-region",
         "fidelity-scan", "spectrum")

#: key -> (type, default).  ``None`` defaults mean "absent".
SCHEMA: dict[str, tuple] = {
    "schema_version": (int, None),
    "task": (str, None),
    "workers": (int, 0),
    "seed": (int, 0),
    "model.omega": (float, 2.0),
    "model.omega0": (float, 0.5),
    "model.lambda1": (float, 0.5),
    "model.lambda2": (float, 0.5),
    "model.phi": (float, math.pi / 4),
    "model.kappa": (float, 0.0),
    "model.n_atoms": (float, 1.0),
    "grid.axis1": (str, None),
    "grid.start1": (float, 0.0),
    "grid.stop1": (float, 1.0),
    "grid.num1": (int, 2),
    "grid.axis2": (str, None),
    "grid.start2": (float, 0.0),
    "grid.stop2": (float, 1.0),
    "grid.num2": (int, 2),
    "grid.ratio": (float, None),
    "evolve.t_end": (float, 2000.0),
    "evolve.cavity_seed": (float, 0.01),
    "evolve.state": (str, "normal"),
    "evolve.n1_frac": (float, 0.5),
    "evolve.theta": (float, 0.0),
    "evolve.rtol": (float, 1e-9),
    "evolve.atol": (float, 1e-12),
    "evolve.max_step": (float, 0.1),
    "evolve.n_samples": (int, 2001),
    "inverted.n_theta": (int, 128),
    "inverted.n_n1": (int, 128),
    "inverted.scan_phi_start": (float, None),
    "inverted.scan_phi_stop": (float, None),
    "inverted.scan_phi_num": (int, 0),
    "fidelity.scan": (str, "phi"),
    "fidelity.start": (float, 0.1),
    "fidelity.stop": (float, 1.4),
    "fidelity.num": (int, 10),
    "fidelity.nu": (float, math.pi / 8),
    "fidelity.lambda_r": (float, 0.8),
    "fidelity.max_time": (float, 60000.0),
    "fidelity.cavity_seed": (float, 0.01),
    "spectrum.sector": (str, "closed"),
    "spectrum.n1_frac": (float, 0.5),
    "spectrum.theta": (float, 4.71238898038469),
    "open.os_detect": (int, 0),
    "open.os_max_time": (float, 4000.0),
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, tuple[str, str]]:
    """Parse ``key = value`` lines into {key: (raw_value, location)}."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = (val.strip(), f"{source}:{lineno}")
    return out


def _coerce(key: str, raw: str, location: str):
    typ, _ = SCHEMA[key]
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"{location}: field {key!r} expects {typ.__name__}, "
                          f"got {raw!r}") from None


def build_config(task: str, file_text: str | None = None,
                 source: str = "<config>", recipe: str | None = None,
                 sets: list[str] | None = None) -> dict:
    """Merge defaults <- recipe <- config file <- --set overrides; validate."""
    cfg = {k: d for k, (_, d) in SCHEMA.items()}
    layers = []
    if recipe is not None:
        try:
            layers.append(parse_config_text(recipe_config(recipe), f"recipe:{recipe}"))
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    if file_text is not None:
        layers.append(parse_config_text(file_text, source))
    if sets:
        overrides = {}
        for item in sets:
            if "=" not in item:
                raise ConfigError(f"--set {item!r}: expected key=value")
            key, _, val = item.partition("=")
            overrides[key.strip()] = (val.strip(), f"--set {item!r}")
        layers.append(overrides)
    for layer in layers:
        for key, (raw, loc) in layer.items():
            if key not in SCHEMA:
                raise ConfigError(f"{loc}: unknown field {key!r}")
            cfg[key] = _coerce(key, raw, loc)
    if cfg["schema_version"] is None:
        if file_text is not None:
            raise ConfigError(f"{source}: missing required field 'schema_version'")
        cfg["schema_version"] = 1
    if cfg["schema_version"] != 1:
        raise ConfigError(f"unsupported schema_version {cfg['schema_version']}")
    if cfg["task"] is not None and cfg["task"] != task:
        raise ConfigError(f"config task {cfg['task']!r} does not match "
                          f"subcommand {task!r}")
    cfg["task"] = task
    return cfg


def config_params(cfg: dict) -> ModelParams:
    try:
        return ModelParams(omega=cfg["model.omega"], omega0=cfg["model.omega0"],
                           lambda1=cfg["model.lambda1"], lambda2=cfg["model.lambda2"],
                           phi=cfg["model.phi"], kappa=cfg["model.kappa"],
                           n_atoms=cfg["model.n_atoms"])
    except ValidationError as exc:
        raise ConfigError(f"model parameters invalid: {exc}") from None


def config_grid(cfg: dict) -> GridSpec:
    if cfg["grid.axis1"] is None:
        raise ConfigError("sweep tasks require grid.axis1")
    axes = []
    for i in (1, 2):
        name = cfg[f"grid.axis{i}"]
        if name is None:
            continue
        try:
            axes.append(GridAxis(name=name, start=cfg[f"grid.start{i}"],
                                 stop=cfg[f"grid.stop{i}"], num=cfg[f"grid.num{i}"]))
        except ValidationError as exc:
            raise ConfigError(f"grid.axis{i}: {exc}") from None
    try:
        return GridSpec(axes=tuple(axes), ratio=cfg["grid.ratio"])
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def _manifest(cfg: dict, extra: dict | None = None) -> dict:
    man = {"config": {k: v for k, v in sorted(cfg.items()) if v is not None},
           "omega_sign_convention": OMEGA_SIGN_CONVENTION,
           "version": __version__}
    if extra:
        man.update(extra)
    return man


def _write(outdir: Path, name: str, ds: Dataset, cfg: dict, t0: float) -> int:
    ds.meta.update(_manifest(cfg, {"wall_time_s": time.time() - t0}))
    write_dataset(ds, outdir / name, outdir / "manifest.json")
    n = ds.n_failed
    if n:
        print(f"warning: {n} grid point(s) failed; see the error column",
              file=sys.stderr)
    return 3 if n else 0


def _run_sweep_closed(cfg: dict, outdir: Path) -> int:
    t0 = time.time()
    ds = sweep_closed(config_grid(cfg), config_params(cfg), workers=cfg["workers"])
    return _write(outdir, "sweep_closed.csv", ds, cfg, t0)


def _run_sweep_open(cfg: dict, outdir: Path) -> int:
    t0 = time.time()
    detector = None
    if cfg["open.os_detect"]:
        detector = functools.partial(os_probe, max_time=cfg["open.os_max_time"])
    ds = sweep_open(config_grid(cfg), config_params(cfg), workers=cfg["workers"],
                    os_detector=detector)
    return _write(outdir, "sweep_open.csv", ds, cfg, t0)


def _run_evolve(cfg: dict, outdir: Path) -> int:
    t0 = time.time()
    p = config_params(cfg)
    if cfg["evolve.state"] == "normal":
        s0 = MeanFieldODEState.normal_state(cfg["evolve.cavity_seed"])
    elif cfg["evolve.state"] == "inverted":
        s0 = MeanFieldODEState.inverted_state(cfg["evolve.n1_frac"], cfg["evolve.theta"])
    else:
        raise ConfigError(f"evolve.state must be 'normal' or 'inverted', "
                          f"got {cfg['evolve.state']!r}")
    controls = IntegrationControls(rtol=cfg["evolve.rtol"], atol=cfg["evolve.atol"],
                                   max_step=cfg["evolve.max_step"],
                                   n_samples=cfg["evolve.n_samples"])
    traj = integrate(s0, p, cfg["evolve.t_end"], controls)
    res = traj.constraint_residuals()
    cols = ["t", "re_alpha", "im_alpha", "l00", "l11", "l22", "re_l01", "im_l01",
            "re_l02", "im_l02", "re_l12", "im_l12",
            "trace_res", "quad_res", "cubic_res"]
    ds = Dataset(columns=cols)
    for i, t in enumerate(traj.t):
        row = {"t": float(t)}
        for j, name in enumerate(cols[1:13], start=0):
            row[name] = float(traj.y[j, i])
        row["trace_res"], row["quad_res"], row["cubic_res"] = (float(x) for x in res[:, i])
        ds.rows.append(row)
    report = None
    try:
        rep = detect_attractor(traj)
        report = {"kind": rep.kind, "period": rep.period, "amplitude": rep.amplitude,
                  "channel": rep.channel, "transient_time": rep.transient_time}
    except ValidationError:
        pass  # trajectory shorter than the analysis windows
    ds.meta["attractor"] = report
    ds.meta["max_constraint_drift"] = float(np.abs(res - res[:, :1]).max())
    return _write(outdir, "trajectory.csv", ds, cfg, t0)


def _run_inverted_region(cfg: dict, outdir: Path) -> int:
    t0 = time.time()
    p = config_params(cfg)
    n_theta, n_n1 = cfg["inverted.n_theta"], cfg["inverted.n_n1"]
    if cfg["inverted.scan_phi_num"]:
        if cfg["inverted.scan_phi_start"] is None or cfg["inverted.scan_phi_stop"] is None:
            raise ConfigError("phi scan requires inverted.scan_phi_start/stop")
        phis = np.linspace(cfg["inverted.scan_phi_start"], cfg["inverted.scan_phi_stop"],
                           cfg["inverted.scan_phi_num"])
        ds = Dataset(columns=["phi", "area", "area_extensive", "analytic_area",
                              "omega_scaled", "matched_convention", "error"])
        for phi in phis:
            row = {"phi": float(phi)}
            try:
                reg = inverted_region(p.replace(phi=float(phi)), n_theta, n_n1)
                row.update(area=reg.area, area_extensive=reg.area_extensive,
                           analytic_area=reg.analytic_area, omega_scaled=reg.omega_used,
                           matched_convention=reg.matched_convention, error="")
            except Exception as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            ds.rows.append(row)
        return _write(outdir, "inverted_area_scan.csv", ds, cfg, t0)
    reg = inverted_region(p, n_theta, n_n1)
    ds = Dataset(columns=["theta", "n1_frac"])
    for theta, n1 in reg.boundary_samples:
        ds.rows.append({"theta": float(theta), "n1_frac": float(n1)})
    ds.meta.update({"area": reg.area, "area_extensive": reg.area_extensive,
                    "analytic_area": reg.analytic_area,
                    "analytic_area_flipped": reg.analytic_area_flipped,
                    "matched_convention": reg.matched_convention,
                    "omega_scaled": reg.omega_used,
                    "stable_fraction": reg.stable_fraction})
    return _write(outdir, "inverted_boundary.csv", ds, cfg, t0)


def _run_fidelity_scan(cfg: dict, outdir: Path) -> int:
    t0 = time.time()
    p = config_params(cfg)
    mode = cfg["fidelity.scan"]
    if mode not in ("phi", "nu"):
        raise ConfigError(f"fidelity.scan must be 'phi' or 'nu', got {mode!r}")
    lr = cfg["fidelity.lambda_r"]
    xs = np.linspace(cfg["fidelity.start"], cfg["fidelity.stop"], cfg["fidelity.num"])
    ds = Dataset(columns=[mode, "fidelity", "attractor", "error"])
    for x in xs:
        if mode == "phi":
            nu = cfg["fidelity.nu"]
            pi_ = p.replace(phi=float(x), lambda1=lr * math.cos(nu),
                            lambda2=lr * math.sin(nu))
        else:
            pi_ = p.replace(lambda1=lr * math.cos(float(x)),
                            lambda2=lr * math.sin(float(x)))
        row = {mode: float(x)}
        try:
            f, rep = run_fidelity(pi_, cavity_seed=cfg["fidelity.cavity_seed"],
                                  max_time=cfg["fidelity.max_time"])
            row.update(fidelity=f, attractor=rep.kind, error="")
        except (NotConverged, VDickeError) as exc:
            row.update(fidelity=math.nan, attractor="",
                       error=f"{type(exc).__name__}: {exc}")
        ds.rows.append(row)
    return _write(outdir, "fidelity.csv", ds, cfg, t0)


def _run_spectrum(cfg: dict, outdir: Path) -> int:
    t0 = time.time()
    p = config_params(cfg)
    sector = cfg["spectrum.sector"]
    ds = Dataset(columns=["state", "index", "re", "im", "norm"])

    def add_spectrum(label: str, spec):
        for i, (f, s) in enumerate(zip(spec.frequencies, spec.symplectic_norms)):
            ds.rows.append({"state": label, "index": i, "re": float(f.real),
                            "im": float(f.imag), "norm": float(s)})

    def add_zetas(label: str, rap):
        for i, z in enumerate(rap.zetas):
            ds.rows.append({"state": label, "index": i, "re": float(z.real),
                            "im": float(z.imag), "norm": math.nan})

    if sector == "closed":
        from .closedphase import classify_closed
        point = classify_closed(p)
        add_spectrum("np", point.np_spectrum)
        if point.sp_spectrum is not None:
            add_spectrum("sp", point.sp_spectrum)
        ds.meta["phases"] = sorted(ph.value for ph in point.stable_phases)
    elif sector == "open":
        add_zetas("np", np_rapidities(p))
        for k, state in enumerate(solve_sp_steady(p)):
            if state.is_np:
                continue
            add_zetas(f"sp{k}", state.rapidities(p))
    elif sector == "inverted":
        q = build_inverted_form(p, cfg["spectrum.n1_frac"], cfg["spectrum.theta"])
        add_zetas("inverted", rapidities(shape_matrix(q, p.kappa)))
    else:
        raise ConfigError(f"spectrum.sector must be closed/open/inverted, got {sector!r}")
    return _write(outdir, "spectrum.csv", ds, cfg, t0)


_RUNNERS = {
    "sweep-closed": _run_sweep_closed,
    "sweep-open": _run_sweep_open,
    "evolve": _run_evolve,
    "inverted-region": _run_inverted_region,
    "fidelity-scan": _run_fidelity_scan,
    "spectrum": _run_spectrum,
}


def run(cfg: dict, outdir: Path) -> int:
    """Execute a validated configuration; returns the process exit code."""
    outdir.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg["task"]](cfg, outdir)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="vdicke",
        description="Phase diagrams, spectra and dynamics of the unbalanced "
                    "three-level V-type Dicke model.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    prec = sub.add_parser("recipes", help="list bundled figure-reproduction configs")
    prec.add_argument("--show", metavar="NAME", help="print one recipe's config text")

    for task in TASKS:
        sp = sub.add_parser(task, help=f"run a {task} task")
        sp.add_argument("--config", type=Path, help="config file path")
        sp.add_argument("--recipe", help="bundled recipe name to start from")
        sp.add_argument("--set", dest="sets", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config field (repeatable)")
        sp.add_argument("--out", type=Path, default=Path("vdicke-out"),
                        help="output directory (default: ./vdicke-out)")
        sp.add_argument("--workers", type=int, help="worker process count")

    args = parser.parse_args(argv)
    if args.command == "recipes":
        if args.show:
            try:
                print(recipe_config(args.show), end="")
            except KeyError as exc:
                print(exc.args[0], file=sys.stderr)
                return 2
        else:
            for name, desc in list_recipes():
                print(f"{name:15s} {desc}")
        return 0

    try:
        text = None
        source = "<config>"
        if args.config is not None:
            if not args.config.exists():
                raise ConfigError(f"config file not found: {args.config}")
            text = args.config.read_text(encoding="utf-8")
            source = str(args.config)
        cfg = build_config(args.command, text, source, args.recipe, args.sets)
        if args.workers is not None:
            cfg["workers"] = args.workers
        return run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
