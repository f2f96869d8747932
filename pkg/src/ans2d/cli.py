"""Command line front end.

Every subcommand reads a flat config file, writes its artifacts into an
output directory, and finishes with a manifest.json describing the run.
CSV floats are written with repr so reruns are byte-identical; wall-clock
data lives only in the manifest.

Exit codes: 0 all checks passed, 1 a certificate or gate was violated,
2 usage or configuration error, 3 the solution blew up.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import det as det_mod
from . import norms as norms_mod
from . import sde as sde_mod
from .basis import basis_element
from .config import echo_config, load_config
from .ensemble import EnsembleConfig, moment_bound_report, run_ensemble
from .errors import BlowUpError, ConfigError, GateError
from .noise import NoiseModel, condition_c_bounds, condition_c_gate, make_model
from .snapshots import write_snapshot
from .spectral import (
    SpectralField,
    TorusGrid,
    dealias,
    inverse_transform,
    nonlinear_term,
    nonlinear_term_oracle,
    random_solenoidal_field,
    shear_field,
    taylor_green,
    zeros_spectral,
)

DET_CSV_COLUMNS = ("t", "l2_sq", "d1_sq", "d2_sq", "d1d2_sq", "int_d1_sq",
                   "int_d1d2_sq", "energy_residual", "c_emp", "weighted_h01")
SDE_CSV_COLUMNS = ("t", "l2_sq", "d1_sq", "d2_sq", "d1d2_sq", "int_d1_sq",
                   "int_d1d2_sq", "h_t", "weighted_h01", "noise_work",
                   "hs_norm_sq")


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _grid(cfg: dict[str, Any]) -> TorusGrid:
    try:
        return TorusGrid(cfg["grid.n1"], cfg["grid.n2"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial_field(grid: TorusGrid, cfg: dict[str, Any]) -> SpectralField:
    kind = cfg["init.kind"]
    amp = cfg["init.amplitude"]
    if kind == "taylor-green":
        return taylor_green(grid, amplitude=amp)
    if kind == "shear-x1":
        return shear_field(grid, axis=1, amplitude=amp)
    if kind == "shear-x2":
        return shear_field(grid, axis=2, amplitude=amp)
    if kind == "zero":
        return zeros_spectral(grid)
    rng = np.random.default_rng(cfg["init.seed"])
    try:
        return random_solenoidal_field(grid, band=cfg["init.band"], amplitude=amp, rng=rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _split_recipes(text: str) -> list[str]:
    return [part.strip() for part in text.split(";") if part.strip()]


def _noise_model(cfg: dict[str, Any]) -> NoiseModel | None:
    c = _split_recipes(cfg["noise.c_recipes"])
    b = _split_recipes(cfg["noise.b_recipes"])
    if not c and not b:
        return None
    try:
        return make_model(c, b, cfg["noise.g"], margin=cfg["noise.budget_margin"])
    except ValueError as exc:
        raise ConfigError(f"bad noise recipes: {exc}") from exc


def _det_config(cfg: dict[str, Any]) -> det_mod.DetConfig:
    try:
        return det_mod.DetConfig(
            dt=cfg["det.dt"], t_end=cfg["det.t_end"], integrator=cfg["det.integrator"],
            eps_v=cfg["det.eps_v"], snapshot_every=cfg["det.snapshot_every"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _sde_config(cfg: dict[str, Any]) -> sde_mod.SdeConfig:
    try:
        return sde_mod.SdeConfig(
            dt=cfg["sde.dt"], t_end=cfg["sde.t_end"], galerkin_n=cfg["sde.galerkin_n"],
            seed=cfg["sde.seed"], scheme=cfg["sde.scheme"],
            drop_nonlinearity=cfg["sde.drop_nonlinearity"],
            alpha_tilde=cfg["sde.alpha_tilde"],
            snapshot_every=cfg["sde.snapshot_every"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cumulative_trapezoid(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * np.diff(t) * (y[:-1] + y[1:]))
    return out


# ---------------------------------------------------------------------------
# subcommands; each returns (exit_code, outputs, verdicts)

CmdResult = tuple[int, list[str], dict[str, Any]]


def _cmd_run_det(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    grid = _grid(cfg)
    u0 = _initial_field(grid, cfg)
    dcfg = _det_config(cfg)
    traj = det_mod.run_det(u0, dcfg)
    energy = det_mod.energy_certificate(traj)
    h01 = det_mod.h01_certificate(traj)
    rows = zip(traj.t, traj.l2_sq, traj.d1_sq, traj.d2_sq, traj.d1d2_sq,
               traj.int_d1_sq, traj.int_d1d2_sq, energy.residual, h01.c_emp,
               h01.weighted)
    _write_csv(out / "det_series.csv", DET_CSV_COLUMNS, list(rows))
    final_t, final_state = traj.states[-1]
    write_snapshot(out / "final_state.ans2", inverse_transform(final_state), final_t)
    verdicts = {
        "energy_certificate": energy.passed,
        "energy_rel_residual": energy.rel_to_initial,
        "h01_monotone": h01.passed_monotone,
        "h01_bound": h01.passed_bound,
        "c_emp_sup": h01.c_sup,
    }
    ok = energy.passed and h01.passed_monotone and h01.passed_bound
    return (0 if ok else 1), ["det_series.csv", "final_state.ans2"], verdicts


def _cmd_run_sde(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    grid = _grid(cfg)
    u0 = _initial_field(grid, cfg)
    scfg = _sde_config(cfg)
    model = _noise_model(cfg)
    gate_ok = True
    gate_text = "no noise"
    if model is not None:
        gate = condition_c_gate(condition_c_bounds(model, eta=cfg["noise.eta"]))
        gate_ok = gate.existence_ok
        gate_text = gate.describe()
        if not gate_ok and not args.force:
            return 1, [], {"existence_gate": False, "gate": gate_text}
    traj = sde_mod.run_sde(u0, model, scfg)
    int_d1 = _cumulative_trapezoid(traj.t, traj.diag["d1_sq"])
    int_d1d2 = _cumulative_trapezoid(traj.t, traj.diag["d1d2_sq"])
    rows = zip(traj.t, traj.diag["l2_sq"], traj.diag["d1_sq"], traj.diag["d2_sq"],
               traj.diag["d1d2_sq"], int_d1, int_d1d2, traj.weighted.h,
               traj.weighted.weighted_h01, traj.diag["noise_work"],
               traj.diag["hs_sq"])
    _write_csv(out / "sde_series.csv", SDE_CSV_COLUMNS, list(rows))
    write_snapshot(out / "final_state.ans2", inverse_transform(traj.final),
                   float(traj.t[-1]))
    verdicts = {
        "existence_gate": gate_ok,
        "gate": gate_text,
        "c_emp_sup": traj.weighted.c_emp_sup,
        "final_l2_sq": float(traj.diag["l2_sq"][-1]),
    }
    return 0, ["sde_series.csv", "final_state.ans2"], verdicts


def _cmd_ensemble(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    grid = _grid(cfg)
    u0 = _initial_field(grid, cfg)
    scfg = _sde_config(cfg)
    model = _noise_model(cfg)
    try:
        ens = EnsembleConfig(n_paths=cfg["ensemble.n_paths"],
                             base_seed=cfg["ensemble.base_seed"],
                             levels=cfg["ensemble.levels"],
                             batch=cfg["ensemble.batch"],
                             require_gates=not args.force)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = run_ensemble(u0, model, scfg, ens)
    rows = moment_bound_report(report)
    header = list(rows[0].keys())
    _write_csv(out / "ensemble_moments.csv", header,
               [[row[k] for k in header] for row in rows])
    verdicts = {
        "existence_gate": report.gate.existence_ok,
        "uniqueness_gate": report.gate.uniqueness_ok,
        "spread": report.spread,
        "uniform_ok": report.uniform_ok,
        "c_hat": {str(lv.level): lv.c_hat for lv in report.levels},
    }
    return (0 if report.uniform_ok else 1), ["ensemble_moments.csv"], verdicts


def _cmd_verify(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    grid = _grid(cfg)
    rng = np.random.default_rng(cfg["verify.seed"])
    band = min(cfg["verify.band"], grid.n1 // 3, grid.n2 // 3)
    report = norms_mod.NormReport()
    for _ in range(cfg["verify.n_fields"]):
        u = random_solenoidal_field(grid, band=band, amplitude=1.0, rng=rng)
        samples = inverse_transform(u).samples
        for comp in range(2):
            norms_mod.check_anisotropic_embedding(grid, samples[comp], report)
        norms_mod.check_minkowski(grid, samples[0], p=4.0, q=2.0, report=report)
        norms_mod.check_minkowski(grid, samples[1], p=6.0, q=3.0, report=report)
    _write_csv(out / "verify_report.csv", ("check", "lhs", "rhs", "constant", "pass"),
               report.rows)
    n_failed = len(report.failures())
    verdicts = {"checks": len(report.rows), "failed": n_failed,
                "all_passed": report.all_passed}
    return (0 if report.all_passed else 1), ["verify_report.csv"], verdicts


def _cmd_oracle_check(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    grid = _grid(cfg)
    if grid.n1 * grid.n2 > 1024:
        raise ConfigError(
            f"direct convolution oracle is limited to n1*n2 <= 1024, got {grid.n1}x{grid.n2}")
    rng = np.random.default_rng(cfg["verify.seed"])
    band = min(cfg["verify.band"], grid.n1 // 3, grid.n2 // 3)
    tol = 1e-12
    rows = []
    worst = 0.0
    for i in range(cfg["verify.n_fields"]):
        u = random_solenoidal_field(grid, band=band, amplitude=1.0, rng=rng)
        fast = nonlinear_term(u)
        slow = dealias(nonlinear_term_oracle(u))
        scale = float(np.max(np.abs(fast.coeffs)))
        rel = float(np.max(np.abs(fast.coeffs - slow.coeffs))) / (scale if scale > 0 else 1.0)
        worst = max(worst, rel)
        rows.append((i, rel, rel <= tol))
    _write_csv(out / "oracle_check.csv", ("field", "rel_err", "pass"), rows)
    ok = worst <= tol
    verdicts = {"max_rel_err": worst, "tolerance": tol, "all_passed": ok}
    return (0 if ok else 1), ["oracle_check.csv"], verdicts


def _parse_mode(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"pert_mode must be 'k1,k2', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"pert_mode must be 'k1,k2', got {text!r}") from exc


def _cmd_uniqueness(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    grid = _grid(cfg)
    u0 = _initial_field(grid, cfg)
    delta = cfg["uniqueness.perturbation"]
    tol = cfg["uniqueness.tol"]
    mode = _parse_mode(cfg["uniqueness.pert_mode"])
    try:
        pert = basis_element(grid, mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    v0 = SpectralField(grid, u0.coeffs + delta * pert.coeffs)

    if cfg["uniqueness.kind"] == "det":
        rep = det_mod.uniqueness_experiment(u0, v0, _det_config(cfg), tol=tol)
        rows = zip(rep.t, rep.w_l2_sq, rep.growth)
        _write_csv(out / "uniqueness_series.csv", ("t", "w_l2_sq", "growth"), list(rows))
        verdicts = {"kind": "det", "passed": rep.passed, "c1": rep.c1,
                    "bitwise_zero": rep.bitwise_zero, "max_ratio": rep.max_ratio}
        return (0 if rep.passed else 1), ["uniqueness_series.csv"], verdicts

    model = _noise_model(cfg)
    if model is None:
        raise ConfigError("sde uniqueness needs a noise model (noise.c_recipes / noise.b_recipes)")
    gate = condition_c_gate(condition_c_bounds(model, eta=cfg["noise.eta"]))
    if not gate.uniqueness_ok and not args.force:
        return 1, [], {"kind": "sde", "uniqueness_gate": False, "gate": gate.describe()}
    rep = sde_mod.pathwise_uniqueness_experiment(u0, v0, model, _sde_config(cfg), tol=tol)
    rows = zip(rep.t, rep.w_l2_sq, rep.q, rep.growth)
    _write_csv(out / "uniqueness_series.csv", ("t", "w_l2_sq", "q", "growth"), list(rows))
    verdicts = {"kind": "sde", "passed": rep.passed, "c1": rep.c1,
                "uniqueness_gate": gate.uniqueness_ok,
                "bitwise_zero": rep.bitwise_zero, "max_ratio": rep.max_ratio}
    return (0 if rep.passed else 1), ["uniqueness_series.csv"], verdicts


def _cmd_plot_data(cfg: dict[str, Any], out: Path, args: argparse.Namespace) -> CmdResult:
    src = args.input or cfg["plot.input"]
    if not src:
        raise ConfigError("plot-data needs --input or plot.input")
    try:
        with open(src, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            data = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {src}: {exc}") from exc
    if not header or "t" not in header:
        raise ConfigError(f"{src} is not a time-series CSV (no 't' column)")
    t_idx = header.index("t")
    rows = []
    for record in data:
        for j, name in enumerate(header):
            if j == t_idx:
                continue
            rows.append((name, record[t_idx], record[j]))
    _write_csv(out / "plot_data.csv", ("series", "t", "value"), rows)
    return 0, ["plot_data.csv"], {"series": len(header) - 1, "points": len(rows)}


_COMMANDS = {
    "run-det": _cmd_run_det,
    "run-sde": _cmd_run_sde,
    "ensemble": _cmd_ensemble,
    "verify": _cmd_verify,
    "oracle-check": _cmd_oracle_check,
    "uniqueness": _cmd_uniqueness,
    "plot-data": _cmd_plot_data,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ans2d",
        description="Simulation and estimate-verification harness for 2D "
                    "incompressible flow with horizontal-only viscosity.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run-det", "deterministic run with energy and vertical-decay certificates"),
        ("run-sde", "single stochastic trajectory with diagnostics"),
        ("ensemble", "moment estimates across Galerkin levels"),
        ("verify", "random-field battery for the norm inequalities"),
        ("oracle-check", "pseudospectral nonlinear term vs direct convolution"),
        ("uniqueness", "two-solution gap audit (det or sde)"),
        ("plot-data", "reshape a series CSV into long (series,t,value) form"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="path to a flat key=value config file")
        p.add_argument("--out", default="ans2d-out", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None,
                       help="override init.seed, sde.seed, ensemble.base_seed, verify.seed")
        p.add_argument("--force", action="store_true",
                       help="run even when a noise gate fails")
        if name == "plot-data":
            p.add_argument("--input", default=None, help="series CSV to reshape")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    started = time.monotonic()
    timestamp = datetime.now(timezone.utc).isoformat()
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            for key in ("init.seed", "sde.seed", "ensemble.base_seed", "verify.seed"):
                cfg[key] = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        code, outputs, verdicts = _COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GateError as exc:
        print(f"gate violation: {exc}", file=sys.stderr)
        return 1
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 3

    manifest = {
        "command": args.command,
        "timestamp": timestamp,
        "wall_time_s": time.monotonic() - started,
        "seeds": {key: cfg[key] for key in
                  ("init.seed", "sde.seed", "ensemble.base_seed", "verify.seed")},
        "config": echo_config(cfg),
        "outputs": outputs,
        "verdicts": verdicts,
        "exit_code": code,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    for name, value in verdicts.items():
        print(f"{args.command}: {name} = {value}")
    return code


if __name__ == "__main__":
    sys.exit(main())
