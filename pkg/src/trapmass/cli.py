"""Command-line front end.

Usage:
    trapmass <experiment> --config <file> [--out <dir>] [--no-timestamp] [--verify]
    trapmass verify --all [--out <dir>]

Experiments: ramsey, shift, drive, qfunc, sweep. Each run reads one JSON
config, writes a CSV data file plus a JSON summary, both carrying a
reproducibility header (config hash, constants-table version). Exit codes:
0 success, 1 failed verification, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import analytic, clock, constants, drive, model, phasespace, ramsey, states, verify
from .errors import TrapMassError

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- config ---

_SYSTEM_KEYS = {"unit_system", "M0", "levels", "k", "omega0", "g", "c", "hbar"}
_STATE_KEYS = {"type", "n", "alpha", "nbar", "dim"}
_EXPERIMENT_KEYS = {
    "ramsey": {"state", "x0", "level", "periods", "points", "times", "corotating",
               "dim", "dim_tol"},
    "shift": {"omega0_grid", "n_values", "temperature", "level"},
    "drive": {"state", "N", "dim", "level"},
    "qfunc": {"state", "distribution", "t", "delta", "dim", "alpha"},
    "sweep": {"op", "axes"},
}


def _check_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path: str, experiment: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    top_allowed = {"experiment", "system", "output", "params"}
    _check_keys(cfg, top_allowed, "config")
    for key in ("experiment", "system", "output"):
        if key not in cfg:
            raise ConfigError(f"missing required section {key!r}")
    if cfg["experiment"] != experiment:
        raise ConfigError(
            f"config experiment {cfg['experiment']!r} does not match "
            f"subcommand {experiment!r}"
        )
    _check_keys(cfg["system"], _SYSTEM_KEYS, "system")
    _check_keys(cfg["output"], {"path", "format"}, "output")
    fmt = cfg["output"].get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {fmt!r}")
    params_sec = cfg.get("params", {})
    if not isinstance(params_sec, dict):
        raise ConfigError("params must be an object")
    _check_keys(params_sec, _EXPERIMENT_KEYS[experiment], "params")
    return cfg


def _build_state(spec: dict) -> states.CMState:
    if not isinstance(spec, dict):
        raise ConfigError("state must be an object")
    _check_keys(spec, _STATE_KEYS, "state")
    kind = spec.get("type")
    dim = int(spec.get("dim", 128))
    if kind == "fock":
        return states.fock_state(dim, int(spec.get("n", 0)))
    if kind == "coherent":
        return states.coherent_state(dim, complex(spec.get("alpha", 0.0)))
    if kind == "thermal":
        return states.thermal_state_cm(dim, float(spec.get("nbar", 0.0)))
    raise ConfigError(f"unknown state type {kind!r}")


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()
    ).hexdigest()[:16]


# ---------------------------------------------------------------- output ---

def _header_lines(cfg: dict, timestamp: bool) -> list[str]:
    lines = [
        f"# config_sha256={_config_hash(cfg)}",
        f"# constants={constants.CONSTANTS_VERSION}",
    ]
    if timestamp:
        lines.append(
            f"# generated={datetime.now(timezone.utc).isoformat(timespec='seconds')}"
        )
    return lines


def _write_csv(path: str, cfg: dict, timestamp: bool, columns: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in _header_lines(cfg, timestamp):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([
                f"{v:.17g}" if isinstance(v, float) else v for v in row
            ])


def _write_json(path: str, cfg: dict, timestamp: bool, payload: dict) -> None:
    doc = {
        "config_sha256": _config_hash(cfg),
        "constants": constants.CONSTANTS_VERSION,
    }
    if timestamp:
        doc["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=float)
        fh.write("\n")


def _out_paths(cfg: dict, out_dir: str) -> tuple[str, str]:
    base = cfg["output"].get("path", cfg["experiment"])
    os.makedirs(out_dir, exist_ok=True)
    return (
        os.path.join(out_dir, base + ".csv"),
        os.path.join(out_dir, base + "_summary.json"),
    )


def read_csv(path: str) -> tuple[dict, list[str], list[list[float]]]:
    """Round-trip reader: returns (header metadata, column names, rows)."""
    meta = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return meta, columns, rows


# ----------------------------------------------------------- experiments ---

def run_ramsey(cfg: dict, out_dir: str, timestamp: bool) -> list[str]:
    p = cfg.get("params", {})
    params = model.build_system(cfg["system"])
    level = int(p.get("level", 1))
    state_spec = p.get("state", {"type": "fock", "n": 0, "dim": 128})
    state = _build_state(state_spec)
    frame = model.derive_mode_frame(params, level)
    if "times" in p:
        times = np.asarray([float(t) for t in p["times"]])
    else:
        periods = float(p.get("periods", 2.0))
        points = int(p.get("points", 400))
        times = np.linspace(0.0, periods * 2.0 * math.pi / frame.omega_i, points)
    x0 = p.get("x0")
    x0 = None if x0 is None else float(x0)
    trace = ramsey.ramsey_trace(
        params, state, times, level_pair=(0, level), x0=x0,
        dim=p.get("dim"), dim_tol=float(p.get("dim_tol", 1e-8)),
        corotating=bool(p.get("corotating", False)),
    )

    columns = ["t", "P", "V", "phase"]
    data = [times, trace.probability, trace.visibility, trace.phase]
    summary = {"dim": trace.dim, "x0": trace.x0, "level": level}
    is_vacuum = state_spec.get("type") == "fock" and int(state_spec.get("n", 0)) == 0
    is_real_coherent = (
        state_spec.get("type") == "coherent"
        and complex(state_spec.get("alpha", 0.0)).imag == 0.0
    )
    if (is_vacuum or is_real_coherent) and not trace.corotating:
        x0_eff = trace.x0
        if is_real_coherent:
            # A real-alpha coherent state is the vacuum Gaussian displaced
            # by alpha*sqrt(2 hbar / M0 omega0) toward the other trap.
            x0_eff += complex(state_spec["alpha"]).real * math.sqrt(
                2.0 * params.hbar / (params.M0 * params.omega0)
            )
        amp = analytic.vacuum_coherent_amplitude(params, x0_eff, times, level=level)
        columns += ["V_analytic", "phase_analytic"]
        data += [np.abs(amp), np.unwrap(np.angle(amp))]
        summary["oracle_max_deviation"] = float(
            np.max(np.abs(np.abs(amp) - trace.visibility))
        )
        t_min, v_min, t_rev, v_rev = analytic.visibility_extrema(
            params, x0_eff, level=level
        )
        summary.update(t_min=t_min, V_min=v_min, t_rev=t_rev, V_rev=v_rev)

    csv_path, json_path = _out_paths(cfg, out_dir)
    _write_csv(csv_path, cfg, timestamp, columns, zip(*[list(map(float, d)) for d in data]))
    _write_json(json_path, cfg, timestamp, summary)
    return [csv_path, json_path]


def _grid_from_spec(spec) -> np.ndarray:
    if isinstance(spec, list):
        return np.asarray([float(v) for v in spec])
    _check_keys(spec, {"min", "max", "points", "log"}, "grid")
    lo, hi, n = float(spec["min"]), float(spec["max"]), int(spec["points"])
    if spec.get("log", False):
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def run_shift(cfg: dict, out_dir: str, timestamp: bool) -> list[str]:
    p = cfg.get("params", {})
    system = dict(cfg["system"])
    level = int(p.get("level", 1))
    omegas = _grid_from_spec(p.get("omega0_grid", {"min": 1e2, "max": 1e7,
                                                   "points": 200, "log": True}))
    n_values = [float(n) for n in p.get("n_values", [0.0])]

    rows = []
    minima = {}
    for n in n_values:
        best = (None, math.inf)
        for w in omegas:
            sys_w = dict(system)
            sys_w.pop("k", None)
            sys_w["omega0"] = float(w)
            params = model.build_system(sys_w)
            rep = clock.energy_gap(params, level, n)
            rows.append([
                float(w), n, rep.fractional_shift,
                rep.components["gravitational"], rep.components["time_dilation"], 0,
            ])
            if rep.fractional_shift < best[1]:
                best = (len(rows) - 1, rep.fractional_shift)
        rows[best[0]][5] = 1
        params = model.build_system({**system, "omega0": omegas[0]})
        try:
            opt = clock.minimal_shift(params, n)
            minima[f"n={n}"] = {"omega_min": opt.omega_min, "delta_min": opt.delta_min}
        except TrapMassError as exc:
            minima[f"n={n}"] = {"error": str(exc)}

    summary = {"minima": minima}
    if "temperature" in p:
        params = model.build_system({**system})
        rep = clock.thermal_shift(params, float(p["temperature"]), level)
        summary["thermal"] = {
            "T": float(p["temperature"]),
            "n_mean": rep.n,
            "fractional_shift": rep.fractional_shift,
        }
    csv_path, json_path = _out_paths(cfg, out_dir)
    _write_csv(csv_path, cfg, timestamp,
               ["omega0", "n", "delta", "gravitational", "time_dilation", "is_min"],
               rows)
    _write_json(json_path, cfg, timestamp, summary)
    return [csv_path, json_path]


def run_drive(cfg: dict, out_dir: str, timestamp: bool) -> list[str]:
    p = cfg.get("params", {})
    params = model.build_system(cfg["system"])
    dim = int(p.get("dim", 128))
    N = int(p.get("N", 50))
    level = int(p.get("level", 1))
    state = _build_state(p.get("state", {"type": "fock", "n": 0, "dim": dim}))
    res = drive.iterate_drive(params, state, N, dim, level)
    rows = []
    for k in range(N):
        exact = res.exact[k] if res.exact is not None else float("nan")
        rows.append([k + 1, float(exact), float(res.approx[k])])
    summary = {
        "per_cycle_r": res.schedule.per_cycle_r,
        "beta_g": [res.schedule.beta_g.real, res.schedule.beta_g.imag],
        "max_deviation": (
            float(np.max(np.abs(res.exact - res.approx)))
            if res.exact is not None else None
        ),
        "variance_growth_N": drive.position_variance_growth(params, N, level),
    }
    csv_path, json_path = _out_paths(cfg, out_dir)
    _write_csv(csv_path, cfg, timestamp, ["k", "P_exact", "P_approx"], rows)
    _write_json(json_path, cfg, timestamp, summary)
    return [csv_path, json_path]


def run_qfunc(cfg: dict, out_dir: str, timestamp: bool) -> list[str]:
    p = cfg.get("params", {})
    params = model.build_system(cfg["system"])
    dim = int(p.get("dim", 128))
    state = _build_state(p.get("state", {"type": "fock", "n": 0, "dim": dim}))
    t = float(p.get("t", 0.0))
    summary = {}
    if "distribution" in p:
        dist = phasespace.InternalDistribution(tuple(float(v) for v in p["distribution"]))
        evolved = phasespace.evolve_mixed_cm(params, state, dist, t, state.dim)
    else:
        evolved = state
    grid = phasespace.qfunction(evolved, delta=float(p.get("delta", 0.1)))
    summary["normalization"] = grid.normalization()
    try:
        fit = phasespace.effective_squeezing_fit(grid)
        summary["r_eff"] = fit.r_eff
        summary["fit_residual"] = fit.residual
    except TrapMassError as exc:
        summary["r_eff_error"] = str(exc)
    rows = [
        [float(b.real), float(b.imag), float(q)]
        for b, q in zip(grid.beta.ravel(), grid.q.ravel())
    ]
    csv_path, json_path = _out_paths(cfg, out_dir)
    _write_csv(csv_path, cfg, timestamp, ["re_beta", "im_beta", "Q"], rows)
    _write_json(json_path, cfg, timestamp, summary)
    return [csv_path, json_path]


_SWEEP_OPS = {"fractional_shift", "visibility_extrema"}


def run_sweep(cfg: dict, out_dir: str, timestamp: bool) -> list[str]:
    p = cfg.get("params", {})
    op = p.get("op")
    if op not in _SWEEP_OPS:
        raise ConfigError(f"sweep op must be one of {sorted(_SWEEP_OPS)}, got {op!r}")
    axes = p.get("axes", {})
    system = dict(cfg["system"])
    rows, columns = [], []
    if op == "fractional_shift":
        _check_keys(axes, {"omega0", "n"}, "axes")
        columns = ["omega0", "n", "delta"]
        for w in axes.get("omega0", [system.get("omega0", 1e6)]):
            sys_w = dict(system)
            sys_w.pop("k", None)
            sys_w["omega0"] = float(w)
            params = model.build_system(sys_w)
            for n in axes.get("n", [0.0]):
                rep = clock.energy_gap(params, 1, float(n))
                rows.append([float(w), float(n), rep.fractional_shift])
    else:
        _check_keys(axes, {"x0"}, "axes")
        columns = ["x0", "t_min", "V_min", "t_rev", "V_rev"]
        params = model.build_system(system)
        for x0 in axes.get("x0", [0.0]):
            t_min, v_min, t_rev, v_rev = analytic.visibility_extrema(params, float(x0))
            rows.append([float(x0), t_min, v_min, t_rev, v_rev])
    csv_path, json_path = _out_paths(cfg, out_dir)
    _write_csv(csv_path, cfg, timestamp, columns, rows)
    _write_json(json_path, cfg, timestamp, {"op": op, "rows": len(rows)})
    return [csv_path, json_path]


def run_verify_all(out_dir: str) -> int:
    reports = verify.run_all()
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "verify_report.json")
    with open(path, "w") as fh:
        json.dump([r.as_dict() for r in reports], fh, indent=2)
        fh.write("\n")
    ok = all(r.passed for r in reports)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} "
              f"(max normalized deviation {r.max_deviation:.3e})")
    print(f"report written to {path}")
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


# ------------------------------------------------------------ verification ---

def verify_outputs(paths: list[str]) -> list[str]:
    """Re-read emitted CSVs and check the declared invariants."""
    problems = []
    for path in paths:
        if not path.endswith(".csv"):
            continue
        _, columns, rows = read_csv(path)
        arr = np.asarray(rows, dtype=float)
        for j, col in enumerate(columns):
            vals = arr[:, j]
            if col in ("V", "V_analytic", "P_exact", "P_approx", "P"):
                if np.any(~np.isnan(vals) & ((vals < -1e-10) | (vals > 1.0 + 1e-8))):
                    problems.append(f"{path}: column {col} outside [0, 1]")
            if col == "Q" and np.any(vals < -1e-12):
                problems.append(f"{path}: negative Q values")
    return problems


# ------------------------------------------------------------------ main ---

_RUNNERS = {
    "ramsey": run_ramsey,
    "shift": run_shift,
    "drive": run_drive,
    "qfunc": run_qfunc,
    "sweep": run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapmass",
        description="Mass-energy-equivalence simulations for trapped particles",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp header line")
        sp.add_argument("--verify", action="store_true",
                        help="re-read outputs and check invariants")
    vp = sub.add_parser("verify", help="run the oracle suite")
    vp.add_argument("--all", action="store_true", required=True)
    vp.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get("TRAPMASS_OUT", ".")
    if args.command == "verify":
        return run_verify_all(out_dir)
    try:
        cfg = load_config(args.config, args.command)
    except (ConfigError, TrapMassError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = _RUNNERS[args.command](cfg, out_dir, timestamp=not args.no_timestamp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrapMassError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    if args.verify:
        problems = verify_outputs(paths)
        if problems:
            for prob in problems:
                print(f"verification: {prob}", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
