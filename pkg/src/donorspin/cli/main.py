"""Command-line surface: figure-reproduction runs with manifests.

Every command resolves (config, seed) to outputs deterministically;
manifests echo the fully resolved config plus per-output checksums so a
run can be reproduced bit-exactly from its manifest alone.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from typing import Any

import numpy as np

from ..bath import CceParams, LatticeSpec, SECOND_NN_FACTOR, convergence_study, ensemble_echo
from ..fitting import (
    FitResult,
    echo_decay,
    exp_recovery,
    fit_echo_decay,
    fit_exp_recovery,
    fit_gaussian_lines,
    fit_t1_temperature,
    gaussian_derivative_sum,
    gaussian_sum,
    rabi_peak,
    t1_rate,
)
from ..spectra import (
    find_all_resonances,
    frequency_field_map,
    rabi_frequency,
    sx_matrix_element,
    synthesize_spectrum,
)
from ..spin import SpinSystem, concurrence, diagonalize
from .config import ConfigError, load_config, render_config
from .manifest import build_manifest, json_ready, write_manifest


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        # plain-float repr is the shortest digits that round-trip the bits
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(value) for value in row) + "\n")


def _write_json(path: str, payload: Any) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(json_ready(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _system_from(config) -> SpinSystem:
    donor = config["donor"]
    return SpinSystem(
        electron_spin=0.5,
        nuclear_spin=donor["nuclear_spin"],
        hyperfine_mhz=donor["hyperfine_mhz"],
        g_factor=donor["g_factor"],
        nuclear_zeeman_delta=donor["nuclear_zeeman_delta"],
    )


def _out_path(config, name: str) -> str:
    out_dir = config["run"]["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _finish(command: str, config, started: float, outputs: list[str], extra=None) -> None:
    manifest = build_manifest(command, config, time.monotonic() - started, outputs, extra)
    write_manifest(_out_path(config, f"{command}_manifest.json"), manifest)


def _fit_result_payload(result: FitResult) -> dict[str, Any]:
    return {
        "params": result.params,
        "std_errors": result.std_errors,
        "residual_norm": result.residual_norm,
        "converged": result.converged,
        "n_iterations": result.n_iterations,
    }


def cmd_print_config(config, args) -> int:
    sys.stdout.write(render_config(config))
    return 0


def cmd_levels(config, args) -> int:
    started = time.monotonic()
    system = _system_from(config)
    section = config["levels"]
    grid = np.linspace(section["b_min_t"], section["b_max_t"], section["b_steps"])
    labels = range(1, system.dimension + 1)
    header = (
        ["B_mT"]
        + [f"E{label}" for label in labels]
        + [f"C{label}" for label in labels]
    )
    rows = []
    for b_field in grid:
        eigensystem = diagonalize(system, float(b_field))
        rows.append(
            [float(b_field) * 1e3]
            + [eigensystem.energy(label) for label in labels]
            + [concurrence(eigensystem, label) for label in labels]
        )
    path = _out_path(config, "levels.csv")
    _write_csv(path, header, rows)
    _finish("levels", config, started, [path])
    return 0


def cmd_resonances(config, args) -> int:
    started = time.monotonic()
    system = _system_from(config)
    section = config["resonances"]
    transitions = find_all_resonances(
        system,
        section["frequency_mhz"],
        (section["b_min_t"], section["b_max_t"]),
        intensity_floor=section["intensity_floor"],
    )
    json_path = _out_path(config, "resonances.json")
    _write_json(json_path, [dataclasses.asdict(tr) for tr in transitions])
    step_t = section["grid_step_mt"] * 1e-3
    n_points = int(round((section["b_max_t"] - section["b_min_t"]) / step_t)) + 1
    grid = np.linspace(section["b_min_t"], section["b_max_t"], n_points)
    curve = synthesize_spectrum(transitions, section["fwhm_mt"], "derivative", grid)
    csv_path = _out_path(config, "spectrum.csv")
    _write_csv(
        csv_path,
        ["field_t", "signal"],
        zip((float(b) for b in curve.field_grid), (float(s) for s in curve.signal)),
    )
    _finish("resonances", config, started, [json_path, csv_path])
    return 0


def cmd_freqmap(config, args) -> int:
    started = time.monotonic()
    system = _system_from(config)
    section = config["freqmap"]
    grid = np.linspace(section["b_min_t"], section["b_max_t"], section["b_steps"])
    table = frequency_field_map(system, grid, intensity_floor=section["intensity_floor"])
    path = _out_path(config, "freqmap.csv")
    _write_csv(
        path,
        ["field_t", "freq_mhz", "intensity", "label_upper", "label_lower"],
        (
            (float(r["field_b"]), float(r["freq_mhz"]), float(r["intensity"]),
             int(r["label_upper"]), int(r["label_lower"]))
            for r in table
        ),
    )
    _finish("freqmap", config, started, [path])
    return 0


def cmd_rabi(config, args) -> int:
    started = time.monotonic()
    system = _system_from(config)
    section = config["rabi"]
    upper, lower = section["label_upper"], section["label_lower"]
    field = section["field_t"]
    rabi_mhz = rabi_frequency(system, upper, lower, field, section["f1_mhz"])
    payload = {
        "label_upper": upper,
        "label_lower": lower,
        "field_t": field,
        "f1_mhz": section["f1_mhz"],
        "sx_element": sx_matrix_element(system, upper, lower, field),
        "rabi_mhz": rabi_mhz,
        "pi_time_ns": 1e3 / (2.0 * rabi_mhz),
    }
    if section["input_csv"] is not None:
        data = _read_columns(section["input_csv"], ("time_us", "signal"))
        payload["measured_mhz"] = rabi_peak(data["time_us"], data["signal"])
    path = _out_path(config, "rabi.json")
    _write_json(path, payload)
    _finish("rabi", config, started, [path])
    return 0


def _cce_params(config) -> CceParams:
    section = config["cce"]
    shells = {2: SECOND_NN_FACTOR * section["a0_nm"], 3: None}
    if section["shell"] not in shells:
        raise ConfigError("cce.shell: must be 2 or 3")
    times = tuple(float(t) for t in np.linspace(0.0, section["t_max_ms"], section["t_steps"]))
    return CceParams(
        transition=(section["label_upper"], section["label_lower"]),
        field_b=section["field_t"],
        lattice=LatticeSpec(side_nm=section["side_nm"], a0_nm=section["a0_nm"]),
        time_grid_ms=times,
        n_configs=section["n_configs"],
        seed=config["run"]["seed"],
        r_max_nm=shells[section["shell"]],
        abundance=section["abundance"],
    )


def _echo_rows(curve):
    std = curve.std_of_mean
    if std is None:
        std = np.zeros_like(curve.amplitude)
    return zip(
        (float(t) for t in curve.times_ms),
        (float(a) for a in curve.amplitude),
        (float(s) for s in std),
    )


def cmd_cce(config, args) -> int:
    started = time.monotonic()
    params = _cce_params(config)
    curve = ensemble_echo(params, workers=config["run"]["workers"])
    path = _out_path(config, "echo.csv")
    _write_csv(path, ["time_ms", "amplitude", "std_of_mean"], _echo_rows(curve))
    extra: dict[str, Any] = {}
    code = 0
    if config["cce"]["fit"]:
        result = fit_echo_decay(curve.times_ms, curve.amplitude)
        extra["fit"] = _fit_result_payload(result)
        if not result.converged:
            code = 1
    _finish("cce", config, started, [path], extra)
    return code


def cmd_cce_converge(config, args) -> int:
    started = time.monotonic()
    params = _cce_params(config)
    section = config["converge"]
    a0 = config["cce"]["a0_nm"]
    third_nn = dataclasses.replace(params, r_max_nm=None).pair_cutoff_nm
    shells = {2: SECOND_NN_FACTOR * a0, 3: third_nn}
    for shell in section["shells"]:
        if shell not in shells:
            raise ConfigError("converge.shells: entries must be 2 or 3")
    resolved = [shells[shell] for shell in section["shells"]]
    study = convergence_study(params, list(section["sides_nm"]), resolved,
                              workers=config["run"]["workers"])
    paths = []
    for shell, r_max in zip(section["shells"], resolved):
        for side in section["sides_nm"]:
            curve = study.curves[(side, r_max)]
            path = _out_path(config, f"echo_side{side:g}_shell{shell}.csv")
            _write_csv(path, ["time_ms", "amplitude", "std_of_mean"], _echo_rows(curve))
            paths.append(path)
    distances = {
        str(shell): list(study.distances[r_max])
        for shell, r_max in zip(section["shells"], resolved)
    }
    _finish("cce-converge", config, started, paths, {"distances": distances})
    return 0


def _read_columns(path: str, names: tuple[str, ...]) -> dict[str, np.ndarray]:
    try:
        with open(path) as fh:
            lines = [line for line in fh if not line.startswith("#")]
        table = np.genfromtxt(lines, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError(f"cannot read input csv: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if table.dtype.names is None:
        raise ConfigError(f"{path}: no header row")
    for name in names:
        if name not in table.dtype.names:
            raise ConfigError(f"{path}: missing column {name}")
    columns = {name: np.atleast_1d(table[name]).astype(float) for name in names}
    for name, values in columns.items():
        if not np.all(np.isfinite(values)):
            raise ConfigError(f"{path}: column {name} has non-numeric entries")
    return columns


def _run_fit(config, fix_delta: float | None):
    """Dispatch on fit.model; returns (result, x, data, model_curve, x_name, y_name)."""
    section = config["fit"]
    if section["input_csv"] is None:
        raise ConfigError("fit.input_csv: required for the fit command")
    model = section["model"]
    if model == "echo_decay":
        data = _read_columns(section["input_csv"], ("time_ms", "amplitude"))
        x, y = data["time_ms"], data["amplitude"]
        result = fit_echo_decay(x, y, free_amplitude=section["free_amplitude"])
        p = result.params
        curve = echo_decay(x, p["amp"], p["T2_ms"], p["TS_ms"], p["n"])
        return result, x, y, curve, "time_ms", "amplitude"
    if model == "t1_raman_orbach":
        data = _read_columns(section["input_csv"], ("temp_k", "rate_per_s"))
        x, y = data["temp_k"], data["rate_per_s"]
        result = fit_t1_temperature(x, y, delta_fixed_k=fix_delta)
        p = result.params
        curve = t1_rate(x, p["P"], p["E"], p["Delta_K"])
        return result, x, y, curve, "temp_k", "rate_per_s"
    if model == "exp_recovery":
        data = _read_columns(section["input_csv"], ("time_ms", "magnetization"))
        x, y = data["time_ms"], data["magnetization"]
        result = fit_exp_recovery(x, y)
        p = result.params
        curve = exp_recovery(x, p["M0"], p["T1_ms"], p["offset"])
        return result, x, y, curve, "time_ms", "magnetization"
    if model == "gaussian_lines":
        data = _read_columns(section["input_csv"], ("field_t", "signal"))
        x, y = data["field_t"], data["signal"]
        result = fit_gaussian_lines(x, y, section["n_lines"], mode=section["mode"])
        p = result.params
        n_lines = section["n_lines"]
        centers = [p[f"center_{i}_mt"] for i in range(1, n_lines + 1)]
        fwhms = [p[f"fwhm_{i}_mt"] for i in range(1, n_lines + 1)]
        amps = [p[f"amp_{i}"] for i in range(1, n_lines + 1)]
        shape = gaussian_sum if section["mode"] == "absorption" else gaussian_derivative_sum
        curve = shape(x * 1e3, centers, fwhms, amps)
        return result, x, y, curve, "field_t", "signal"
    raise ConfigError(f"fit.model: unknown model {model!r}")


def cmd_fit(config, args) -> int:
    started = time.monotonic()
    fix_delta = args.fix_delta if args.fix_delta is not None else config["fit"]["fix_delta_k"]
    result, x, y, curve, x_name, y_name = _run_fit(config, fix_delta)
    json_path = _out_path(config, "fit.json")
    _write_json(json_path, _fit_result_payload(result))
    csv_path = _out_path(config, "fit_residual.csv")
    safe_curve = np.where(np.isfinite(curve), curve, np.nan)
    _write_csv(
        csv_path,
        [x_name, y_name, "model", "residual"],
        zip(
            (float(v) for v in x),
            (float(v) for v in y),
            (float(v) for v in safe_curve),
            (float(v) for v in (safe_curve - y)),
        ),
    )
    _finish("fit", config, started, [json_path, csv_path])
    return 0 if result.converged else 1


_COMMANDS = {
    "print-config": cmd_print_config,
    "levels": cmd_levels,
    "resonances": cmd_resonances,
    "freqmap": cmd_freqmap,
    "rabi": cmd_rabi,
    "cce": cmd_cce,
    "cce-converge": cmd_cce_converge,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="donorspin",
        description="Donor spin levels, spectra, bath decoherence, and fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="config file path")
        cmd.add_argument("--seed", type=int, default=None, help="override run.seed")
        cmd.add_argument("--workers", type=int, default=None, help="override run.workers")
        cmd.add_argument("--out", default=None, help="override run.out_dir")
        if name == "fit":
            cmd.add_argument(
                "--fix-delta", type=float, default=None, dest="fix_delta",
                help="hold the activation barrier (K) fixed",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config["run"]["seed"] = args.seed
        if args.workers is not None:
            config["run"]["workers"] = args.workers
        if args.out is not None:
            config["run"]["out_dir"] = args.out
        return _COMMANDS[args.command](config, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
