"""Command-line front end: resolve a run configuration, run, write artifacts.

Configuration values use ordinary frequencies in Hz (``*_hz`` keys) and times
in seconds or microseconds (``*_s`` / ``*_us`` keys); the single factor of
2 pi is applied at parse time so the numerical core works in angular units
throughout.  Flag values override file values, file values override the
embedded defaults, and the fully resolved configuration is echoed into every
JSON summary so a run can be reproduced from its own output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import coupling, spectator
from .errors import (
    ConfigError,
    DegeneratePulseError,
    DomainError,
    FitError,
    StrongCouplingError,
    TruncationError,
    UnidentifiableError,
)
from .experiments import (
    IDEAL_TRUTH_TABLE,
    run_fringe_scan,
    run_rabi_scan,
    run_truth_table,
)
from .fitting import fit_double_sine_decay, fit_fringe
from .pulses import NoiseConfig, pulses_from_json
from .readout import (
    CountHistogram,
    DetectorModel,
    estimate_from_references,
    estimate_p_down,
    expected_sigma,
    simulate_histogram,
)

DEFAULT_CONFIG = {
    "omega_z_hz": 3.4e6,
    "omega_00_hz": 92e3,
    "target_ratio": 4.0 / 3.0,
    "eta": None,
    "tau_us": 170.0,
    "prep_error": 0.0,
    "lambda_bright": 30.0,
    "lambda_dark": 2.0,
    "shots": 200,
    "n_max": 20,
    "seed": None,
    "outdir": ".",
}

_RUNTIME_ERRORS = (
    DomainError,
    TruncationError,
    StrongCouplingError,
    DegeneratePulseError,
    UnidentifiableError,
    FitError,
)

_DURATION_UNITS = {"ns": 1e-9, "us": 1e-6, "ms": 1e-3, "s": 1.0}


def parse_duration(text: str) -> float:
    """Parse a duration like '150us', '1.5ms' or '2e-6s' into seconds."""
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*(ns|us|ms|s)\s*", str(text))
    if not m:
        raise ConfigError(f"cannot parse duration {text!r}; use e.g. 150us, 1.5ms, 2e-6s")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ConfigError(f"cannot parse duration {text!r}") from None
    if value < 0:
        raise ConfigError("durations must be non-negative")
    return value * _DURATION_UNITS[m.group(2)]


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if isinstance(data, dict) and "config" in data and "subcommand" in data:
        data = data["config"]  # accept a previous run's JSON summary directly
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def resolve_config(file_values: dict | None, flag_values: dict) -> dict:
    """Merge defaults, file values, and flag overrides; validate the result."""
    cfg = dict(DEFAULT_CONFIG)
    for layer in (file_values or {}, flag_values):
        known = set(DEFAULT_CONFIG) | {"tau_s"}
        for key, value in layer.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            if key == "eta":
                cfg["eta"] = float(value)
                if "target_ratio" not in layer or layer.get("target_ratio") is None:
                    cfg["target_ratio"] = None
            elif key == "tau_s":
                cfg["tau_us"] = float(value) * 1e6
            else:
                cfg[key] = value
    if (cfg["eta"] is None) == (cfg["target_ratio"] is None):
        raise ConfigError("exactly one of eta / target_ratio must be set")
    for key in ("omega_z_hz", "omega_00_hz", "lambda_bright"):
        if not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if cfg["lambda_dark"] < 0:
        raise ConfigError("lambda_dark must be non-negative")
    if cfg["tau_us"] is not None and not cfg["tau_us"] > 0:
        raise ConfigError("tau_us must be positive (omit for an ideal run)")
    if int(cfg["shots"]) < 1:
        raise ConfigError("shots must be at least 1")
    cfg["shots"] = int(cfg["shots"])
    cfg["n_max"] = int(cfg["n_max"])
    if cfg["seed"] is not None:
        cfg["seed"] = int(cfg["seed"])
    return cfg


def build_model(cfg: dict) -> coupling.CouplingModel:
    eta = cfg["eta"] if cfg["eta"] is not None else coupling.eta_for_ratio(cfg["target_ratio"])
    try:
        return coupling.CouplingModel.from_carrier_rate(
            omega_z=2.0 * math.pi * cfg["omega_z_hz"],
            eta=eta,
            omega_00=2.0 * math.pi * cfg["omega_00_hz"],
            n_max=cfg["n_max"],
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def build_noise(cfg: dict, ideal: bool) -> NoiseConfig | None:
    if ideal:
        return None
    tau = math.inf if cfg["tau_us"] is None else cfg["tau_us"] * 1e-6
    noise = NoiseConfig(tau=tau, prep_error=float(cfg["prep_error"]))
    return None if noise.is_ideal else noise


def build_detector(cfg: dict) -> DetectorModel:
    return DetectorModel(lambda_bright=cfg["lambda_bright"], lambda_dark=cfg["lambda_dark"])


def _check_seed(cfg: dict, ideal: bool):
    if not ideal and cfg["seed"] is None:
        raise ConfigError("--seed is required for stochastic runs (or pass --ideal)")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_summary(path: Path, subcommand: str, cfg: dict, results: dict) -> None:
    # output location is not part of the physics configuration, so identical
    # runs into different directories produce byte-identical summaries
    echo = {k: v for k, v in cfg.items() if k != "outdir"}
    doc = {"subcommand": subcommand, "config": echo, "results": results}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _fit_params_dict(fit) -> dict:
    return {
        name: {"estimate": est, "sigma": sig} for name, (est, sig) in sorted(fit.params.items())
    }


def _outpaths(cfg: dict, args, stem: str) -> tuple[Path, Path]:
    outdir = Path(getattr(args, "outdir", None) or cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    csv_name = getattr(args, "out_csv", None) or f"{stem}.csv"
    json_name = getattr(args, "out_json", None) or f"{stem}.json"
    return outdir / csv_name, outdir / json_name


def _common_config_flags(args) -> dict:
    flags = {
        "omega_z_hz": args.omega_z_hz,
        "omega_00_hz": args.omega_00_hz,
        "eta": args.eta,
        "target_ratio": args.target_ratio,
        "prep_error": args.prep_error,
        "lambda_bright": args.lambda_bright,
        "lambda_dark": args.lambda_dark,
        "shots": args.shots,
        "n_max": args.n_max,
        "seed": args.seed,
        "outdir": args.outdir,
    }
    if args.tau_us is not None:
        flags["tau_us"] = args.tau_us
    return flags


def _resolve(args) -> dict:
    file_values = load_config_file(args.config) if args.config else None
    return resolve_config(file_values, _common_config_flags(args))


def cmd_truth_table(args) -> int:
    cfg = _resolve(args)
    _check_seed(cfg, args.ideal)
    model = build_model(cfg)
    rows = run_truth_table(
        model,
        noise=build_noise(cfg, args.ideal),
        det=build_detector(cfg),
        shots=cfg["shots"],
        seed=cfg["seed"],
        bypass_readout=args.ideal,
    )
    csv_path, json_path = _outpaths(cfg, args, "truth_table")
    write_csv(csv_path, ["input", "p_down", "sigma"], rows)
    results = {
        "table": [{"input": r[0], "p_down": r[1], "sigma": r[2]} for r in rows],
        "ideal_pattern": list(IDEAL_TRUTH_TABLE),
    }
    write_summary(json_path, "truth-table", cfg, results)
    cells = " ".join(f"{name}={p:.3f}" for name, p, _ in rows)
    print(f"truth table P_down: {cells} (ideal pattern 1, 0, 0, 1)")
    return 0


def cmd_rabi_scan(args) -> int:
    cfg = _resolve(args)
    _check_seed(cfg, args.ideal)
    model = build_model(cfg)
    tmax = parse_duration(args.tmax)
    step = parse_duration(args.step)
    if step <= 0:
        raise ConfigError("--step must be positive")
    times = np.arange(0.0, tmax + 0.5 * step, step)
    override = None
    if args.prep_pulses:
        override = pulses_from_json(Path(args.prep_pulses).read_text())
    curve = run_rabi_scan(
        model,
        times,
        noise=build_noise(cfg, args.ideal),
        det=build_detector(cfg),
        shots=cfg["shots"],
        seed=cfg["seed"],
        bypass_readout=args.ideal,
        prep_pulses_override=override,
    )
    csv_path, json_path = _outpaths(cfg, args, "rabi_scan")
    write_csv(csv_path, ["time_s", "p_down", "sigma"], curve.rows())
    results = {"points": len(times), "gate_time_s": model.gate_time()}
    summary = f"rabi scan: {len(times)} points to {tmax * 1e6:g} us"
    beats = (times[-1] - times[0]) * (model.rabi_element(0, 0) - model.rabi_element(2, 2)) / math.pi
    if len(times) >= 30 and beats >= 3.0 and override is None:
        fit = fit_double_sine_decay(curve)
        results["fit"] = _fit_params_dict(fit)
        ratio, sratio = fit.params["ratio"]
        tau, stau = fit.params["tau"]
        summary = (
            f"rabi scan fit: ratio = {ratio:.4f} +/- {sratio:.4f}, "
            f"tau = {tau * 1e6:.1f} +/- {stau * 1e6:.1f} us"
        )
    write_summary(json_path, "rabi-scan", cfg, results)
    print(summary)
    return 0


def cmd_fringe_scan(args) -> int:
    cfg = _resolve(args)
    _check_seed(cfg, args.ideal)
    model = build_model(cfg)
    if args.points < 8:
        raise ConfigError("--points must be at least 8")
    phases = np.linspace(0.0, 2.0 * math.pi, args.points, endpoint=False)
    curve = run_fringe_scan(
        model,
        phases,
        coherent=not args.incoherent,
        noise=build_noise(cfg, args.ideal),
        det=build_detector(cfg),
        shots=cfg["shots"],
        seed=cfg["seed"],
        bypass_readout=args.ideal,
    )
    fit = fit_fringe(curve)
    csv_path, json_path = _outpaths(cfg, args, "fringe_scan")
    write_csv(csv_path, ["phase_rad", "p_down", "sigma"], curve.rows())
    results = {"coherent": not args.incoherent, "fit": _fit_params_dict(fit)}
    write_summary(json_path, "fringe-scan", cfg, results)
    c, sc = fit.params["contrast"]
    mode = "incoherent" if args.incoherent else "coherent"
    print(f"fringe scan ({mode}): contrast = {c:.4f} +/- {sc:.4f}")
    return 0


def cmd_stark(args) -> int:
    cfg = _resolve(args)
    model = build_model(cfg)
    rows = spectator.shift_table(model, max_n=args.levels)
    csv_path, json_path = _outpaths(cfg, args, "stark")
    write_csv(
        csv_path,
        ["level", "shift_pert", "shift_exact", "rel_err"],
        [(r["level"], r["shift_pert"], r["shift_exact"], r["rel_err"]) for r in rows],
    )
    diff = max(
        abs(
            spectator.perturbative_shift(model, "up", r["level"])
            - spectator.perturbative_shift(model, "down", r["level"])
        )
        for r in rows
    )
    worst = max(r["rel_err"] for r in rows)
    results = {"table": rows, "max_rel_err": worst, "max_differential_shift": diff}
    write_summary(json_path, "stark", cfg, results)
    print(
        f"stark shifts for n <= {rows[-1]['level']}: differential shift = {diff:g}, "
        f"max |pert-exact| relative error = {worst:.3e}"
    )
    return 0


def cmd_leakage(args) -> int:
    cfg = _resolve(args)
    model = build_model(cfg)
    try:
        speeds = [float(s) for s in args.speeds.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse --speeds {args.speeds!r}") from None
    if len(speeds) < 2:
        raise ConfigError("--speeds needs at least two values")
    pairs = spectator.leakage_scan(model, speeds)
    exponent, prefactor = spectator.fit_power_law(
        [s for s, _ in pairs], [l for _, l in pairs]
    )
    csv_path, json_path = _outpaths(cfg, args, "leakage")
    write_csv(csv_path, ["speed", "leakage"], pairs)
    results = {
        "scan": [{"speed": s, "leakage": l} for s, l in pairs],
        "power_law_exponent": exponent,
        "power_law_prefactor": prefactor,
    }
    write_summary(json_path, "leakage", cfg, results)
    print(
        f"leakage power-law exponent = {exponent:.2f} over speeds "
        f"{speeds[0]:g}..{speeds[-1]:g}"
    )
    return 0


def load_histogram(path: str) -> CountHistogram:
    """Read a histogram from a (bin,count) CSV or a JSON dict."""
    try:
        text = Path(path).read_text()
        if path.endswith(".json"):
            return CountHistogram.from_json_dict(json.loads(text))
        rows = list(csv.reader(text.splitlines()))
        if rows and rows[0] and not rows[0][0].isdigit():
            rows = rows[1:]  # header
        return CountHistogram.from_pairs([(int(b), int(c)) for b, c in rows])
    except (OSError, ValueError, KeyError, DomainError) as exc:
        raise ConfigError(f"cannot read histogram file {path}: {exc}") from exc


def cmd_readout_calib(args) -> int:
    cfg = _resolve(args)
    _check_seed(cfg, ideal=False)
    det = build_detector(cfg)
    if not 0.0 <= args.p_true <= 1.0:
        raise ConfigError("--p-true must lie in [0, 1]")
    children = np.random.SeedSequence(cfg["seed"]).spawn(3)
    ref_bright = simulate_histogram(1.0, cfg["shots"], det, children[0])
    ref_dark = simulate_histogram(0.0, cfg["shots"], det, children[1])
    if args.hist:
        test = load_histogram(args.hist)
    else:
        test = simulate_histogram(args.p_true, cfg["shots"], det, children[2])
    p_par, s_par = estimate_p_down(test, det)
    p_ref, s_ref = estimate_from_references(test, ref_bright, ref_dark)
    outdir = Path(args.outdir or cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    for name, hist in (("bright", ref_bright), ("dark", ref_dark), ("test", test)):
        write_csv(outdir / f"readout_{name}.csv", ["bin", "count"], hist.to_pairs())
    results = {
        "p_true": None if args.hist else args.p_true,
        "parametric": {"estimate": p_par, "sigma": s_par},
        "reference_based": {"estimate": p_ref, "sigma": s_ref},
        "expected_sigma": expected_sigma(args.p_true, cfg["shots"], det),
        "histograms": {
            "bright": ref_bright.to_json_dict(),
            "dark": ref_dark.to_json_dict(),
            "test": test.to_json_dict(),
        },
    }
    write_summary(outdir / (args.out_json or "readout_calib.json"), "readout-calib", cfg, results)
    source = f"histogram {args.hist}" if args.hist else f"p = {args.p_true:g}"
    print(
        f"readout calibration at {source}: parametric {p_par:.4f} +/- {s_par:.4f}, "
        f"reference-based {p_ref:.4f} +/- {s_ref:.4f}"
    )
    return 0


def _add_common_flags(sub):
    sub.add_argument("--config", help="JSON config file (or a previous run's summary)")
    sub.add_argument("--seed", type=int, help="master seed for simulated readout")
    sub.add_argument("--shots", type=int, help="detection shots per data point")
    sub.add_argument("--n-max", dest="n_max", type=int, help="Fock-space truncation")
    sub.add_argument("--omega-z-hz", dest="omega_z_hz", type=float, help="trap frequency in Hz")
    sub.add_argument(
        "--omega-00-hz", dest="omega_00_hz", type=float, help="n=0 carrier Rabi rate in Hz"
    )
    sub.add_argument("--eta", type=float, help="Lamb-Dicke parameter (excludes --target-ratio)")
    sub.add_argument(
        "--target-ratio", dest="target_ratio", type=float,
        help="carrier ratio used to solve for eta (excludes --eta)",
    )
    sub.add_argument("--tau-us", dest="tau_us", type=float, help="contrast decay constant in us")
    sub.add_argument("--prep-error", dest="prep_error", type=float, help="prep spin-flip probability")
    sub.add_argument("--lambda-bright", dest="lambda_bright", type=float, help="bright mean counts")
    sub.add_argument("--lambda-dark", dest="lambda_dark", type=float, help="dark mean counts")
    sub.add_argument("--outdir", help="directory for CSV/JSON artifacts")
    sub.add_argument("--out-csv", dest="out_csv", help="CSV file name inside outdir")
    sub.add_argument("--out-json", dest="out_json", help="JSON summary file name inside outdir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iongate",
        description="Simulate a trapped-ion spin-motion register and its conditional gate.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    p = subparsers.add_parser("truth-table", help="gate output for the four basis inputs")
    _add_common_flags(p)
    p.add_argument("--ideal", action="store_true", help="no noise, exact populations")
    p.set_defaults(func=cmd_truth_table)

    p = subparsers.add_parser("rabi-scan", help="drive the carrier for increasing durations")
    _add_common_flags(p)
    p.add_argument("--ideal", action="store_true", help="no noise, exact populations")
    p.add_argument("--tmax", default="150us", help="scan end time (e.g. 150us)")
    p.add_argument("--step", default="1us", help="scan step (e.g. 1us)")
    p.add_argument(
        "--prep-pulses", dest="prep_pulses",
        help="JSON pulse-sequence file replacing the default preparation",
    )
    p.set_defaults(func=cmd_rabi_scan)

    p = subparsers.add_parser("fringe-scan", help="interferometric phase scan of gate coherence")
    _add_common_flags(p)
    p.add_argument("--ideal", action="store_true", help="no noise, exact populations")
    p.add_argument("--points", type=int, default=16, help="phases per period")
    p.add_argument(
        "--incoherent", action="store_true",
        help="replace the post-gate state by the fully dephased mixture",
    )
    p.set_defaults(func=cmd_fringe_scan)

    p = subparsers.add_parser("stark", help="perturbative vs exact level-shift table")
    _add_common_flags(p)
    p.add_argument("--levels", type=int, default=8, help="largest Fock level in the table")
    p.set_defaults(func=cmd_stark)

    p = subparsers.add_parser("leakage", help="gate leakage vs drive speed")
    _add_common_flags(p)
    p.add_argument(
        "--speeds", default="0.005,0.01,0.02,0.04,0.08",
        help="comma-separated Omega_00/omega_z values",
    )
    p.set_defaults(func=cmd_leakage)

    p = subparsers.add_parser("readout-calib", help="reference histograms and estimator check")
    _add_common_flags(p)
    p.add_argument("--p-true", dest="p_true", type=float, default=0.5, help="simulated bright fraction")
    p.add_argument("--hist", help="estimate this histogram file (CSV bin,count or JSON) instead of simulating")
    p.set_defaults(func=cmd_readout_calib)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
