"""Command-line surface: spectra, gate optimization, angle scans and fits.

Configuration is a JSON file; ``{"defaults": "paper"}`` loads the KClO3
working point (28.1 MHz quadrupole coupling, 730 uT field, even-spacing
tilt angle).  All frequencies in config files are ordinary frequencies in
Hz; angular conversion happens internally.  Outputs are deterministic for
a fixed config and seed (CSV floats carry 12 significant digits).
"""

import argparse
import copy
import json
import sys as _sys
from pathlib import Path

import numpy as np

from .dynamics import AcquisitionConfig, equilibrium_reference
from .gates import (
    OptimizationConfig,
    calibrate_pi_half,
    load_sequence,
    optimize_gate,
    target_unitaries,
)
from .orientation import ThetaScanData, fit_orientation, theta_scan
from .pps import PpsLabel, operator_sum, prepare_pps
from .spinmodel import PAPER_B0_T, PAPER_NU_Q_HZ, SpinSystem, THETA_EVEN_SPACING

PAPER_DEFAULTS = {
    "system": {
        "nu_q_hz": PAPER_NU_Q_HZ,
        "b0_tesla": PAPER_B0_T,
        "theta_deg": float(np.degrees(THETA_EVEN_SPACING)),
        "gamma_hz_per_t": 4.176e6,
    },
    "acquisition": {"n_points": 4096, "dwell_s": 20e-6, "decay_time_s": 1e-3},
    "optimizer": {
        "n_segments": 4,
        "restarts": 30,
        "target_fidelity": 0.99,
        "rng_seed": 0,
    },
    "readout": {"omega1_hz": 15e3},
    "gate_dir": "gates",
}


def load_config(path) -> dict:
    with open(path) as fh:
        user = json.load(fh)
    cfg = {}
    if user.get("defaults") == "paper":
        cfg = copy.deepcopy(PAPER_DEFAULTS)
    elif "defaults" in user:
        raise ValueError(f"unknown defaults preset {user['defaults']!r}")
    for key, val in user.items():
        if key == "defaults":
            continue
        if isinstance(val, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(val)
        else:
            cfg[key] = val
    return cfg


def build_system(cfg: dict) -> SpinSystem:
    s = cfg["system"]
    has_b0 = "b0_tesla" in s
    has_nu0 = "nu_0_hz" in s
    if has_b0 == has_nu0:
        raise ValueError("config must give exactly one of b0_tesla / nu_0_hz")
    return SpinSystem.from_hz(
        nu_q_hz=s["nu_q_hz"],
        theta=np.radians(s["theta_deg"]),
        nu_0_hz=s.get("nu_0_hz"),
        b0_tesla=s.get("b0_tesla"),
        gamma_hz_per_t=s.get("gamma_hz_per_t", 4.176e6),
    )


def build_acquisition(cfg: dict) -> AcquisitionConfig:
    a = cfg.get("acquisition", {})
    return AcquisitionConfig(
        n_points=int(a.get("n_points", 4096)),
        dwell=float(a.get("dwell_s", 20e-6)),
        decay_time=float(a.get("decay_time_s", 1e-3)),
    )


def build_optimizer(cfg: dict, seed=None) -> OptimizationConfig:
    o = dict(cfg.get("optimizer", {}))
    if seed is not None:
        o["rng_seed"] = seed
    known = {f for f in OptimizationConfig.__dataclass_fields__}
    return OptimizationConfig(**{k: v for k, v in o.items() if k in known})


def _gate_path(cfg: dict, out_dir: Path, label: str) -> Path:
    gate_dir = Path(cfg.get("gate_dir", "gates"))
    if not gate_dir.is_absolute():
        gate_dir = out_dir / gate_dir
    return gate_dir / f"{label}.json"


def _load_gates(cfg, out_dir, labels):
    gates = {}
    for label in labels:
        if label == "identity":
            continue
        path = _gate_path(cfg, out_dir, label)
        if not path.exists():
            raise FileNotFoundError(
                f"missing persisted sequence for gate '{label}' (expected {path})"
            )
        gates[label] = load_sequence(path)
    return gates


def _reading_pulse(cfg, sys_, acq, out_dir):
    path = _gate_path(cfg, out_dir, "pi_half")
    if path.exists():
        return load_sequence(path)
    omega1 = 2 * np.pi * float(cfg.get("readout", {}).get("omega1_hz", 15e3))
    return calibrate_pi_half(sys_, omega1, acq)


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    sys_ = build_system(cfg)
    acq = build_acquisition(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pi_half = _reading_pulse(cfg, sys_, acq, out_dir)
    circuit = [g for g in (args.circuit.split(",") if args.circuit else []) if g]

    reference = equilibrium_reference(sys_, pi_half, acq)
    if args.state == "equilibrium":
        if circuit:
            print("error: circuits apply to pps states only", file=_sys.stderr)
            return 2
        from .dynamics import apply, fid_trace, propagate, spectrum as spec_of
        from .spinmodel import equilibrium_deviation

        rho = apply(equilibrium_deviation(sys_), propagate(sys_, pi_half))
        spec = spec_of(fid_trace(sys_, rho, acq, phi=pi_half.common_phi()), acq)
        spec.to_csv(out_dir / "spectrum.csv")
        amps = reference
        amps.to_json(out_dir / "amplitudes.json")
        print(f"equilibrium spectrum written to {out_dir}/spectrum.csv; "
              f"normalized amplitudes {np.round(amps.normalized, 6).tolist()}")
        return 0

    if not args.state.startswith("pps:"):
        print(f"error: unknown state {args.state!r} (use equilibrium or pps:00..11)",
              file=_sys.stderr)
        return 2
    try:
        label = PpsLabel(args.state.split(":", 1)[1])
    except ValueError:
        print(f"error: unknown pps label {args.state!r}", file=_sys.stderr)
        return 2
    needed = [g for g in operator_sum(label) + circuit if g != "identity"]
    try:
        gates = _load_gates(cfg, out_dir, needed)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    record = prepare_pps(sys_, label, gates, pi_half, acq,
                         circuit=tuple(circuit), reference=reference)
    record.summed_spectrum.to_csv(out_dir / "spectrum.csv")
    record.amplitudes.to_json(out_dir / "amplitudes.json")
    record.to_json(out_dir / "report.json")
    print(f"{record.label} circuit={circuit or '-'} amplitudes "
          f"{np.round(record.amplitudes.normalized, 4).tolist()} "
          f"deviation {record.deviation:.4f}")
    return 0


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    sys_ = build_system(cfg)
    targets = target_unitaries()
    if args.gate not in targets:
        print(f"error: unknown gate {args.gate!r}; choose from {sorted(targets)}",
              file=_sys.stderr)
        return 2
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    opt_cfg = build_optimizer(cfg, seed=args.seed)
    result = optimize_gate(sys_, targets[args.gate], opt_cfg)
    path = _gate_path(cfg, out_dir, args.gate)
    path.parent.mkdir(parents=True, exist_ok=True)
    result.save(path)
    print(f"{args.gate}: fidelity {result.fidelity:.6f} "
          f"duration {result.sequence.total_duration * 1e6:.2f} us -> {path}")
    return 0 if result.met_target else 1


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    sys_ = build_system(cfg)
    acq = build_acquisition(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    omega1 = 2 * np.pi * float(cfg.get("readout", {}).get("omega1_hz", 15e3))
    seq = calibrate_pi_half(sys_, omega1, acq)
    path = _gate_path(cfg, out_dir, "pi_half")
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"label": "pi_half", "segments": [s.to_dict() for s in seq.segments],
               "fidelity": None, "seed": None}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"pi/2 pulse: {seq.segments[0].duration * 1e6:.2f} us at "
          f"{seq.segments[0].omega_1 / (2 * np.pi) / 1e3:.1f} kHz -> {path}")
    return 0


def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    sys_ = build_system(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    thetas = np.radians(np.arange(args.theta_start, args.theta_stop + args.theta_step / 2,
                                  args.theta_step))
    data = theta_scan(sys_, thetas)
    path = out_dir / "theta_scan.csv"
    data.to_csv(path)
    print(f"{len(thetas)} angles -> {path}")
    return 0


def cmd_fit(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        data = ThetaScanData.from_csv(args.data)
        fit = fit_orientation(data)
    except ValueError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    path = out_dir / "orientation_fit.json"
    with open(path, "w") as fh:
        json.dump(fit.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"nu_q {fit.nu_q_hz:.6g} Hz, nu_0 {fit.nu_0_hz:.6g} Hz, "
          f"offset {np.degrees(fit.theta_offset):.4f} deg, "
          f"rms {fit.rms_residual_hz:.3g} Hz -> {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="znqr",
        description="Zeeman-perturbed NQR simulator and pulse optimizer",
    )
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="optimizer RNG seed override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="simulate a readout spectrum")
    p.add_argument("--state", default="equilibrium",
                   help="equilibrium or pps:<00|01|10|11>")
    p.add_argument("--circuit", default="",
                   help="comma-separated gate labels applied before readout")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("optimize", help="optimize a gate pulse sequence")
    p.add_argument("--gate", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("calibrate", help="calibrate the pi/2 reading pulse")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("scan", help="line frequencies versus tilt angle")
    p.add_argument("--theta-start", type=float, default=0.0)
    p.add_argument("--theta-stop", type=float, default=180.0)
    p.add_argument("--theta-step", type=float, default=1.0)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fit", help="fit couplings to a theta-scan CSV")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_fit)

    args = parser.parse_args(argv)
    if args.command != "fit" and args.config is None:
        parser.error("--config is required for this command")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
