"""Command-line front end for reproducible batch experiments.

Subcommands wire the library into file-based pipelines: simulate, identify,
table3, actnet (gen-data | train | eval), dr (sample | check-damping), and
gait. Every command is deterministic under its recorded manifest; all
randomness flows from explicit --seed flags. Exit codes: 0 success,
1 runtime/numerical failure, 2 usage or validation error.

FRICTIONLAB_THREADS caps internal parallelism (multi-start identification);
it can change wall time, never output bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from decimal import ROUND_DOWN, Decimal

import numpy as np

from frictionlab import __version__
from frictionlab.actuator_net import (ActuatorNetModel, build_windows, evaluate,
                                      merge_datasets, mixture_target, train)
from frictionlab.domain_rand import (RandomizationConfig, damping_equivalence_check,
                                     sample)
from frictionlab.errors import FrictionLabError, InvalidInputError
from frictionlab.gait import read_contact_csv, reward_series, reward_series_to_json
from frictionlab.joint import JointParams, JointState, simulate
from frictionlab.manifest import ExperimentManifest, manifest_path
from frictionlab.sysid import (Excitation, FixedGains, add_angle_noise, friction_ratio,
                               identify)
from frictionlab.trajectory import Trajectory

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _require_file(path: str) -> str:
    if not os.path.isfile(path):
        raise InvalidInputError(f"input file not found: {path}")
    return path


def _workers() -> int:
    raw = os.environ.get("FRICTIONLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_manifest(command: str, inputs, outputs, seed, options) -> None:
    manifest = ExperimentManifest.build(command, __version__, inputs, outputs,
                                        seed, options)
    for out in outputs:
        manifest.write(manifest_path(out))


def _dump_json(path: str, payload) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def two_sig_digits_down(value: float) -> str:
    """Format with exactly two significant digits, truncating toward zero.

    The published friction/torque ratios are truncations (0.1353 -> 0.13),
    so reproducing them verbatim requires ROUND_DOWN, not round-half-up.
    """
    if value == 0.0:
        return "0.0"
    d = Decimal(repr(value))
    shift = d.adjusted()  # exponent of the leading significant digit
    quantum = Decimal(1).scaleb(shift - 1)
    return str(d.quantize(quantum, rounding=ROUND_DOWN))


# ----------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    params = JointParams.from_json(_require_file(args.params))
    exc = Excitation(args.A, args.omega, args.duration, args.dt)
    traj = simulate(params, lambda t: exc.amplitude * math.sin(exc.omega * t),
                    exc.duration, exc.dt,
                    initial=JointState(args.theta0, args.thetadot0))
    if args.noise_sigma > 0.0:
        traj = add_angle_noise(traj, args.noise_sigma, args.seed)
    traj.to_csv(args.out)
    _write_manifest("simulate", [args.params], [args.out], args.seed, {
        "A": args.A, "omega": args.omega, "duration": args.duration, "dt": args.dt,
        "theta0": args.theta0, "thetadot0": args.thetadot0,
        "noise_sigma": args.noise_sigma, "params": args.params, "out": args.out,
    })
    print(f"wrote {len(traj)} rows to {args.out}")
    return 0


def _cmd_identify(args) -> int:
    traj = Trajectory.from_csv(_require_file(args.traj))
    fixed_params = JointParams.from_json(_require_file(args.fixed))
    fixed = FixedGains.from_joint_params(fixed_params)
    exc = Excitation(args.A, args.omega, duration=(len(traj) - 1) * traj.dt, dt=traj.dt)
    try:
        guess = tuple(float(v) for v in args.guess.split(","))
    except ValueError as err:
        raise InvalidInputError(f"--guess must be three numbers I,B,bc: {args.guess!r}") from err
    if len(guess) != 3:
        raise InvalidInputError("--guess must be I,B,bc")
    result = identify(traj, fixed, exc, starts=args.starts, seed=args.seed,
                      initial_guess=guess, workers=_workers())
    _dump_json(args.out, result.to_dict())
    _write_manifest("identify", [args.traj, args.fixed], [args.out], args.seed, {
        "A": args.A, "omega": args.omega, "starts": args.starts,
        "guess": args.guess, "traj": args.traj, "fixed": args.fixed, "out": args.out,
    })
    print(f"identified I={result.inertia_I:.6g} B={result.viscous_B:.6g} "
          f"b_c={result.coulomb_bc:.6g} (objective {result.objective_value:.3e}, "
          f"converged={result.converged})")
    return 0


def _cmd_table3(args) -> int:
    rows = []
    for path in args.params:
        with open(_require_file(path), "r", encoding="ascii") as f:
            raw = json.load(f)
        name = raw.get("name", os.path.splitext(os.path.basename(path))[0])
        try:
            bc = float(raw["coulomb_bc"])
            tau_max = float(raw["tau_max"])
        except KeyError as exc:
            raise InvalidInputError(f"{path} missing field {exc.args[0]!r}") from exc
        ratio = friction_ratio(bc, tau_max)
        rows.append({
            "motor": name,
            "inertia_I": raw.get("inertia_I"),
            "viscous_B": raw.get("viscous_B"),
            "coulomb_bc": bc,
            "tau_max": tau_max,
            "ratio_percent": ratio,
            "ratio_display": two_sig_digits_down(ratio),
        })
    header = f"{'Motor':<16}{'Inertia':>10}{'Viscous':>10}{'Static f':>10}{'tau_max':>9}{'f/tau_max':>11}"
    print(header)
    print("-" * len(header))
    for r in rows:
        inertia = "-" if r["inertia_I"] is None else f"{r['inertia_I']:.4g}"
        viscous = "-" if r["viscous_B"] is None else f"{r['viscous_B']:.4g}"
        print(f"{r['motor']:<16}{inertia:>10}{viscous:>10}"
              f"{r['coulomb_bc']:>10.4g}{r['tau_max']:>9.4g}{r['ratio_display']:>10}%")
    if args.out:
        _dump_json(args.out, {"rows": rows})
        _write_manifest("table3", list(args.params), [args.out], None,
                        {"params": list(args.params), "out": args.out})
    return 0


def _cmd_actnet_gen_data(args) -> int:
    params = JointParams.from_json(_require_file(args.params))
    target = mixture_target(args.seed, components=args.components,
                            omega_min=args.omega_min, omega_max=args.omega_max,
                            accel_min=args.accel_min, accel_max=args.accel_max)
    traj = simulate(params, target, args.duration, args.dt)
    traj.to_csv(args.out)
    _write_manifest("actnet gen-data", [args.params], [args.out], args.seed, {
        "components": args.components, "omega_min": args.omega_min,
        "omega_max": args.omega_max, "accel_min": args.accel_min,
        "accel_max": args.accel_max, "duration": args.duration, "dt": args.dt,
        "params": args.params, "out": args.out,
    })
    print(f"wrote {len(traj)} rows to {args.out}")
    return 0


def _cmd_actnet_train(args) -> int:
    datasets = [build_windows(Trajectory.from_csv(_require_file(p)), args.history)
                for p in args.data]
    data = merge_datasets(datasets)
    model, holdout_loss = train(data, epochs=args.epochs, batch_size=args.batch,
                                learning_rate=args.lr, momentum=args.momentum,
                                seed=args.seed, hidden=(args.hidden, args.hidden))
    model.to_json(args.out)
    outputs = [args.out]
    if args.metrics:
        mse, r2 = evaluate(model, data)
        _dump_json(args.metrics, {"holdout_mse": holdout_loss, "train_mse": mse,
                                  "train_r2": r2, "samples": len(data)})
        outputs.append(args.metrics)
    _write_manifest("actnet train", list(args.data), outputs, args.seed, {
        "history": args.history, "hidden": args.hidden, "epochs": args.epochs,
        "batch": args.batch, "lr": args.lr, "momentum": args.momentum,
        "data": list(args.data), "out": args.out, "metrics": args.metrics,
    })
    print(f"trained on {len(data)} windows, held-out MSE {holdout_loss:.6g}")
    return 0


def _cmd_actnet_eval(args) -> int:
    model = ActuatorNetModel.from_json(_require_file(args.model))
    datasets = [build_windows(Trajectory.from_csv(_require_file(p)), args.history)
                for p in args.data]
    data = merge_datasets(datasets)
    mse, r2 = evaluate(model, data)
    _dump_json(args.out, {"mse": mse, "r2": r2, "samples": len(data)})
    _write_manifest("actnet eval", [args.model, *args.data], [args.out], None, {
        "history": args.history, "model": args.model, "data": list(args.data),
        "out": args.out,
    })
    print(f"MSE {mse:.6g}  R2 {r2:.6g} over {len(data)} windows")
    return 0


def _cmd_dr_sample(args) -> int:
    config = RandomizationConfig.from_json(_require_file(args.config))
    nominal = JointParams.from_json(_require_file(args.nominal))
    samples = [sample(config, nominal, seed=args.seed + i).to_dict()
               for i in range(args.n)]
    _dump_json(args.out, {"samples": samples})
    _write_manifest("dr sample", [args.config, args.nominal], [args.out], args.seed,
                    {"n": args.n, "config": args.config, "nominal": args.nominal,
                     "out": args.out})
    print(f"wrote {args.n} samples to {args.out}")
    return 0


def _cmd_dr_check_damping(args) -> int:
    p1 = JointParams.from_json(_require_file(args.p1))
    p2 = JointParams.from_json(_require_file(args.p2))
    diff = damping_equivalence_check(
        p1, p2, lambda t: args.A * math.sin(args.omega * t), args.duration, args.dt)
    total1 = p1.viscous_B + p1.motor_strength_k * p1.kd
    total2 = p2.viscous_B + p2.motor_strength_k * p2.kd
    report = {"max_angle_difference_rad": diff,
              "total_damping_1": total1, "total_damping_2": total2,
              "on_equivalence_manifold": total1 == total2}
    if args.out:
        _dump_json(args.out, report)
        _write_manifest("dr check-damping", [args.p1, args.p2], [args.out], None, {
            "A": args.A, "omega": args.omega, "duration": args.duration,
            "dt": args.dt, "p1": args.p1, "p2": args.p2, "out": args.out,
        })
    print(f"max |angle difference| = {diff!r} rad "
          f"(total damping {total1!r} vs {total2!r})")
    return 0


def _cmd_gait(args) -> int:
    frames = read_contact_csv(_require_file(args.contacts))
    report = reward_series(frames, horizon=args.history)
    reward_series_to_json(args.out, report)
    _write_manifest("gait", [args.contacts], [args.out], None, {
        "history": args.history, "contacts": args.contacts, "out": args.out,
    })
    on_trot = sum(report["r_trot"])
    print(f"{len(frames)} frames, r_trot=1 on {on_trot} of them")
    return 0


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frictionlab",
        description="Joint friction simulation, identification, and randomization toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate sinusoidal PD tracking to CSV")
    p.add_argument("--params", required=True, help="joint parameters JSON")
    p.add_argument("--A", type=float, default=0.5, help="excitation amplitude, rad")
    p.add_argument("--omega", type=float, default=2.0 * math.pi, help="excitation frequency, rad/s")
    p.add_argument("--duration", type=float, required=True, help="simulated time, s")
    p.add_argument("--dt", type=float, default=1e-3, help="integration step, s")
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--thetadot0", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="Gaussian angle noise added to the recorded theta column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output trajectory CSV")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("identify", help="identify (I, B, b_c) from a trajectory CSV")
    p.add_argument("--traj", required=True, help="measured trajectory CSV")
    p.add_argument("--fixed", required=True, help="JSON with fixed k_motor/kp/kd/tau_max")
    p.add_argument("--A", type=float, default=0.5)
    p.add_argument("--omega", type=float, default=2.0 * math.pi)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guess", default="0.01,0.05,0.1", help="initial I,B,bc guess")
    p.add_argument("--out", required=True, help="identification result JSON")
    p.set_defaults(fn=_cmd_identify)

    p = sub.add_parser("table3", help="friction/torque ratio table from params JSONs")
    p.add_argument("params", nargs="+", help="joint parameter JSON files")
    p.add_argument("--out", help="optional JSON output")
    p.set_defaults(fn=_cmd_table3)

    actnet = sub.add_parser("actnet", help="actuator torque regressor pipeline")
    actsub = actnet.add_subparsers(dest="actnet_command", required=True)

    p = actsub.add_parser("gen-data", help="synthesize a mixture-of-sines trajectory")
    p.add_argument("--params", required=True)
    p.add_argument("--components", type=int, default=4)
    p.add_argument("--omega-min", type=float, default=2.5 * math.pi)
    p.add_argument("--omega-max", type=float, default=5.0 * math.pi)
    p.add_argument("--accel-min", type=float, default=10.0)
    p.add_argument("--accel-max", type=float, default=40.0)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_actnet_gen_data)

    p = actsub.add_parser("train", help="train the torque regressor on trajectory CSVs")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--history", type=int, default=3)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--metrics", help="optional metrics JSON")
    p.set_defaults(fn=_cmd_actnet_train)

    p = actsub.add_parser("eval", help="evaluate a model JSON on trajectory CSVs")
    p.add_argument("--model", required=True)
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--history", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_actnet_eval)

    dr = sub.add_parser("dr", help="domain randomization utilities")
    drsub = dr.add_subparsers(dest="dr_command", required=True)

    p = drsub.add_parser("sample", help="draw environment samples")
    p.add_argument("--config", required=True, help="randomization config JSON")
    p.add_argument("--nominal", required=True, help="nominal joint parameters JSON")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_dr_sample)

    p = drsub.add_parser("check-damping", help="compare two (B, kd) splits on a sine run")
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--A", type=float, default=0.5)
    p.add_argument("--omega", type=float, default=2.0 * math.pi)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_dr_check_damping)

    p = sub.add_parser("gait", help="trot rewards over a contact log CSV")
    p.add_argument("--contacts", required=True)
    p.add_argument("--H", dest="history", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gait)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InvalidInputError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FrictionLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
