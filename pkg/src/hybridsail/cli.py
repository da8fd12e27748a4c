"""Command-line entry point: simulate | sweep | fit | compare | calibrate | serve | replay.

Exit codes: 0 ok, 1 usage/config error, 2 experiment-level failure (a failed
tack or an unreachable calibration envelope; outputs are still written).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from hybridsail import calibration, harness, teleop
from hybridsail.controller import TackPlan
from hybridsail.dynamics import BoatConfig, ConfigError
from hybridsail.harness import Scenario, ScenarioError, ScenarioInfeasible


def _parse_range(text: str, name: str) -> list[int]:
    """Parse start:stop[:step] (inclusive) range arguments like 11:21:2."""
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"--{name} expects start:stop[:step], got {text!r}")
    if len(nums) == 2:
        start, stop, step = nums[0], nums[1], 1
    elif len(nums) == 3:
        start, stop, step = nums
    else:
        raise ValueError(f"--{name} expects start:stop[:step], got {text!r}")
    if step <= 0 or stop < start:
        raise ValueError(f"--{name} range is empty: {text!r}")
    return list(range(start, stop + 1, step))


def _load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        data = json.load(fh)
    return harness.scenario_from_dict(data)


def _apply_config(scenario: Scenario, config_path) -> Scenario:
    if config_path is None:
        return scenario
    cfg = BoatConfig.load(config_path)
    return replace(scenario, config_overrides=cfg.to_dict())


def _write_metrics(path: Path, metrics: harness.TackingMetrics) -> None:
    payload = {
        "success": metrics.success,
        "tacking_distance": metrics.tacking_distance,
        "tacking_time": metrics.tacking_time,
        "tacking_speed": metrics.tacking_speed,
        "turn_time": metrics.turn_time,
        "end_reason": metrics.end_reason,
        "events": [{"t": t, "event": tag} for t, tag in metrics.events],
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")


def cmd_simulate(args) -> int:
    scenario = _apply_config(_load_scenario(args.scenario), args.config)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        metrics = harness.run_trial(scenario, args.trial)
    except ScenarioInfeasible as exc:
        if exc.partial_log is not None:
            exc.partial_log.save(out / "trajectory.csv")
        print(f"scenario infeasible: {exc}", file=sys.stderr)
        return 2
    metrics.trajectory.save(out / "trajectory.csv")
    _write_metrics(out / "metrics.json", metrics)
    print(f"trial {'succeeded' if metrics.success else 'FAILED'}: "
          f"distance {metrics.tacking_distance:.3f} m in {metrics.tacking_time:.2f} s "
          f"({metrics.end_reason})")
    return 0 if metrics.success else 2


def cmd_sweep(args) -> int:
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    pwm_levels = _parse_range(args.pwm, "pwm")
    if args.scenario:
        scenario = _load_scenario(args.scenario)
    else:
        scenario = Scenario(name="sweep", boat_variant="hybrid",
                            strategy="prop_assist", plan=TackPlan())
    scenario = _apply_config(scenario, args.config)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    rows = harness.sweep_pwm(scenario, pwm_levels=pwm_levels,
                             trials_per_level=args.trials, protocol=args.protocol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(harness.sweep_to_csv(rows))
    by_level: dict[float, list[harness.SweepRow]] = {}
    for row in rows:
        by_level.setdefault(row.pwm, []).append(row)
    print("pwm  trials success mean_turn_time")
    for pwm, rs in by_level.items():
        ok = [r.turn_time for r in rs if r.success]
        mean = sum(ok) / len(ok) if ok else float("nan")
        print(f"{pwm:4.0f}  {len(rs):6d} {len(ok):7d} {mean:14.3f}")
    return 0


def cmd_fit(args) -> int:
    degrees = _parse_range(args.degrees, "degrees")
    samples = calibration.load_samples_csv(args.data) if args.data else calibration.fixture_samples()
    kept = calibration.filter_successful(samples)
    fits = {d: calibration.fit_polynomial(kept, d) for d in degrees}
    best = calibration.select_model(kept, degrees)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fit.json").write_text(json.dumps(best.to_dict(), indent=2) + "\n")
    with open(out / "residuals.csv", "w") as fh:
        fh.write("pwm,turn_time,predicted,residual\n")
        for s in kept:
            pred = best.evaluate(s.pwm)
            fh.write(f"{s.pwm:g},{s.turn_time:.6f},{pred:.6f},{s.turn_time - pred:.6f}\n")
    print("degree adjusted_rmse")
    for d, fit in fits.items():
        marker = "  <- selected" if d == best.degree else ""
        print(f"{d:6d} {fit.rmse_adjusted:13.4f}{marker}")
    return 0


def cmd_compare(args) -> int:
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    include = tuple(v.strip() for v in args.variants.split(",") if v.strip())
    seed = args.seed if args.seed is not None else 5
    scenarios = harness.comparison_scenarios(seed=seed, trials=args.trials, include=include)
    report, results = harness.compare_variants(scenarios, args.trials)
    out = Path(args.out)
    run_dir = out / f"run_{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (out / "comparison.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    with open(out / "trials.csv", "w") as fh:
        fh.write("variant,trial,success,distance,time,speed,turn_time,end_reason\n")
        for key, res in results.items():
            for m in res.trials:
                tt = "" if m.turn_time is None else f"{m.turn_time:.6f}"
                fh.write(f"{key},{m.trial_seed},{str(m.success).lower()},"
                         f"{m.tacking_distance:.6f},{m.tacking_time:.6f},"
                         f"{m.tacking_speed:.6f},{tt},{m.end_reason}\n")
            for m in res.trials:
                m.trajectory.save(run_dir / f"{key}_trial_{m.trial_seed:03d}.csv")
    print(f"{'variant':12s} {'rate':>6s} {'dist':>7s} {'time':>7s} {'speed':>9s}")
    for key, stats in report.variants.items():
        print(f"{key:12s} {stats.success_rate:6.2f} {stats.dist_mean:7.2f} "
              f"{stats.time_mean:7.2f} {stats.speed_mean:9.4f}")
    for key, ratios in report.ratios_vs_baseline.items():
        print(f"{key} vs baseline: speed x{ratios['speed_mean']:.3f}")
    return 0


def cmd_calibrate(args) -> int:
    config = BoatConfig.load(args.config) if args.config else BoatConfig.variant("hybrid")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        calibrated = calibration.calibrate_simulator(config)
    except calibration.CalibrationFailed as exc:
        (out / "calibration_failure.json").write_text(
            json.dumps({"error": str(exc), "residuals": exc.residuals}, indent=2) + "\n")
        print(f"calibration failed: {exc}", file=sys.stderr)
        return 2
    calibrated.save(out / "hybrid_calibrated.json")
    rows = []
    from hybridsail.dynamics import WindField
    wind = WindField()
    for pwm, target in sorted(calibration.TABLE3_AVERAGES.items()):
        tt = calibration.measure_turn_time(calibrated, wind, float(pwm))
        rows.append({"pwm": pwm, "simulated": tt, "target": target,
                     "relative_error": (tt - target) / target})
    (out / "calibration_report.json").write_text(json.dumps({
        "prop_kT": calibrated.prop_kT, "drag_r": calibrated.drag_r,
        "levels": rows}, indent=2) + "\n")
    print(f"calibrated: prop_kT={calibrated.prop_kT:.5f} drag_r={calibrated.drag_r:.5f}")
    for row in rows:
        print(f"  pwm {row['pwm']:2d}: {row['simulated']:.3f} s vs {row['target']:.2f} s "
              f"({row['relative_error']:+.1%})")
    return 0


def cmd_serve(args) -> int:
    if args.scenario:
        scenario = _load_scenario(args.scenario)
    else:
        scenario = Scenario(name="teleop", boat_variant="hybrid", strategy="prop_assist")
    scenario = _apply_config(scenario, args.config)
    engine = teleop.SessionEngine(scenario, seed=args.seed or 0)
    from hybridsail.server import run_server
    out_dir = Path(args.out) if args.out else None
    try:
        asyncio.run(run_server(engine, args.host, args.port, out_dir=out_dir))
    except KeyboardInterrupt:
        print("server stopped")
    return 0


def cmd_replay(args) -> int:
    record = teleop.load_record(args.record)
    csv_text = teleop.replay_session(record)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "replayed_trajectory.csv").write_text(csv_text)
    if record.trajectory_csv:
        match = csv_text == record.trajectory_csv
        print(f"replay {'matches' if match else 'DIVERGES from'} the recorded trajectory")
        return 0 if match else 2
    print("record carried no trajectory; replay written")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--config", default=None, help="boat config JSON overriding the variant")
    common.add_argument("--out", default="out", help="output directory")

    parser = argparse.ArgumentParser(prog="hybridsail",
                                     description="hybrid sail/propeller tacking simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one tack trial")
    p.add_argument("scenario", help="scenario JSON path")
    p.add_argument("--trial", type=int, default=0, help="trial index within the batch seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="PWM-time study")
    p.add_argument("--scenario", default=None)
    p.add_argument("--pwm", default="11:21:2", help="duty range start:stop:step")
    p.add_argument("--trials", type=int, default=12, help="trials per level")
    p.add_argument("--protocol", choices=("strategy", "manual"), default="strategy")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", parents=[common], help="fit turn-time polynomials")
    p.add_argument("--data", default=None, help="samples CSV (default: shipped fixture)")
    p.add_argument("--degrees", default="1:5")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", parents=[common], help="variant comparison batches")
    p.add_argument("--variants", default="baseline,heavy,hybrid_off,hybrid")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("calibrate", parents=[common],
                       help="tune prop_kT/drag_r against the published turn times")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", parents=[common], help="teleop session server")
    p.add_argument("--scenario", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", parents=[common], help="headless session replay")
    p.add_argument("record", help="SessionRecord JSON path")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ScenarioError, ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
