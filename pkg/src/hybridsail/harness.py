"""Scenario definition, Monte Carlo trial execution, and tacking metrics.

A trial reproduces the pool protocol: the boat starts from rest at a fixed
pose, sails a straight close-hauled leg (neutral rudder emerges from the
heading hold), initiates its tack after a fixed upwind displacement, and
the tack is complete when the boat returns to the starting y coordinate.
The x displacement at that moment is the tacking distance.

Every trial is deterministic given (scenario.seed, trial_seed): those two
integers derive the start-heading jitter and an independent gust stream, so
batches can run in any order and still aggregate bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from hybridsail.controller import Phase, TackController, TackPlan
from hybridsail.dynamics import (
    BoatConfig,
    BoatState,
    Simulator,
    WindField,
    normalize_angle,
)
from hybridsail.logs import TrajectoryLog

MANUAL_TACK_TIMEOUT = 25.0  # s, rudder-only turns are slow by nature


class ScenarioError(ValueError):
    """Malformed scenario document; message names the offending field."""


class ScenarioInfeasible(RuntimeError):
    """The boat never reached the turn trigger."""

    def __init__(self, message: str, partial_log: Optional[TrajectoryLog] = None):
        self.partial_log = partial_log
        super().__init__(message)


class ConfigMismatch(ValueError):
    """Variant scenarios in a comparison do not share the same environment."""


@dataclass
class Pool:
    length: float = 10.0  # m, x extent
    width: float = 6.0    # m, y extent

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.length and 0.0 <= y <= self.width


def default_wind() -> WindField:
    """The controlled fan line: 1.3 m/s nominal, gusts held inside 1.2-1.4."""
    return WindField(speed=1.3, direction=math.pi, gust_sigma=0.05, gust_tau=1.0, seed=11)


@dataclass
class Scenario:
    """One experiment setup; see docs/scenario.md for the JSON schema."""

    name: str = "scenario"
    boat_variant: str = "hybrid"
    strategy: str = "prop_assist"           # or "rudder_only"
    config_overrides: dict = field(default_factory=dict)
    wind: WindField = field(default_factory=default_wind)
    pool: Pool = field(default_factory=Pool)
    start_x: float = 2.2
    start_y: float = 3.3
    start_heading: float = math.radians(-60.0)
    turn_trigger_x: float = 0.35            # m of x displacement before turning
    plan: Optional[TackPlan] = None         # None => synthesized for rudder-only
    trial_count: int = 50
    seed: int = 5
    heading_jitter_deg: float = 5.0
    release_margin_deg: float = 16.0        # manual rudder-ease point, deg to go
    release_sigma_deg: float = 7.0          # operator skill spread on that point
    manual_recover: Optional[bool] = None   # None: manual iff rudder_only
    timeout: float = 40.0                   # s, whole trial
    dt: float = 0.01

    def config(self) -> BoatConfig:
        return BoatConfig.variant(self.boat_variant, **self.config_overrides)

    def resolved_plan(self) -> TackPlan:
        if self.plan is not None:
            plan = self.plan
            if plan.pwm_max_on_time is None:
                from hybridsail.calibration import default_fit, predict_turn_time
                plan = replace(plan, pwm_max_on_time=predict_turn_time(default_fit(), plan.pwm_level))
            return plan
        return TackPlan(pwm_level=0.0, pwm_max_on_time=1.0,
                        timeout=MANUAL_TACK_TIMEOUT, turn_direction="starboard")


def comparison_scenarios(seed: int = 5, trials: int = 50,
                         include=("baseline", "heavy", "hybrid_off", "hybrid")) -> dict[str, Scenario]:
    """The three-boat (plus propellers-off hybrid) comparison in one pool setup.

    Rudder-only boats tack by hand (hard over, sheet working, helm eased at
    the release point); the hybrid runs the coordinated strategy with its
    propeller duty at the selected 17%.
    """
    out: dict[str, Scenario] = {}
    for key in include:
        if key == "hybrid":
            sc = Scenario(name="hybrid", boat_variant="hybrid", strategy="prop_assist",
                          plan=TackPlan(), seed=seed, trial_count=trials)
        elif key == "hybrid_off":
            sc = Scenario(name="hybrid_off", boat_variant="hybrid", strategy="rudder_only",
                          seed=seed, trial_count=trials)
        elif key in ("baseline", "heavy"):
            sc = Scenario(name=key, boat_variant=key, strategy="rudder_only",
                          seed=seed, trial_count=trials)
        else:
            raise ScenarioError(f"unknown comparison variant {key!r}")
        out[key] = sc
    return out


@dataclass
class TackingMetrics:
    """Outcome of one trial; distances in meters, times in seconds."""

    success: bool
    tacking_distance: float
    tacking_time: float
    tacking_speed: float
    turn_time: Optional[float]
    end_reason: str
    trajectory: TrajectoryLog
    events: list[tuple[float, str]] = field(default_factory=list)
    trial_seed: int = 0


def run_trial(scenario: Scenario, trial_seed: int) -> TackingMetrics:
    """Simulate one tack trial; deterministic per (scenario.seed, trial_seed)."""
    config = scenario.config()
    wind = scenario.wind
    rng = np.random.default_rng(np.random.SeedSequence([scenario.seed, trial_seed]))
    sigma = math.radians(scenario.heading_jitter_deg)
    # a hand-placed boat is "about" on its line: an operator corrects gross
    # placement error (a visibly luffing sail), so the jitter is truncated
    jitter = sigma * max(-1.75, min(1.75, float(rng.standard_normal())))
    psi0 = normalize_angle(scenario.start_heading + jitter)

    state = BoatState(x=scenario.start_x, y=scenario.start_y, psi=psi0)
    sim = Simulator(config, wind, state=state,
                    wind_extra=(scenario.seed, trial_seed))
    use_prop = scenario.strategy == "prop_assist"
    ctrl = TackController(config, wind, hold_heading=psi0, use_propeller=use_prop,
                          manual_recover=scenario.manual_recover)
    plan = scenario.resolved_plan()
    if not use_prop:
        # where the crew eases the helm and lets the bow carry: per-trial
        # operator error, the dominant randomness of a hand-sailed tack
        ease = (math.radians(scenario.release_margin_deg)
                + math.radians(scenario.release_sigma_deg) * float(rng.standard_normal()))
        plan = replace(plan, release_margin=max(math.radians(4.0), ease))

    log = TrajectoryLog(with_events=True)
    x0, y0 = scenario.start_x, scenario.start_y
    leg1_sign = 1.0 if math.sin(psi0) > 0.0 else -1.0
    dt = scenario.dt

    tack_started = False
    end_reason = "timeout"
    n_events = 0

    while True:
        st = sim.state
        if st.t >= scenario.timeout:
            end_reason = "timeout"
            break
        if not scenario.pool.contains(st.x, st.y):
            if not tack_started:
                raise ScenarioInfeasible(
                    f"left the pool at ({st.x:.2f}, {st.y:.2f}) before reaching the trigger",
                    partial_log=log)
            end_reason = "pool_exit"
            break
        if not tack_started and st.x - x0 >= scenario.turn_trigger_x:
            ctrl.start_tack(plan, st.psi, t=st.t)
            tack_started = True
        if tack_started and (st.y - y0) * leg1_sign <= 0.0 and st.t > ctrl.phase_entry.get(Phase.RUDDER_TURN, st.t):
            end_reason = "y_return"
            break

        cmd = ctrl.update(st)
        events = ctrl.events()
        tag = events[n_events][1] if len(events) > n_events else ""
        n_events = len(events)
        log.append(st, cmd, tag)
        sim.step(cmd, dt)

        if not tack_started and st.t >= scenario.timeout * 0.9:
            raise ScenarioInfeasible(
                f"no trigger after {st.t:.1f} s (x displacement "
                f"{st.x - x0:.2f} of {scenario.turn_trigger_x:.2f} m)",
                partial_log=log)

    st = sim.state
    status = ctrl.status()
    success = end_reason == "y_return" and status.kind == "success"
    distance = st.x - x0
    elapsed = st.t
    speed = distance / elapsed if elapsed > 0 else 0.0
    return TackingMetrics(
        success=success,
        tacking_distance=distance,
        tacking_time=elapsed,
        tacking_speed=speed,
        turn_time=status.turn_time,
        end_reason=end_reason if status.kind != "failure" else f"{end_reason}:{status.reason}",
        trajectory=log,
        events=ctrl.events(),
        trial_seed=trial_seed,
    )


@dataclass
class BatchStats:
    n: int
    n_success: int
    success_rate: float
    dist_mean: float
    dist_min: float
    dist_max: float
    time_mean: float
    time_min: float
    time_max: float
    speed_mean: float          # mean distance / mean time, the table convention
    speed_trial_mean: float    # arithmetic mean of per-trial speeds
    turn_time_mean: Optional[float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class BatchResult:
    scenario: Scenario
    trials: list[TackingMetrics]
    errors: list[tuple[int, str]]
    stats: BatchStats


def _aggregate(scenario: Scenario, trials: list[TackingMetrics],
               errors: list[tuple[int, str]]) -> BatchResult:
    succ = [m for m in trials if m.success]
    n_s = len(succ)

    def mean(xs):
        return sum(xs) / len(xs) if xs else float("nan")

    dists = [m.tacking_distance for m in succ]
    times = [m.tacking_time for m in succ]
    speeds = [m.tacking_speed for m in succ]
    turns = [m.turn_time for m in succ if m.turn_time is not None]
    dist_mean = mean(dists)
    time_mean = mean(times)
    stats = BatchStats(
        n=len(trials) + len(errors),
        n_success=n_s,
        success_rate=n_s / (len(trials) + len(errors)) if trials or errors else 0.0,
        dist_mean=dist_mean,
        dist_min=min(dists) if dists else float("nan"),
        dist_max=max(dists) if dists else float("nan"),
        time_mean=time_mean,
        time_min=min(times) if times else float("nan"),
        time_max=max(times) if times else float("nan"),
        speed_mean=dist_mean / time_mean if n_s else float("nan"),
        speed_trial_mean=mean(speeds),
        turn_time_mean=mean(turns) if turns else None,
    )
    return BatchResult(scenario=scenario, trials=trials, errors=errors, stats=stats)


def run_batch(scenario: Scenario, n: Optional[int] = None) -> BatchResult:
    """Run n trials with per-trial seeds 0..n-1; aggregation order is fixed.

    Per-trial errors (e.g. an infeasible setup) are captured as rows instead
    of aborting the batch.
    """
    count = n if n is not None else scenario.trial_count
    if count < 1:
        raise ScenarioError(f"trial count must be >= 1, got {count}")
    trials: list[TackingMetrics] = []
    errors: list[tuple[int, str]] = []
    for i in range(count):
        try:
            trials.append(run_trial(scenario, i))
        except ScenarioInfeasible as exc:
            errors.append((i, str(exc)))
    return _aggregate(scenario, trials, errors)


@dataclass
class ComparisonReport:
    variants: dict[str, BatchStats]
    ratios_vs_baseline: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "variants": {k: v.to_dict() for k, v in self.variants.items()},
            "ratios_vs_baseline": self.ratios_vs_baseline,
        }


def compare_variants(scenarios: dict[str, Scenario], n: int,
                     baseline_key: str = "baseline") -> tuple[ComparisonReport, dict[str, BatchResult]]:
    """Run matched batches and report per-variant stats plus ratios.

    All scenarios must share wind, pool, start, trigger and noise; only the
    boat and its tack strategy may differ.
    """
    ref = next(iter(scenarios.values()))
    for key, sc in scenarios.items():
        for attr in ("wind", "pool", "start_x", "start_y", "start_heading",
                     "turn_trigger_x", "heading_jitter_deg", "timeout", "dt", "seed"):
            if getattr(sc, attr) != getattr(ref, attr):
                raise ConfigMismatch(
                    f"scenario {key!r} differs from {next(iter(scenarios))!r} in {attr}")
    results = {key: run_batch(sc, n) for key, sc in scenarios.items()}
    stats = {key: res.stats for key, res in results.items()}
    ratios: dict[str, dict[str, float]] = {}
    if baseline_key in stats:
        base = stats[baseline_key]
        for key, st in stats.items():
            if key == baseline_key:
                continue
            ratios[key] = {
                "speed_mean": st.speed_mean / base.speed_mean if base.speed_mean else float("nan"),
                "dist_mean": st.dist_mean / base.dist_mean if base.dist_mean else float("nan"),
                "time_mean": st.time_mean / base.time_mean if base.time_mean else float("nan"),
                "success_rate": (st.success_rate / base.success_rate
                                 if base.success_rate else float("nan")),
            }
    return ComparisonReport(variants=stats, ratios_vs_baseline=ratios), results


@dataclass
class SweepRow:
    pwm: float
    trial: int
    turn_time: float
    success: bool


def sweep_pwm(scenario: Scenario, pwm_levels=(11, 13, 15, 17, 19, 21),
              trials_per_level: int = 12, protocol: str = "strategy") -> list[SweepRow]:
    """PWM-time study in the Table III layout (levels x trials).

    protocol="strategy" runs the coordinated controller (propeller cut on
    heading capture, bounded by 1.25x the fitted time): reliable turns whose
    times fall monotonically with duty. protocol="manual" emulates the
    hand-flown trials behind the published table: the operator explores the
    on-time (+/-25%) and picks an ease bearing by feel, the propeller cut is
    time-only, and nobody counter-steers, so the high-duty levels lose
    trials to overshoot exactly the way the crossed-out entries did.
    """
    if scenario.strategy != "prop_assist":
        raise ScenarioError("sweep_pwm requires a propeller-assisted scenario")
    if protocol not in ("strategy", "manual"):
        raise ScenarioError(f"unknown sweep protocol {protocol!r}")
    from hybridsail.calibration import default_fit, predict_turn_time
    fit = default_fit()
    rows: list[SweepRow] = []
    base_plan = scenario.resolved_plan()
    for pwm in pwm_levels:
        base_on = predict_turn_time(fit, pwm)
        for i in range(trials_per_level):
            if protocol == "manual":
                rng = np.random.default_rng(
                    np.random.SeedSequence([scenario.seed, 77, int(pwm), i]))
                on_time = base_on * float(rng.uniform(0.75, 1.25))
                release = math.radians(float(np.clip(rng.normal(28.0, 8.0), 10.0, 45.0)))
                plan = replace(base_plan, pwm_level=float(pwm), pwm_max_on_time=on_time,
                               release_margin=release)
                sc = replace(scenario, plan=plan, manual_recover=True)
            else:
                plan = replace(base_plan, pwm_level=float(pwm), pwm_max_on_time=1.25 * base_on)
                sc = replace(scenario, plan=plan, manual_recover=False)
            m = run_trial(sc, i)
            if m.turn_time is not None:
                tt = m.turn_time
            else:
                tt = m.tacking_time  # failed attempts log their elapsed time
            rows.append(SweepRow(pwm=float(pwm), trial=i, turn_time=tt,
                                 success=m.success and m.turn_time is not None))
    return rows


def sweep_to_csv(rows: list[SweepRow]) -> str:
    out = ["pwm,trial,turn_time,success"]
    for r in rows:
        out.append(f"{r.pwm:g},{r.trial},{r.turn_time:.6f},{str(r.success).lower()}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Scenario JSON (schema documented in docs/scenario.md)
# ---------------------------------------------------------------------------

def _need(data: dict, key: str, kind, path: str):
    if key not in data:
        raise ScenarioError(f"missing field: {path}{key}")
    val = data[key]
    if not isinstance(val, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ScenarioError(f"wrong type for {path}{key}: expected {name}")
    return val


def plan_from_dict(data: dict, path: str = "plan.") -> TackPlan:
    known = {"target_heading_change_deg", "heading_tolerance_deg", "pwm_level",
             "pwm_max_on_time", "rudder_lead_time", "turn_direction", "timeout",
             "settle_dwell"}
    for key in data:
        if key not in known:
            raise ScenarioError(f"unknown field: {path}{key}")
    kwargs = {}
    if "target_heading_change_deg" in data:
        kwargs["target_heading_change"] = math.radians(float(data["target_heading_change_deg"]))
    if "heading_tolerance_deg" in data:
        kwargs["heading_tolerance"] = math.radians(float(data["heading_tolerance_deg"]))
    for key in ("pwm_level", "rudder_lead_time", "timeout", "settle_dwell"):
        if key in data:
            kwargs[key] = float(data[key])
    if "pwm_max_on_time" in data and data["pwm_max_on_time"] is not None:
        kwargs["pwm_max_on_time"] = float(data["pwm_max_on_time"])
    if "turn_direction" in data:
        kwargs["turn_direction"] = data["turn_direction"]
    return TackPlan(**kwargs)


def plan_to_dict(plan: TackPlan) -> dict:
    return {
        "target_heading_change_deg": math.degrees(plan.target_heading_change),
        "heading_tolerance_deg": math.degrees(plan.heading_tolerance),
        "pwm_level": plan.pwm_level,
        "pwm_max_on_time": plan.pwm_max_on_time,
        "rudder_lead_time": plan.rudder_lead_time,
        "turn_direction": plan.turn_direction,
        "timeout": plan.timeout,
        "settle_dwell": plan.settle_dwell,
    }


def scenario_from_dict(data: dict) -> Scenario:
    known = {"name", "boat_variant", "strategy", "config_overrides", "wind",
             "pool", "start", "turn_trigger_x", "plan", "trial_count", "seed",
             "heading_jitter_deg", "timeout", "dt"}
    for key in data:
        if key not in known:
            raise ScenarioError(f"unknown field: {key}")
    wind_d = _need(data, "wind", dict, "")
    try:
        wind = WindField(
            speed=float(_need(wind_d, "speed", (int, float), "wind.")),
            direction=math.radians(float(_need(wind_d, "direction_deg", (int, float), "wind."))),
            gust_sigma=float(wind_d.get("gust_sigma", 0.0)),
            gust_tau=float(wind_d.get("gust_tau", 1.0)),
            seed=int(wind_d.get("seed", 0)),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"wind: {exc}")
    pool_d = data.get("pool", {})
    pool = Pool(length=float(pool_d.get("length", 10.0)), width=float(pool_d.get("width", 6.0)))
    start = _need(data, "start", dict, "")
    variant = _need(data, "boat_variant", str, "")
    strategy = data.get("strategy", "prop_assist" if variant == "hybrid" else "rudder_only")
    if strategy not in ("prop_assist", "rudder_only"):
        raise ScenarioError(f"invalid value for strategy: {strategy!r}")
    plan = plan_from_dict(data["plan"]) if data.get("plan") is not None else None
    return Scenario(
        name=data.get("name", "scenario"),
        boat_variant=variant,
        strategy=strategy,
        config_overrides=dict(data.get("config_overrides", {})),
        wind=wind,
        pool=pool,
        start_x=float(_need(start, "x", (int, float), "start.")),
        start_y=float(_need(start, "y", (int, float), "start.")),
        start_heading=math.radians(float(_need(start, "heading_deg", (int, float), "start."))),
        turn_trigger_x=float(_need(data, "turn_trigger_x", (int, float), "")),
        plan=plan,
        trial_count=int(data.get("trial_count", 50)),
        seed=int(data.get("seed", 1)),
        heading_jitter_deg=float(data.get("heading_jitter_deg", 5.0)),
        timeout=float(data.get("timeout", 40.0)),
        dt=float(data.get("dt", 0.01)),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "boat_variant": scenario.boat_variant,
        "strategy": scenario.strategy,
        "config_overrides": dict(scenario.config_overrides),
        "wind": {
            "speed": scenario.wind.speed,
            "direction_deg": math.degrees(scenario.wind.direction),
            "gust_sigma": scenario.wind.gust_sigma,
            "gust_tau": scenario.wind.gust_tau,
            "seed": scenario.wind.seed,
        },
        "pool": {"length": scenario.pool.length, "width": scenario.pool.width},
        "start": {"x": scenario.start_x, "y": scenario.start_y,
                  "heading_deg": math.degrees(scenario.start_heading)},
        "turn_trigger_x": scenario.turn_trigger_x,
        "plan": plan_to_dict(scenario.plan) if scenario.plan is not None else None,
        "trial_count": scenario.trial_count,
        "seed": scenario.seed,
        "heading_jitter_deg": scenario.heading_jitter_deg,
        "timeout": scenario.timeout,
        "dt": scenario.dt,
    }
