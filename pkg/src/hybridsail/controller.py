"""Coordinated tacking strategy as an explicit state machine.

Sequence for a propeller-assisted tack: rudder hard over first, sheet
released, then (after a short lead) the propeller on the outside of the
turn switches on at a fixed duty; the propeller cuts on heading capture or
when its time budget runs out; the boat then settles and sails close-hauled
on the new board. Baseline boats run the same machine without the propeller
phase and with the sheet kept working, which is how a crew tacks by hand.

A controller instance is a deterministic sequential object: one update per
simulation step, no internal randomness, exclusive ownership of its state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from hybridsail.dynamics import (
    ActuatorState,
    ActuatorCommand,
    BoatConfig,
    BoatState,
    WindField,
    apparent_wind,
    clamp,
    normalize_angle,
)

# Half angle of the cone around dead upwind where the shipped sail model
# cannot generate forward drive (see the trim sweep tests).
NOGO_HALF_ANGLE = math.radians(41.0)

# Sheet angle lookup vs apparent wind angle off the bow, both radians.
# Piecewise linear: hard on the wind up to 30 deg, eased out to a full run.
_TRIM_BETA = tuple(math.radians(b) for b in (0.0, 30.0, 60.0, 90.0, 135.0, 180.0))
_TRIM_DELTA = tuple(math.radians(d) for d in (0.0, 0.0, 30.0, 45.0, 70.0, 90.0))

# Heading-hold helm gains (rudder rad per rad of error / per rad/s of yaw).
_HELM_KP = 1.6
_HELM_KD = 1.1


class InvalidPlanError(ValueError):
    """A TackPlan field violates its documented range."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid TackPlan: " + "; ".join(problems))


def closehauled_trim(beta: float) -> float:
    """Sheet angle for a given apparent wind angle off the bow (radians)."""
    b = abs(beta)
    if b >= _TRIM_BETA[-1]:
        return _TRIM_DELTA[-1]
    for i in range(1, len(_TRIM_BETA)):
        if b <= _TRIM_BETA[i]:
            lo, hi = _TRIM_BETA[i - 1], _TRIM_BETA[i]
            w = (b - lo) / (hi - lo)
            return _TRIM_DELTA[i - 1] * (1.0 - w) + _TRIM_DELTA[i] * w
    return _TRIM_DELTA[-1]


def in_no_go(heading: float, wind_direction: float, half_angle: float = NOGO_HALF_ANGLE) -> bool:
    """True iff the heading lies within half_angle of dead upwind (closed cone).

    wind_direction is where the wind blows toward, so dead upwind is
    wind_direction + pi. Headings exactly on the cone boundary count as in.
    """
    off = normalize_angle(heading - wind_direction - math.pi)
    return abs(off) <= half_angle


@dataclass
class TackPlan:
    """Parameters of one tack: how far to turn, how hard to assist, when to give up."""

    target_heading_change: float = math.radians(120.0)  # rad
    heading_tolerance: float = math.radians(10.0)       # rad
    pwm_level: float = 17.0                             # duty %
    pwm_max_on_time: Optional[float] = None             # s; resolved from the PWM-time fit if None
    rudder_lead_time: float = 0.2                       # s rudder-before-propeller
    turn_direction: str = "starboard"                   # starboard = positive heading change
    timeout: float = 12.0                               # s
    settle_dwell: float = 0.8                           # s inside tolerance before success
    release_margin: Optional[float] = None              # rad to go at manual rudder release

    def problems(self) -> list[str]:
        out = []
        if self.target_heading_change < 0.0:
            out.append(f"target_heading_change={self.target_heading_change} (must be >= 0)")
        if not self.heading_tolerance > 0.0:
            out.append(f"heading_tolerance={self.heading_tolerance} (must be > 0)")
        if not 0.0 <= self.pwm_level <= 100.0:
            out.append(f"pwm_level={self.pwm_level} (must be within [0, 100])")
        if self.pwm_max_on_time is None or not self.pwm_max_on_time > 0.0:
            out.append(f"pwm_max_on_time={self.pwm_max_on_time} (must be > 0)")
        elif not self.timeout > self.pwm_max_on_time:
            out.append(f"timeout={self.timeout} (must exceed pwm_max_on_time={self.pwm_max_on_time})")
        if self.turn_direction not in ("port", "starboard"):
            out.append(f"turn_direction={self.turn_direction!r} (must be 'port' or 'starboard')")
        if self.rudder_lead_time < 0.0:
            out.append(f"rudder_lead_time={self.rudder_lead_time} (must be >= 0)")
        if self.settle_dwell < 0.0:
            out.append(f"settle_dwell={self.settle_dwell} (must be >= 0)")
        return out

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise InvalidPlanError(probs)


class Phase(Enum):
    CLOSE_HAULED = "close_hauled"
    RUDDER_TURN = "rudder_turn"
    PROP_ASSIST = "prop_assist"
    RECOVER = "recover"
    DONE = "done"
    FAILED = "failed"


IN_PROGRESS = "in_progress"
SUCCESS = "success"
FAILURE = "failure"


@dataclass
class TackStatus:
    kind: str                          # in_progress | success | failure
    turn_time: Optional[float] = None  # s, rudder-turn entry to heading capture
    reason: Optional[str] = None       # failure classification


@dataclass
class _PhaseLog:
    """Transition record: (time, event tag) pairs for the trajectory log."""
    events: list[tuple[float, str]] = field(default_factory=list)

    def add(self, t: float, tag: str) -> None:
        self.events.append((t, tag))


class TackController:
    """Steers one boat: close-hauled heading hold, and at most one tack.

    use_propeller=False with keep_sail=True reproduces the manual
    rudder-and-sheet tack used by the non-retrofitted boats.
    """

    def __init__(self, config: BoatConfig, wind: WindField,
                 hold_heading: Optional[float] = None,
                 use_propeller: bool = True,
                 manual_recover: Optional[bool] = None):
        self.config = config
        self.wind = wind
        self.use_propeller = use_propeller
        # a hand-flown tack eases the helm and lets the bow carry; the
        # engineered strategy counter-steers onto the target instead
        self.manual_recover = (not use_propeller) if manual_recover is None else manual_recover
        self.phase = Phase.CLOSE_HAULED
        self.plan: Optional[TackPlan] = None
        self.desired = hold_heading
        self.turn_sign = 0.0
        self.log = _PhaseLog()
        self.phase_entry: dict[Phase, float] = {}
        self._turn_start: Optional[float] = None
        self._assist_entry: Optional[float] = None
        self._band_start: Optional[float] = None  # start of current in-tolerance dwell
        self._capture_time: Optional[float] = None
        self._prev_t: Optional[float] = None
        self._prev_err: Optional[float] = None
        self._fail_reason: Optional[str] = None

    # -- lifecycle ---------------------------------------------------------

    def start_tack(self, plan: TackPlan, current_heading: float,
                   t: Optional[float] = None) -> None:
        """Arm the tack: record the desired heading, go to RUDDER_TURN."""
        plan.validate()
        if self.phase not in (Phase.CLOSE_HAULED,):
            raise RuntimeError(f"cannot start a tack from phase {self.phase}")
        self.plan = plan
        self.turn_sign = 1.0 if plan.turn_direction == "starboard" else -1.0
        self.desired = normalize_angle(current_heading + self.turn_sign * plan.target_heading_change)
        self._prev_err = None
        self._prev_t = None
        if plan.target_heading_change == 0.0:
            # degenerate tack: already on the desired heading
            self.phase = Phase.DONE
            self._turn_start = t if t is not None else 0.0
            self._capture_time = self._turn_start
            self.phase_entry[Phase.DONE] = self._turn_start
            return
        self.phase = Phase.RUDDER_TURN
        if t is not None:
            self._enter(Phase.RUDDER_TURN, t)

    def _enter(self, phase: Phase, t: float) -> None:
        self.phase = phase
        self.phase_entry[phase] = t
        if phase is Phase.RUDDER_TURN:
            self._turn_start = t
            self.log.add(t, "rudder_on")
        elif phase is Phase.PROP_ASSIST:
            self._assist_entry = t
            self.log.add(t, "prop_on")
        elif phase is Phase.RECOVER:
            if self._assist_entry is not None:
                self.log.add(t, "prop_off")
        elif phase is Phase.DONE:
            self.log.add(t, "done")
        elif phase is Phase.FAILED:
            self.log.add(t, "failed")

    # -- stepping ----------------------------------------------------------

    def update(self, state: BoatState) -> ActuatorCommand:
        """One control decision for the current state; total over live phases."""
        t = state.t
        if self.phase is Phase.RUDDER_TURN and self._turn_start is None:
            self._enter(Phase.RUDDER_TURN, t)

        if self.phase is Phase.CLOSE_HAULED:
            if self.desired is None:
                self.desired = state.psi
            return self._hold_command(state)
        if self.phase is Phase.DONE:
            return self._hold_command(state)
        if self.phase is Phase.FAILED:
            return ActuatorCommand(sail_angle=0.0, sail_released=True,
                                   rudder_angle=0.0, pwm_left=0.0, pwm_right=0.0)

        plan = self.plan
        err = normalize_angle(self.desired - state.psi)
        abs_err = abs(err)
        self._track_band(t, abs_err, plan.heading_tolerance)

        if t - self._turn_start >= plan.timeout:
            self._fail_reason = self._classify_miss(err)
            self._enter(Phase.FAILED, t)
            return self.update(state)

        if self.phase is Phase.RUDDER_TURN:
            release = plan.release_margin if plan.release_margin is not None else plan.heading_tolerance
            if abs_err <= (plan.heading_tolerance if self.use_propeller else release):
                self._enter(Phase.RECOVER, t)
            elif self.use_propeller and t - self._turn_start >= plan.rudder_lead_time:
                self._enter(Phase.PROP_ASSIST, t)
        if self.phase is Phase.PROP_ASSIST:
            # the engineered strategy cuts the propeller on heading capture;
            # a hand-timed trial only knows its planned on-time
            captured = abs_err <= plan.heading_tolerance and not self.manual_recover
            if captured or t - self._assist_entry >= plan.pwm_max_on_time:
                self._enter(Phase.RECOVER, t)
        if self.phase is Phase.RECOVER:
            if (self._band_start is not None
                    and t - self._band_start >= plan.settle_dwell):
                self._capture_time = self._band_start
                self._enter(Phase.DONE, t)
                return self._hold_command(state)

        self._prev_t = t
        self._prev_err = abs_err

        if self.phase is Phase.RUDDER_TURN:
            return self._turn_command(state, prop=False)
        if self.phase is Phase.PROP_ASSIST:
            return self._turn_command(state, prop=True)
        # RECOVER. The engineered strategy counter-steers onto the target.
        # A manual crew keeps driving the turn by hand while still short of
        # it, then eases to neutral and lets the bow carry; an overshot boat
        # just sails off (nobody chases it around).
        if not self.manual_recover:
            return self._hold_command(state)
        release = plan.release_margin if plan.release_margin is not None else plan.heading_tolerance
        if abs_err > release and err * self.turn_sign > 0.0:
            cmd = self._turn_command(state, prop=False)
            if self.use_propeller:
                cmd = replace(cmd, sail_angle=self._trim(state), sail_released=False)
            return cmd
        return ActuatorCommand(sail_angle=self._trim(state), sail_released=False,
                               rudder_angle=0.0, pwm_left=0.0, pwm_right=0.0)

    def _track_band(self, t: float, abs_err: float, tol: float) -> None:
        if abs_err <= tol:
            if self._band_start is None:
                # interpolate the crossing between updates for a dt-insensitive
                # turn time (this is the "time for turning" measurement)
                if self._prev_err is not None and self._prev_err > tol and self._prev_t is not None:
                    frac = (self._prev_err - tol) / (self._prev_err - abs_err)
                    self._band_start = self._prev_t + frac * (t - self._prev_t)
                else:
                    self._band_start = t
        else:
            self._band_start = None

    def _turn_command(self, state: BoatState, prop: bool) -> ActuatorCommand:
        plan = self.plan
        # helm reverses on sternway: backward flow flips the rudder's effect,
        # so keep the bow swinging the intended way while blown backward
        direction = -self.turn_sign if state.u >= 0.0 else self.turn_sign
        rudder = direction * self.config.rudder_max
        if self.use_propeller:
            sail_angle, released = 0.0, True
        else:
            sail_angle, released = self._trim(state), False
        pwm_left = pwm_right = 0.0
        if prop:
            # external propeller: the one farther from the turning center
            if self.turn_sign > 0.0:
                pwm_left = plan.pwm_level
            else:
                pwm_right = plan.pwm_level
        return ActuatorCommand(sail_angle=sail_angle, sail_released=released,
                               rudder_angle=rudder, pwm_left=pwm_left, pwm_right=pwm_right)

    def _hold_command(self, state: BoatState) -> ActuatorCommand:
        err = normalize_angle(self.desired - state.psi) if self.desired is not None else 0.0
        rudder = clamp(_HELM_KD * state.r - _HELM_KP * err,
                       -self.config.rudder_max, self.config.rudder_max)
        return ActuatorCommand(sail_angle=self._trim(state), sail_released=False,
                               rudder_angle=rudder, pwm_left=0.0, pwm_right=0.0)

    def _trim(self, state: BoatState) -> float:
        _, alpha = apparent_wind(state, self.wind)
        beta = math.pi - abs(alpha)  # apparent wind angle off the bow
        return closehauled_trim(beta)

    def _classify_miss(self, err: float) -> str:
        # err = desired - psi; overshoot means the turn went past the target
        if abs(err) <= math.radians(90.0) and err * self.turn_sign < 0.0:
            return "overshoot"
        return "undershoot"

    # -- reporting ----------------------------------------------------------

    def status(self, state: Optional[BoatState] = None) -> TackStatus:
        if self.phase is Phase.DONE:
            if self._capture_time is None or self._turn_start is None:
                return TackStatus(SUCCESS, turn_time=0.0)
            return TackStatus(SUCCESS, turn_time=self._capture_time - self._turn_start)
        if self.phase is Phase.FAILED:
            return TackStatus(FAILURE, reason=self._fail_reason or "timeout")
        return TackStatus(IN_PROGRESS)

    def events(self) -> list[tuple[float, str]]:
        return list(self.log.events)


def begin_tack(plan: TackPlan, current_heading: float,
               config: Optional[BoatConfig] = None,
               wind: Optional[WindField] = None,
               use_propeller: bool = True) -> TackController:
    """Build a controller armed for one tack from the given heading."""
    ctrl = TackController(config if config is not None else BoatConfig.variant("hybrid"),
                          wind if wind is not None else WindField(),
                          use_propeller=use_propeller)
    ctrl.start_tack(plan, current_heading)
    return ctrl
