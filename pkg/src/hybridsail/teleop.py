"""Live-steering session engine and its wire message schemas.

The engine owns one simulation: a stepping loop, a latest-command cell
(new commands atomically replace pending ones, never queue), a command log
keyed by tick, and the trajectory log. Everything that happens is a pure
function of (scenario, seed, command log), so a recorded session replays
headlessly to a byte-identical trajectory CSV.

The network layer in `server` speaks these dicts as JSON text frames over
a websocket; this module has no I/O of its own and is what the tests

drive directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from hybridsail.dynamics import ActuatorCommand, BoatState, Simulator, clamp
from hybridsail.harness import Scenario, scenario_from_dict, scenario_to_dict
from hybridsail.logs import TrajectoryLog

PROTOCOL_VERSION = 1

DEFAULT_DT = 0.01
STEPS_PER_SECOND = 50       # wall-clock stepping rate of a live session
BROADCAST_HZ = 20


class ProtocolError(ValueError):
    """Malformed or out-of-contract client message."""


@dataclass
class SessionRecord:
    """Everything needed to replay a session bit-for-bit."""

    scenario: dict
    seed: int
    dt: float
    commands: list[dict] = field(default_factory=list)  # {tick, command fields}
    trajectory_csv: str = ""
    version: int = PROTOCOL_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "scenario": self.scenario,
            "seed": self.seed,
            "dt": self.dt,
            "commands": self.commands,
            "trajectory_csv": self.trajectory_csv,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionRecord":
        return cls(scenario=data["scenario"], seed=int(data["seed"]),
                   dt=float(data["dt"]), commands=list(data["commands"]),
                   trajectory_csv=data.get("trajectory_csv", ""),
                   version=int(data.get("version", PROTOCOL_VERSION)))


def command_from_dict(data: dict) -> ActuatorCommand:
    try:
        return ActuatorCommand(
            sail_angle=float(data.get("sail_angle", 0.0)),
            sail_released=bool(data.get("sail_released", False)),
            rudder_angle=float(data.get("rudder_angle", 0.0)),
            pwm_left=float(data.get("pwm_left", 0.0)),
            pwm_right=float(data.get("pwm_right", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"bad command field: {exc}")


def command_to_dict(cmd: ActuatorCommand) -> dict:
    return {
        "sail_angle": cmd.sail_angle,
        "sail_released": cmd.sail_released,
        "rudder_angle": cmd.rudder_angle,
        "pwm_left": cmd.pwm_left,
        "pwm_right": cmd.pwm_right,
    }


class SessionEngine:
    """One teleoperated simulation session (no sockets in here)."""

    def __init__(self, scenario: Scenario, seed: int = 0, dt: float = DEFAULT_DT):
        self.scenario = scenario
        self.seed = seed
        self.dt = dt
        self.paused = False
        self.rate = 1.0
        self.tick = 0
        self._pending: Optional[ActuatorCommand] = None
        self._clamped_fields: list[str] = []
        self._applied = ActuatorCommand()
        self.record = SessionRecord(scenario=scenario_to_dict(scenario), seed=seed, dt=dt)
        self.log = TrajectoryLog(with_events=True)
        self._build_sim()

    def _build_sim(self) -> None:
        sc = self.scenario
        state = BoatState(x=sc.start_x, y=sc.start_y, psi=sc.start_heading)
        self.sim = Simulator(sc.config(), sc.wind, state=state, wind_extra=self.seed)

    # -- client inputs -------------------------------------------------------

    def submit_command(self, data: dict) -> None:
        """Latest command wins: replaces any not-yet-applied command whole."""
        cmd = command_from_dict(data)
        clamped, flagged = cmd.clamped(self.sim.config)
        self._pending = clamped
        self._clamped_fields = flagged

    def control(self, data: dict) -> Optional[dict]:
        """Apply a session-control message; may return a reply payload."""
        if "rate" in data:
            rate = float(data["rate"])
            if not 0.0 < rate <= 10.0:
                raise ProtocolError(f"rate out of range: {rate}")
            self.rate = rate
        if data.get("pause"):
            self.paused = True
        if data.get("resume"):
            self.paused = False
        if "seed" in data and data["seed"] is not None:
            self.seed = int(data["seed"])
        if "scenario" in data and data["scenario"] is not None:
            self.scenario = scenario_from_dict(data["scenario"])
        if data.get("reset") or "seed" in data or "scenario" in data:
            self.reset()
        if data.get("export"):
            return {"type": "session_record", "version": PROTOCOL_VERSION,
                    **self.finish().to_dict()}
        return None

    def reset(self) -> None:
        self.tick = 0
        self._pending = None
        self._clamped_fields = []
        self._applied = ActuatorCommand()
        self.record = SessionRecord(scenario=scenario_to_dict(self.scenario),
                                    seed=self.seed, dt=self.dt)
        self.log = TrajectoryLog(with_events=True)
        self._build_sim()

    # -- stepping -------------------------------------------------------------

    def step_once(self) -> None:
        """Advance one physics step; applies the freshest command atomically."""
        if self.paused:
            return
        if self._pending is not None:
            self._applied = self._pending
            self.record.commands.append(
                {"tick": self.tick, **command_to_dict(self._applied)})
            self._pending = None
        self.log.append(self.sim.state, self._applied)
        self.sim.step(self._applied, self.dt)
        self.tick += 1

    # -- outputs ---------------------------------------------------------------

    def broadcast(self) -> dict:
        st = self.sim.state
        return {
            "type": "state",
            "version": PROTOCOL_VERSION,
            "tick": self.tick,
            "t": st.t,
            "x": st.x,
            "y": st.y,
            "psi": st.psi,
            "u": st.u,
            "v": st.v,
            "r": st.r,
            "wind_speed": self.sim.wind_speed_now(),
            "wind_dir": self.sim.wind.direction,
            "actuator": command_to_dict(self._applied),
            "sail_force_scale": self.sim.act.sail_force_scale,
            "clamped": list(self._clamped_fields),
            "events": [],
            "paused": self.paused,
        }

    def hello(self) -> dict:
        sc = self.scenario
        return {
            "type": "hello",
            "version": PROTOCOL_VERSION,
            "scenario": scenario_to_dict(sc),
            "seed": self.seed,
            "dt": self.dt,
            "steps_per_second": STEPS_PER_SECOND,
            "broadcast_hz": BROADCAST_HZ,
        }

    def finish(self) -> SessionRecord:
        self.record.trajectory_csv = self.log.to_csv()
        return self.record


def replay_session(record: SessionRecord) -> str:
    """Headless replay: returns the trajectory CSV text for the record.

    Applying the logged commands at their recorded ticks against the same
    scenario and seed reproduces the live trajectory byte-for-byte.
    """
    scenario = scenario_from_dict(record.scenario)
    engine = SessionEngine(scenario, seed=record.seed, dt=record.dt)
    by_tick = {int(c["tick"]): c for c in record.commands}
    last_tick = max(by_tick) if by_tick else -1
    total = max(_csv_rows(record.trajectory_csv), last_tick + 1)
    for tick in range(total):
        if tick in by_tick:
            engine.submit_command(by_tick[tick])
        engine.step_once()
    return engine.log.to_csv()


def _csv_rows(csv_text: str) -> int:
    if not csv_text:
        return 0
    return max(csv_text.count("\n") - 1, 0)


def save_record(record: SessionRecord, path) -> None:
    with open(path, "w") as fh:
        json.dump(record.to_dict(), fh, indent=1)
        fh.write("\n")


def load_record(path) -> SessionRecord:
    with open(path) as fh:
        return SessionRecord.from_dict(json.load(fh))
