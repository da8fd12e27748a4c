"""Trajectory logging with fixed formatting.

The CSV layout is part of the artifact's contract: header
`t,x,y,psi,u,v,r,sail,rudder,pwm_l,pwm_r` with every float printed at six
decimals, so determinism checks can compare files byte for byte. Controller
phase transitions ride along in an optional trailing `event` column.
"""

from __future__ import annotations

import io
from typing import Iterable, Optional

from hybridsail.dynamics import ActuatorCommand, BoatState

BASE_HEADER = "t,x,y,psi,u,v,r,sail,rudder,pwm_l,pwm_r"


class TrajectoryLog:
    """Accumulates rows; renders to the canonical CSV text."""

    def __init__(self, with_events: bool = False):
        self.with_events = with_events
        self.rows: list[tuple] = []

    def append(self, state: BoatState, cmd: ActuatorCommand, event: str = "") -> None:
        row = (state.t, state.x, state.y, state.psi, state.u, state.v, state.r,
               cmd.sail_angle, cmd.rudder_angle, cmd.pwm_left, cmd.pwm_right)
        if self.with_events:
            row = row + (event,)
        self.rows.append(row)

    def positions(self) -> Iterable[tuple[float, float]]:
        for row in self.rows:
            yield row[1], row[2]

    def to_csv(self) -> str:
        out = io.StringIO()
        header = BASE_HEADER + ",event" if self.with_events else BASE_HEADER
        out.write(header + "\n")
        if self.with_events:
            for row in self.rows:
                out.write(",".join(f"{v:.6f}" for v in row[:-1]) + f",{row[-1]}\n")
        else:
            for row in self.rows:
                out.write(",".join(f"{v:.6f}" for v in row) + "\n")
        return out.getvalue()

    def save(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def __len__(self) -> int:
        return len(self.rows)


def read_trajectory(path) -> list[dict]:
    """Parse a trajectory CSV back into dict rows (floats, plus any event)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        row: dict = {}
        for name, val in zip(header, parts):
            row[name] = val if name == "event" else float(val)
        rows.append(row)
    return rows
