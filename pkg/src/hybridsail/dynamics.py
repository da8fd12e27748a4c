"""Deterministic 3-DOF (surge, sway, yaw) dynamics of a twin-hull model sailboat.

Force models: quasi-steady lift/drag sail, quadratic hull drag, speed-coupled
rudder moment, and per-hull electric propellers with a PWM deadband. A fixed
step classical Runge-Kutta integrator advances the state; everything in this
module is a pure function over value types, so independent simulations can
run concurrently without sharing anything.

Conventions
-----------
World frame: x/y in meters, heading psi in (-pi, pi] measured from the +x
axis toward +y. Body frame: u surge (forward), v sway, yaw rate r; positive
r swings the bow toward the +y-rotation side, which we label starboard.
With that labeling a thrusting left propeller yields positive yaw moment,
i.e. a turn to starboard, matching how a real boat responds.

Wind direction is the direction the wind blows TOWARD (a wind with
direction pi blows along -x).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, replace
from typing import Optional

import numpy as np

AIR_DENSITY = 1.225  # kg/m^3

_TAU = math.tau
_HALF_PI = 0.5 * math.pi


class ConfigError(ValueError):
    """A configuration value violates its documented range."""


class NumericalBlowup(RuntimeError):
    """A state fed to (or produced by) the integrator stopped being finite."""

    def __init__(self, state: "BoatState", where: str):
        self.state = state
        super().__init__(f"non-finite boat state ({where}): {state}")


def normalize_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi].

    Uses IEEE remainder, which is exact and odd-symmetric, so mirrored
    simulations stay bit-identical mirror images of each other.
    """
    r = math.remainder(angle, _TAU)
    if r <= -math.pi:
        r += _TAU
    return r


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass
class BoatState:
    """Planar pose and body-frame velocities at one instant."""

    x: float = 0.0    # m, world
    y: float = 0.0    # m, world
    psi: float = 0.0  # rad, (-pi, pi]
    u: float = 0.0    # m/s surge
    v: float = 0.0    # m/s sway
    r: float = 0.0    # rad/s yaw rate
    t: float = 0.0    # s simulation time

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.x, self.y, self.psi, self.u, self.v, self.r, self.t)))


@dataclass
class WindField:
    """True wind: constant direction, optionally gusty speed.

    Gusts are an Ornstein-Uhlenbeck style filtered noise on speed only,
    clamped to +/- 2*gust_sigma so the shipped defaults (1.3 m/s, sigma
    0.05) keep the instantaneous speed inside the 1.2-1.4 m/s band. With
    gust_sigma = 0 the field is exactly constant.
    """

    speed: float = 1.3        # m/s
    direction: float = math.pi  # rad, blows toward
    gust_sigma: float = 0.0   # m/s
    gust_tau: float = 1.0     # s
    seed: int = 0

    def __post_init__(self):
        if not self.speed >= 0.0:
            raise ConfigError(f"wind.speed must be >= 0, got {self.speed}")
        if self.gust_sigma < 0.0:
            raise ConfigError(f"wind.gust_sigma must be >= 0, got {self.gust_sigma}")
        if not self.gust_tau > 0.0:
            raise ConfigError(f"wind.gust_tau must be > 0, got {self.gust_tau}")


class WindSampler:
    """Deterministic gust realization for one simulation run.

    Samples an OU lattice lazily with a sequential RNG, so the value at any
    time depends only on (seed, extra) and never on dt or on the order of
    queries. Linear interpolation keeps the speed continuous between lattice
    points.
    """

    def __init__(self, field: WindField, extra: Optional[int] = None):
        self.field = field
        self._sigma = field.gust_sigma
        if self._sigma > 0.0:
            self._dt = clamp(field.gust_tau / 10.0, 0.01, 0.25)
            self._phi = math.exp(-self._dt / field.gust_tau)
            self._drive = self._sigma * math.sqrt(1.0 - self._phi * self._phi)
            entropy = [field.seed] if extra is None else [field.seed, extra]
            self._rng = np.random.default_rng(np.random.SeedSequence(entropy))
            self._lattice = [0.0]

    def speed_at(self, t: float) -> float:
        if self._sigma == 0.0:
            return self.field.speed
        pos = max(t, 0.0) / self._dt
        k = int(pos)
        lattice = self._lattice
        while len(lattice) < k + 2:
            lattice.append(lattice[-1] * self._phi + self._drive * float(self._rng.standard_normal()))
        frac = pos - k
        gust = lattice[k] * (1.0 - frac) + lattice[k + 1] * frac
        band = 2.0 * self._sigma
        return max(self.field.speed + clamp(gust, -band, band), 0.0)

    def direction_at(self, t: float) -> float:
        return self.field.direction


@dataclass
class BoatConfig:
    """Mass, hull, sail, rudder and propeller parameters.

    Three named variants are shipped (`variant`): "baseline" is the stock
    0.414 kg boat, "heavy" carries the retrofit mass without propellers,
    "hybrid" adds submerged propellers (appendage drag + thrust).
    """

    mass: float               # kg
    yaw_inertia: float        # kg m^2
    hull_len: float           # m
    hull_sep: float           # m between hull centerlines
    drag_u: float             # N s^2/m^2 quadratic surge drag
    drag_v: float             # N s^2/m^2 quadratic sway drag
    drag_r: float             # N m s^2 quadratic yaw drag
    appendage_drag_u: float   # N s^2/m^2 extra surge drag from submerged props
    sail_area: float          # m^2
    sail_cl_max: float        # peak lift coefficient
    sail_cd0: float           # parasitic drag coefficient
    sail_cd1: float           # drag growth with attack angle
    sail_lag_tau: float       # s, first-order sail force response
    rudder_gain: float        # N m s^2/m^2 / rad
    rudder_max: float         # rad
    prop_kT: float            # N per PWM % above deadband
    prop_deadband: float      # PWM %
    prop_offset: float        # m, lateral offset of each propeller

    def __post_init__(self):
        bad = []
        if not self.mass > 0.0:
            bad.append(f"mass={self.mass}")
        if not self.yaw_inertia > 0.0:
            bad.append(f"yaw_inertia={self.yaw_inertia}")
        for name in ("drag_u", "drag_v", "drag_r", "appendage_drag_u"):
            if getattr(self, name) < 0.0:
                bad.append(f"{name}={getattr(self, name)}")
        if not 0.0 <= self.prop_deadband < 100.0:
            bad.append(f"prop_deadband={self.prop_deadband}")
        if self.prop_kT < 0.0:
            bad.append(f"prop_kT={self.prop_kT}")
        if not self.sail_lag_tau > 0.0:
            bad.append(f"sail_lag_tau={self.sail_lag_tau}")
        if not self.rudder_max > 0.0:
            bad.append(f"rudder_max={self.rudder_max}")
        if bad:
            raise ConfigError("invalid BoatConfig: " + ", ".join(bad))

    @classmethod
    def variant(cls, name: str, **overrides) -> "BoatConfig":
        try:
            base = dict(_VARIANTS[name])
        except KeyError:
            raise ConfigError(f"unknown variant {name!r}, expected one of {sorted(_VARIANTS)}")
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BoatConfig":
        fields = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - fields
        if unknown:
            raise ConfigError(f"unknown BoatConfig fields: {sorted(unknown)}")
        missing = fields - set(data)
        if missing:
            raise ConfigError(f"missing BoatConfig fields: {sorted(missing)}")
        return cls(**data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BoatConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# Shared geometry / rig for every variant; the masses come from the weighed
# boats (0.414 kg stock, +0.277 kg retrofit). Hull surge/sway drag of the
# loaded boats scales with displacement^(2/3) (deeper draft, more wetted
# surface); their yaw drag carries the calibrated loaded-hull value, which
# the thrust calibration pins jointly with prop_kT so the assisted 120
# degree turn times land on the published averages. The retrofit mass
# spread along the hulls raises yaw inertia slightly faster than mass.
_COMMON = dict(
    hull_len=0.6,
    hull_sep=0.18,
    sail_area=0.08,
    sail_cl_max=0.8,
    sail_cd0=0.30,
    sail_cd1=0.70,
    sail_lag_tau=0.3,
    rudder_max=math.radians(30.0),
    rudder_gain=1.0,
    prop_offset=0.09,
    prop_deadband=10.8,
)

_WETTED = (0.691 / 0.414) ** (2.0 / 3.0)  # displacement-scaled drag factor

_BASE_DRAG = dict(drag_u=0.15, drag_v=25.0, drag_r=0.02)
_LOADED_DRAG = dict(drag_u=0.15 * _WETTED, drag_v=25.0 * _WETTED, drag_r=0.07624)

_VARIANTS = {
    "baseline": dict(_COMMON, **_BASE_DRAG, mass=0.414, yaw_inertia=0.0136,
                     appendage_drag_u=0.0, prop_kT=0.0),
    "heavy": dict(_COMMON, **_LOADED_DRAG, mass=0.691, yaw_inertia=0.0241,
                  appendage_drag_u=0.0, prop_kT=0.0),
    "hybrid": dict(_COMMON, **_LOADED_DRAG, mass=0.691, yaw_inertia=0.0241,
                   appendage_drag_u=0.02, prop_kT=0.03709),
}


@dataclass
class ActuatorCommand:
    """Commanded sheet angle, rudder angle, and per-propeller duty cycle."""

    sail_angle: float = 0.0       # rad, 0 = fully sheeted in
    sail_released: bool = False   # sheet let fully out
    rudder_angle: float = 0.0     # rad
    pwm_left: float = 0.0         # duty %
    pwm_right: float = 0.0        # duty %

    def clamped(self, config: BoatConfig) -> tuple["ActuatorCommand", list[str]]:
        """Clamp channels to actuator limits; report which fields moved."""
        flagged = []
        sail = clamp(self.sail_angle, 0.0, _HALF_PI)
        rudder = clamp(self.rudder_angle, -config.rudder_max, config.rudder_max)
        pl = clamp(self.pwm_left, 0.0, 100.0)
        pr = clamp(self.pwm_right, 0.0, 100.0)
        for name, new, old in (
            ("sail_angle", sail, self.sail_angle),
            ("rudder_angle", rudder, self.rudder_angle),
            ("pwm_left", pl, self.pwm_left),
            ("pwm_right", pr, self.pwm_right),
        ):
            if new != old:
                flagged.append(name)
        cmd = ActuatorCommand(sail, self.sail_released, rudder, pl, pr)
        return cmd, flagged


@dataclass
class ActuatorState:
    """Applied actuator channels plus the lag-filtered sail effectiveness.

    sail_force_scale relaxes toward 0 when the sheet is released and toward
    1 when sheeted, with time constant sail_lag_tau ("several 100 ms" of
    sail response).
    """

    sail_angle: float = 0.0
    sail_released: bool = False
    rudder_angle: float = 0.0
    pwm_left: float = 0.0
    pwm_right: float = 0.0
    sail_force_scale: float = 1.0


# ---------------------------------------------------------------------------
# Force models
# ---------------------------------------------------------------------------

def apparent_wind(state: BoatState, wind: WindField, t: Optional[float] = None,
                  sampler: Optional[WindSampler] = None) -> tuple[float, float]:
    """Apparent wind (speed, direction-of-travel) in the body frame.

    Plain vector subtraction of the boat velocity from the true wind. The
    returned angle is where the apparent wind blows toward, measured from
    the bow: a boat at rest in a wind blowing along -x with psi = 0 sees
    (speed, pi), i.e. a pure headwind.
    """
    if t is None:
        t = state.t
    ws = sampler.speed_at(t) if sampler is not None else wind.speed
    wd = wind.direction
    c = math.cos(state.psi)
    s = math.sin(state.psi)
    ax = ws * math.cos(wd) - (state.u * c - state.v * s)
    ay = ws * math.sin(wd) - (state.u * s + state.v * c)
    axb = c * ax + s * ay
    ayb = -s * ax + c * ay
    va = math.hypot(axb, ayb)
    alpha = math.atan2(ayb, axb)
    return va, alpha


def sail_force(config: BoatConfig, va: float, alpha: float,
               act: ActuatorState) -> tuple[float, float]:
    """Body-frame sail force from a quasi-steady lift/drag model.

    The boom swings to the side the wind pushes it; the sheet angle
    (act.sail_angle) limits how far. Lift/drag follow
    CL = cl_max*sin(2a), CD = cd0 + cd1*(1 - cos 2a) in the attack angle a
    of the apparent wind on the sail chord. Grows with va^2 and is scaled
    by the lag-filtered sail_force_scale. With the shipped coefficients the
    best achievable trim produces no forward drive within ~41 degrees of
    dead upwind: the no-go zone is emergent, not special-cased.
    """
    scale = act.sail_force_scale
    if va <= 0.0 or scale <= 0.0:
        return 0.0, 0.0
    trim = clamp(act.sail_angle, 0.0, _HALF_PI)
    sa = math.sin(alpha)
    side = 1.0 if sa > 0.0 else -1.0 if sa < 0.0 else 0.0
    # Chord sits at alpha_chord = pi - side*trim; only 2x the attack angle
    # (alpha - alpha_chord) enters the coefficients, and both sin and cos of
    # it are pi-periodic, so the pi offset drops out exactly.
    two_attack = 2.0 * (alpha + side * trim)
    cl = config.sail_cl_max * math.sin(two_attack)
    cd = config.sail_cd0 + config.sail_cd1 * (1.0 - math.cos(two_attack))
    q = 0.5 * AIR_DENSITY * config.sail_area * va * va * scale
    ca = math.cos(alpha)
    fx = q * (cd * ca - cl * sa)
    fy = q * (cd * sa + cl * ca)
    return fx, fy


def hull_drag(config: BoatConfig, u: float, v: float, r: float) -> tuple[float, float, float]:
    """Quadratic opposing hull drag (force x/y, yaw moment).

    The hybrid variant's submerged propellers add appendage_drag_u to the
    surge term; that is the whole hydraulic penalty of the retrofit.
    """
    fx = -(config.drag_u + config.appendage_drag_u) * u * abs(u)
    fy = -config.drag_v * v * abs(v)
    mz = -config.drag_r * r * abs(r)
    return fx, fy, mz


def rudder_moment(config: BoatConfig, rudder_angle: float, u: float) -> float:
    """Yaw moment of the rudder: -gain * angle * u*|u|.

    Proportional to flow speed squared, so a stalled boat has no steering
    authority at all; that is exactly why a boat stuck head-to-wind cannot
    finish its turn.
    """
    return -config.rudder_gain * rudder_angle * u * abs(u)


def propeller_forces(config: BoatConfig, pwm_left: float, pwm_right: float) -> tuple[float, float]:
    """Surge force and yaw moment from the two propellers.

    Thrust is linear in duty above a deadband: T(p) = kT * max(0, p - deadband).
    Fx = T_L + T_R and Mz = (T_L - T_R) * prop_offset, so a lone left
    propeller pushes forward and turns the boat to starboard.
    """
    tl = config.prop_kT * max(0.0, pwm_left - config.prop_deadband)
    tr = config.prop_kT * max(0.0, pwm_right - config.prop_deadband)
    return tl + tr, (tl - tr) * config.prop_offset


def derivatives(state: BoatState, act: ActuatorState, wind: WindField,
                config: BoatConfig, t: Optional[float] = None,
                sampler: Optional[WindSampler] = None) -> BoatState:
    """Time derivative of the boat state under the current actuator state.

    Newton-Euler planar equations with the centripetal coupling terms:
    m*du/dt = sum Fx + m*v*r, m*dv/dt = sum Fy - m*u*r, Izz*dr/dt = sum Mz.
    Returned packaged as a BoatState whose fields hold the rates (the t
    slot carries dt/dt = 1).
    """
    if t is None:
        t = state.t
    va, alpha = apparent_wind(state, wind, t, sampler)
    sfx, sfy = sail_force(config, va, alpha, act)
    dfx, dfy, dmz = hull_drag(config, state.u, state.v, state.r)
    pfx, pmz = propeller_forces(config, act.pwm_left, act.pwm_right)
    rmz = rudder_moment(config, act.rudder_angle, state.u)
    inv_m = 1.0 / config.mass
    du = (sfx + dfx + pfx) * inv_m + state.v * state.r
    dv = (sfy + dfy) * inv_m - state.u * state.r
    dr = (dmz + pmz + rmz) / config.yaw_inertia
    c = math.cos(state.psi)
    s = math.sin(state.psi)
    dx = state.u * c - state.v * s
    dy = state.u * s + state.v * c
    return BoatState(x=dx, y=dy, psi=state.r, u=du, v=dv, r=dr, t=1.0)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def _derivs(config: BoatConfig, wind_speed: float, wind_dir: float,
            x: float, y: float, psi: float, u: float, v: float, r: float,
            trim: float, scale: float, rudder: float, pwml: float, pwmr: float):
    """Scalar hot-path version of `derivatives` (one tuple, no allocation churn)."""
    c = math.cos(psi)
    s = math.sin(psi)
    ax = wind_speed * math.cos(wind_dir) - (u * c - v * s)
    ay = wind_speed * math.sin(wind_dir) - (u * s + v * c)
    axb = c * ax + s * ay
    ayb = -s * ax + c * ay
    va2 = axb * axb + ayb * ayb

    sfx = sfy = 0.0
    if va2 > 0.0 and scale > 0.0:
        alpha = math.atan2(ayb, axb)
        sa = math.sin(alpha)
        side = 1.0 if sa > 0.0 else -1.0 if sa < 0.0 else 0.0
        two_attack = 2.0 * (alpha + side * trim)
        cl = config.sail_cl_max * math.sin(two_attack)
        cd = config.sail_cd0 + config.sail_cd1 * (1.0 - math.cos(two_attack))
        q = 0.5 * AIR_DENSITY * config.sail_area * va2 * scale
        ca = math.cos(alpha)
        sfx = q * (cd * ca - cl * sa)
        sfy = q * (cd * sa + cl * ca)

    tl = config.prop_kT * max(0.0, pwml - config.prop_deadband)
    tr = config.prop_kT * max(0.0, pwmr - config.prop_deadband)

    fx = sfx - (config.drag_u + config.appendage_drag_u) * u * abs(u) + tl + tr
    fy = sfy - config.drag_v * v * abs(v)
    mz = (-config.drag_r * r * abs(r)
          - config.rudder_gain * rudder * u * abs(u)
          + (tl - tr) * config.prop_offset)

    inv_m = 1.0 / config.mass
    return (u * c - v * s,
            u * s + v * c,
            r,
            fx * inv_m + v * r,
            fy * inv_m - u * r,
            mz / config.yaw_inertia)


def step(state: BoatState, act: ActuatorState, cmd: ActuatorCommand,
         wind: WindField, config: BoatConfig, dt: float,
         sampler: Optional[WindSampler] = None) -> tuple[BoatState, ActuatorState]:
    """Advance one fixed step: apply the command, advance the sail lag
    filter, integrate the dynamics with classical RK4.

    dt must lie in (0, 0.1]. The sail lag filter is advanced exactly
    (analytic exponential) and sampled at the RK4 stage times, so a fading
    sail does not degrade the integrator order. Identical inputs (including
    the wind seed) produce bit-identical outputs. psi is renormalized to
    (-pi, pi] after the step.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError(f"dt must be in (0, 0.1], got {dt}")
    if not state.is_finite():
        raise NumericalBlowup(state, "input")

    cmd, _ = cmd.clamped(config)
    target = 0.0 if cmd.sail_released else 1.0
    s0 = act.sail_force_scale
    tau = config.sail_lag_tau

    def scale_at(offset: float) -> float:
        return target + (s0 - target) * math.exp(-offset / tau)

    t0 = state.t
    if sampler is not None:
        ws0 = sampler.speed_at(t0)
        wsh = sampler.speed_at(t0 + 0.5 * dt)
        ws1 = sampler.speed_at(t0 + dt)
    else:
        ws0 = wsh = ws1 = wind.speed
    wd = wind.direction
    trim = cmd.sail_angle
    rudder = cmd.rudder_angle
    pl = cmd.pwm_left
    pr = cmd.pwm_right
    sc0 = scale_at(0.0)
    sch = scale_at(0.5 * dt)
    sc1 = scale_at(dt)

    x, y, psi, u, v, r = state.x, state.y, state.psi, state.u, state.v, state.r
    h = 0.5 * dt
    try:
        k1 = _derivs(config, ws0, wd, x, y, psi, u, v, r, trim, sc0, rudder, pl, pr)
        k2 = _derivs(config, wsh, wd,
                     x + h * k1[0], y + h * k1[1], psi + h * k1[2],
                     u + h * k1[3], v + h * k1[4], r + h * k1[5],
                     trim, sch, rudder, pl, pr)
        k3 = _derivs(config, wsh, wd,
                     x + h * k2[0], y + h * k2[1], psi + h * k2[2],
                     u + h * k2[3], v + h * k2[4], r + h * k2[5],
                     trim, sch, rudder, pl, pr)
        k4 = _derivs(config, ws1, wd,
                     x + dt * k3[0], y + dt * k3[1], psi + dt * k3[2],
                     u + dt * k3[3], v + dt * k3[4], r + dt * k3[5],
                     trim, sc1, rudder, pl, pr)
    except (ValueError, OverflowError):
        raise NumericalBlowup(state, "stage overflow") from None
    w = dt / 6.0
    new = BoatState(
        x=x + w * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
        y=y + w * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
        psi=psi + w * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]),
        u=u + w * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3]),
        v=v + w * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4]),
        r=r + w * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5]),
        t=t0 + dt,
    )
    if not new.is_finite():
        raise NumericalBlowup(new, "output")
    new.psi = normalize_angle(new.psi)
    new_act = ActuatorState(
        sail_angle=cmd.sail_angle,
        sail_released=cmd.sail_released,
        rudder_angle=cmd.rudder_angle,
        pwm_left=cmd.pwm_left,
        pwm_right=cmd.pwm_right,
        sail_force_scale=clamp(sc1, 0.0, 1.0),
    )
    return new, new_act


class Simulator:
    """Owns one stepping loop: boat state, actuator lag state, gust stream.

    `wind_extra` folds extra entropy (e.g. a trial index) into the gust
    seed so Monte Carlo trials get independent but reproducible gust
    realizations.
    """

    def __init__(self, config: BoatConfig, wind: WindField,
                 state: Optional[BoatState] = None,
                 act: Optional[ActuatorState] = None,
                 wind_extra: Optional[int] = None):
        self.config = config
        self.wind = wind
        self.state = state if state is not None else BoatState()
        self.act = act if act is not None else ActuatorState()
        self.sampler = WindSampler(wind, wind_extra) if wind.gust_sigma > 0.0 else None

    def step(self, cmd: ActuatorCommand, dt: float = 0.01) -> BoatState:
        self.state, self.act = step(self.state, self.act, cmd, self.wind,
                                    self.config, dt, self.sampler)
        return self.state

    def wind_speed_now(self) -> float:
        if self.sampler is None:
            return self.wind.speed
        return self.sampler.speed_at(self.state.t)


def steady_sailing_speed(config: BoatConfig, wind: WindField, psi: float,
                         trim_fn, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Steady straight-line surge speed at a fixed heading.

    Fixed-point solve of drive(apparent wind at u) = quadratic surge drag,
    with the sheet trimmed by trim_fn(apparent angle off the bow). Used to
    start turn trials from a realistic close-hauled cruise instead of
    burning simulated seconds accelerating from rest.
    """
    drag = config.drag_u + config.appendage_drag_u
    act = ActuatorState()
    u = 0.0
    for _ in range(max_iter):
        st = BoatState(psi=psi, u=u)
        va, alpha = apparent_wind(st, wind)
        beta = math.pi - abs(alpha)  # wind-from angle off the bow
        act.sail_angle = trim_fn(beta)
        fx, _ = sail_force(config, va, alpha, act)
        if fx <= 0.0:
            new_u = 0.0
        else:
            new_u = math.sqrt(fx / drag)
        # damped update keeps the iteration contractive near the fixed point
        new_u = 0.5 * (u + new_u)
        if abs(new_u - u) < tol:
            return new_u
        u = new_u
    return u
