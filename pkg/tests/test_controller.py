"""Tacking state machine: sequencing, capture, status, mirror symmetry."""

import math

import pytest

from hybridsail.controller import (
    IN_PROGRESS,
    SUCCESS,
    FAILURE,
    InvalidPlanError,
    Phase,
    TackController,
    TackPlan,
    begin_tack,
    closehauled_trim,
    in_no_go,
)
from hybridsail.dynamics import BoatConfig, BoatState, Simulator, WindField

WIND = WindField(speed=1.3, direction=math.pi)
HYBRID = BoatConfig.variant("hybrid")


def make_plan(**kw):
    kw.setdefault("pwm_max_on_time", 2.0)
    return TackPlan(**kw)


def run_closed_loop(ctrl, sim, dt=0.01, extra_after_done=0.0, max_t=60.0):
    """Step simulator+controller until the tack resolves; returns command trace."""
    trace = []
    done_at = None
    while sim.state.t < max_t:
        cmd = ctrl.update(sim.state)
        trace.append((sim.state.t, cmd, sim.state.psi))
        sim.step(cmd, dt)
        if ctrl.phase in (Phase.DONE, Phase.FAILED):
            if done_at is None:
                done_at = sim.state.t
            if sim.state.t - done_at >= extra_after_done:
                break
    return trace


class TestTrim:
    def test_hard_on_the_wind(self):
        assert closehauled_trim(0.0) == 0.0
        assert closehauled_trim(math.radians(25.0)) == 0.0

    def test_run_is_square(self):
        assert closehauled_trim(math.pi) == pytest.approx(math.radians(90.0))

    def test_monotone_easing(self):
        vals = [closehauled_trim(math.radians(b)) for b in range(0, 181, 5)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_symmetric(self):
        assert closehauled_trim(-1.0) == closehauled_trim(1.0)


class TestNoGo:
    def test_dead_upwind(self):
        assert in_no_go(0.0, math.pi)  # wind blows toward -x: upwind is +x

    def test_dead_downwind(self):
        assert not in_no_go(math.pi, math.pi)

    def test_boundary_closed(self):
        half = math.radians(41.0)
        assert in_no_go(half, math.pi, half)

    def test_outside(self):
        assert not in_no_go(math.radians(45.0), math.pi, math.radians(41.0))


class TestPlanValidation:
    def test_valid_default(self):
        make_plan().validate()

    def test_diagnostics_name_fields(self):
        plan = TackPlan(heading_tolerance=0.0, pwm_level=150.0,
                        pwm_max_on_time=-1.0, turn_direction="widdershins")
        with pytest.raises(InvalidPlanError) as err:
            plan.validate()
        text = str(err.value)
        for name in ("heading_tolerance", "pwm_level", "pwm_max_on_time", "turn_direction"):
            assert name in text

    def test_timeout_must_exceed_on_time(self):
        with pytest.raises(InvalidPlanError, match="timeout"):
            make_plan(pwm_max_on_time=20.0, timeout=10.0).validate()


class TestBeginTack:
    def test_starboard_from_minus_sixty(self):
        ctrl = begin_tack(make_plan(turn_direction="starboard"), math.radians(-60.0))
        assert ctrl.desired == pytest.approx(math.radians(60.0))
        assert ctrl.phase is Phase.RUDDER_TURN

    def test_degenerate_zero_change(self):
        ctrl = begin_tack(make_plan(target_heading_change=0.0), 0.3)
        assert ctrl.phase is Phase.DONE
        assert ctrl.status().kind == SUCCESS
        assert ctrl.status().turn_time == 0.0

    def test_wrap_arithmetic(self):
        ctrl = begin_tack(make_plan(turn_direction="starboard"), math.radians(170.0))
        assert ctrl.desired == pytest.approx(math.radians(-70.0))

    def test_invalid_plan_rejected(self):
        with pytest.raises(InvalidPlanError):
            begin_tack(TackPlan(pwm_max_on_time=None), 0.0)

    def test_cannot_restart_mid_tack(self):
        ctrl = begin_tack(make_plan(), 0.0)
        with pytest.raises(RuntimeError):
            ctrl.start_tack(make_plan(), 0.0)


class TestSequencing:
    def test_rudder_leads_propeller(self):
        plan = make_plan(rudder_lead_time=0.2)
        sim = Simulator(HYBRID, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(plan, sim.state.psi, t=0.0)
        trace = run_closed_loop(ctrl, sim)
        t_rudder = next(t for t, cmd, _ in trace if cmd.rudder_angle != 0.0)
        t_pwm = next(t for t, cmd, _ in trace if cmd.pwm_left > 0 or cmd.pwm_right > 0)
        assert t_pwm - t_rudder >= plan.rudder_lead_time - 1e-9

    def test_external_is_left_for_starboard_turn(self):
        sim = Simulator(HYBRID, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(make_plan(turn_direction="starboard"), sim.state.psi, t=0.0)
        trace = run_closed_loop(ctrl, sim)
        lefts = [cmd.pwm_left for _, cmd, _ in trace if cmd.pwm_left > 0]
        rights = [cmd.pwm_right for _, cmd, _ in trace if cmd.pwm_right > 0]
        assert lefts and not rights

    def test_internal_never_commanded(self):
        for direction in ("port", "starboard"):
            psi0 = math.radians(60.0 if direction == "port" else -60.0)
            sim = Simulator(HYBRID, WIND, state=BoatState(psi=psi0, u=0.2))
            ctrl = TackController(HYBRID, WIND, use_propeller=True)
            ctrl.start_tack(make_plan(turn_direction=direction), psi0, t=0.0)
            trace = run_closed_loop(ctrl, sim)
            for _, cmd, _ in trace:
                assert cmd.pwm_left == 0.0 or cmd.pwm_right == 0.0
                internal = cmd.pwm_right if direction == "starboard" else cmd.pwm_left
                assert internal == 0.0

    def test_sail_released_during_assisted_turn(self):
        sim = Simulator(HYBRID, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(make_plan(), sim.state.psi, t=0.0)
        while ctrl.phase in (Phase.RUDDER_TURN, Phase.PROP_ASSIST):
            cmd = ctrl.update(sim.state)
            if ctrl.phase in (Phase.RUDDER_TURN, Phase.PROP_ASSIST):
                assert cmd.sail_released
            sim.step(cmd, 0.01)

    def test_prop_silent_after_capture(self):
        sim = Simulator(HYBRID, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(make_plan(), sim.state.psi, t=0.0)
        run_closed_loop(ctrl, sim)
        assert ctrl.status().kind == SUCCESS
        for _ in range(200):
            cmd = ctrl.update(sim.state)
            assert cmd.pwm_left == 0.0 and cmd.pwm_right == 0.0
            sim.step(cmd, 0.01)

    def test_capture_inside_tolerance_cuts_pwm(self):
        # drive a synthetic state straight to within tolerance mid-assist
        plan = make_plan()
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(plan, math.radians(-60.0), t=0.0)
        ctrl.update(BoatState(psi=math.radians(-60.0), t=0.0))
        cmd = ctrl.update(BoatState(psi=math.radians(-60.0), t=0.3))
        assert ctrl.phase is Phase.PROP_ASSIST and (cmd.pwm_left > 0 or cmd.pwm_right > 0)
        cmd = ctrl.update(BoatState(psi=math.radians(55.0), t=0.4))  # desired - 5 deg
        assert cmd.pwm_left == 0.0 and cmd.pwm_right == 0.0

    def test_bounded_on_time(self):
        plan = make_plan(pwm_max_on_time=0.5, timeout=12.0)
        # heavy rudder damping keeps the heading far from capture for a while
        cfg = BoatConfig.variant("hybrid", prop_kT=0.001)
        sim = Simulator(cfg, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(cfg, WIND, use_propeller=True)
        ctrl.start_tack(plan, sim.state.psi, t=0.0)
        on_time = 0.0
        while ctrl.phase not in (Phase.DONE, Phase.FAILED):
            cmd = ctrl.update(sim.state)
            if cmd.pwm_left > 0 or cmd.pwm_right > 0:
                on_time += 0.01
            sim.step(cmd, 0.01)
        assert on_time <= plan.pwm_max_on_time + 1e-9


class TestStatus:
    def test_in_progress(self):
        ctrl = begin_tack(make_plan(), math.radians(-60.0))
        assert ctrl.status().kind == IN_PROGRESS

    def test_success_turn_time_reported(self):
        sim = Simulator(HYBRID, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(make_plan(), sim.state.psi, t=0.0)
        run_closed_loop(ctrl, sim)
        status = ctrl.status()
        assert status.kind == SUCCESS
        assert 0.5 < status.turn_time < 6.0
        # settled heading within the +/-10 degree region
        err = abs((ctrl.desired - sim.state.psi + math.pi) % math.tau - math.pi)
        assert err <= math.radians(10.0) + 1e-6

    def test_timeout_failure_reason(self):
        plan = make_plan(pwm_max_on_time=0.2, timeout=1.0)
        cfg = BoatConfig.variant("hybrid", prop_kT=0.0)  # no thrust: cannot finish
        sim = Simulator(cfg, WIND, state=BoatState(psi=math.radians(-60.0), u=0.05))
        ctrl = TackController(cfg, WIND, use_propeller=True)
        ctrl.start_tack(plan, sim.state.psi, t=0.0)
        run_closed_loop(ctrl, sim)
        status = ctrl.status()
        assert status.kind == FAILURE
        assert status.reason in ("undershoot", "overshoot")

    def test_failed_commands_are_safe_stop(self):
        plan = make_plan(pwm_max_on_time=0.2, timeout=1.0)
        cfg = BoatConfig.variant("hybrid", prop_kT=0.0)
        sim = Simulator(cfg, WIND, state=BoatState(psi=math.radians(-60.0), u=0.05))
        ctrl = TackController(cfg, WIND, use_propeller=True)
        ctrl.start_tack(plan, sim.state.psi, t=0.0)
        run_closed_loop(ctrl, sim)
        cmd = ctrl.update(sim.state)
        assert ctrl.phase is Phase.FAILED
        assert cmd.rudder_angle == 0.0
        assert cmd.pwm_left == 0.0 and cmd.pwm_right == 0.0

    def test_events_logged_in_order(self):
        sim = Simulator(HYBRID, WIND, state=BoatState(psi=math.radians(-60.0), u=0.2))
        ctrl = TackController(HYBRID, WIND, use_propeller=True)
        ctrl.start_tack(make_plan(), sim.state.psi, t=0.0)
        run_closed_loop(ctrl, sim)
        tags = [tag for _, tag in ctrl.events()]
        assert tags == ["rudder_on", "prop_on", "prop_off", "done"]
        times = [t for t, _ in ctrl.events()]
        assert times == sorted(times)


def test_mirror_symmetry_of_command_trace():
    """Flipping turn_direction mirrors commands and trajectory exactly."""

    def run(sign):
        wind = WindField(speed=1.3, direction=sign * math.pi)
        psi0 = sign * math.radians(-60.0)
        sim = Simulator(HYBRID, wind, state=BoatState(psi=psi0, u=0.2))
        ctrl = TackController(HYBRID, wind, use_propeller=True)
        direction = "starboard" if sign > 0 else "port"
        ctrl.start_tack(make_plan(turn_direction=direction), psi0, t=0.0)
        trace = run_closed_loop(ctrl, sim, extra_after_done=1.0)
        return trace, ctrl

    fwd, ctrl_f = run(+1.0)
    mir, ctrl_m = run(-1.0)
    assert len(fwd) == len(mir)
    for (t1, c1, p1), (t2, c2, p2) in zip(fwd, mir):
        assert t1 == t2
        assert p1 == -p2
        assert c1.rudder_angle == -c2.rudder_angle
        assert c1.sail_angle == c2.sail_angle
        assert c1.sail_released == c2.sail_released
        assert c1.pwm_left == c2.pwm_right
        assert c1.pwm_right == c2.pwm_left
    assert ctrl_f.status().kind == ctrl_m.status().kind == SUCCESS
    assert ctrl_f.status().turn_time == ctrl_m.status().turn_time
