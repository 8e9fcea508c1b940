import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (CONTROL_PERIOD, PAYOUT_SPEED, RETRIEVAL_SPEED,
                      make_env, make_session, make_winch)
from probecast.controller import (CommandRejected, ControlInput,
                                  ControllerMode, acknowledge_fault,
                                  command_target_depth, control_step,
                                  controller_for, detect_stall, manual_step,
                                  set_underway)
from probecast.plant import RelayCommand


def idle_controller(**kwargs):
    return controller_for(make_winch(), **kwargs)


def make_input(depth, line_out=None, time=0.0):
    return ControlInput(fused_depth=depth,
                        line_out=depth if line_out is None else line_out,
                        asv_fix=(0.0, 0.0), time=time)


class TestCommandTargetDepth:
    def test_deploy_from_surface(self):
        ctrl = command_target_depth(idle_controller(), 5.0, make_winch())
        assert ctrl.mode is ControllerMode.DEPLOYING
        assert ctrl.target_depth == 5.0
        ctrl, relay = control_step(ctrl, make_input(0.0, 0.0, 0.0))
        assert relay is RelayCommand.PAYOUT

    def test_target_within_deadband_holds(self):
        ctrl = idle_controller()
        ctrl, _ = control_step(ctrl, make_input(5.0, 5.0, 0.0))
        ctrl = command_target_depth(ctrl, 5.03, make_winch())
        assert ctrl.mode is ControllerMode.HOLDING
        ctrl, relay = control_step(ctrl, make_input(5.0, 5.0, 0.1))
        assert relay is RelayCommand.OFF

    def test_target_beyond_spool_rejected(self):
        with pytest.raises(CommandRejected):
            command_target_depth(idle_controller(), 12.0, make_winch())
        with pytest.raises(CommandRejected):
            command_target_depth(idle_controller(), -1.0, make_winch())

    def test_rejected_while_faulted(self):
        ctrl = idle_controller()
        ctrl = ctrl.__class__(**{**ctrl.__dict__,
                                 "mode": ControllerMode.FAULT,
                                 "fault_reason": "stall during payout"})
        with pytest.raises(CommandRejected):
            command_target_depth(ctrl, 3.0, make_winch())


class TestBangBangLaw:
    def test_error_above_deadband_pays_out(self):
        ctrl = command_target_depth(idle_controller(), 5.0, make_winch())
        ctrl, relay = control_step(ctrl, make_input(4.0, 4.0, 0.0))
        assert relay is RelayCommand.PAYOUT
        assert ctrl.mode is ControllerMode.DEPLOYING

    def test_inside_deadband_goes_off_holding(self):
        ctrl = command_target_depth(idle_controller(), 5.0, make_winch())
        ctrl, relay = control_step(ctrl, make_input(5.03, 5.03, 0.0))
        assert relay is RelayCommand.OFF
        assert ctrl.mode is ControllerMode.HOLDING

    def test_error_below_negative_deadband_retrieves(self):
        ctrl = command_target_depth(idle_controller(), 5.0, make_winch())
        ctrl, relay = control_step(ctrl, make_input(6.0, 6.0, 0.0))
        assert relay is RelayCommand.RETRIEVE
        assert ctrl.mode is ControllerMode.RETRIEVING

    def test_deterministic(self):
        ctrl = command_target_depth(idle_controller(), 5.0, make_winch())
        inp = make_input(4.0, 4.0, 0.2)
        assert control_step(ctrl, inp) == control_step(ctrl, inp)

    def test_payout_suppressed_at_full_spool(self):
        ctrl = command_target_depth(idle_controller(), 10.0, make_winch())
        ctrl, relay = control_step(ctrl, make_input(8.0, 10.0, 0.0))
        assert relay is RelayCommand.OFF

    def test_retrieve_suppressed_at_empty_spool(self):
        ctrl = idle_controller()
        ctrl, _ = control_step(ctrl, make_input(0.0, 0.0, 0.0))
        ctrl = command_target_depth(ctrl, 0.0, make_winch())
        ctrl, relay = control_step(ctrl, make_input(0.2, 0.0, 0.1))
        assert relay is RelayCommand.OFF


class TestClosedLoopSettling:
    def test_settles_at_five_metres(self):
        session = make_session(initial_line_out=0.0)
        session.apply_command("set_target_depth", {"target_depth": 5.0})
        reversals = after_deadband_reversals(session, target=5.0,
                                             timeout=60.0)
        assert session.ctrl.mode is ControllerMode.HOLDING
        bound = session.ctrl.deadband + PAYOUT_SPEED * CONTROL_PERIOD
        assert abs(session.plant.probe_depth - 5.0) <= bound + 1e-9
        assert reversals == 0


def after_deadband_reversals(session, target, timeout):
    """Run until holding; count energised direction reversals after the
    first deadband entry."""
    relay_trace = []
    entered = [False]

    def watch(s):
        if abs(s.plant.probe_depth - target) <= s.ctrl.deadband:
            entered[0] = True
        if entered[0]:
            relay_trace.append(s.relay)
        return s.ctrl.mode is ControllerMode.HOLDING and s.plant.tether_taut \
            and abs(s.plant.probe_depth - target) <= 0.2

    session.run_until(watch, timeout=timeout)
    # settle a while longer to catch late reversals
    session.run_for(5.0)
    energised = [r for r in relay_trace
                 if r is not RelayCommand.OFF]
    reversals = sum(1 for a, b in zip(energised, energised[1:]) if a is not b)
    return reversals


class TestManualStep:
    def test_quarter_metre_down_duration(self):
        # arithmetic oracle: 0.25 m / 0.3556 m/s = 0.703 s, quantised up to
        # the next control tick
        session = make_session(initial_line_out=0.0)
        session.run_for(0.5)
        session.apply_command("manual_step",
                              {"direction": "down", "step_line": 0.25})
        on_times = []

        def watch(s):
            if s.relay is RelayCommand.PAYOUT:
                on_times.append(s.time)
            return s.ctrl.mode is ControllerMode.IDLE and \
                s.relay is RelayCommand.OFF and bool(on_times)

        assert session.run_until(watch, timeout=10.0)
        duration = on_times[-1] - on_times[0] + session.dt
        ideal = 0.25 / PAYOUT_SPEED
        assert ideal - session.dt <= duration <= ideal + CONTROL_PERIOD + 1e-9
        assert abs(session.plant.line_out - 0.25) <= \
            PAYOUT_SPEED * CONTROL_PERIOD + 1e-9

    def test_up_at_zero_line_is_clipped_noop(self):
        ctrl = idle_controller()
        ctrl, _ = control_step(ctrl, make_input(0.0, 0.0, 0.0))
        stepped = manual_step(ctrl, "up", 0.25)
        assert stepped.last_warning is not None
        assert stepped.manual_target_line is None
        assert stepped.mode is ctrl.mode

    def test_three_consecutive_metre_steps(self):
        session = make_session(initial_line_out=0.0)
        for _ in range(3):
            session.apply_command("manual_step",
                                  {"direction": "down", "step_line": 1.0})
            assert session.run_until(
                lambda s: s.ctrl.manual_target_line is None and
                s.relay is RelayCommand.OFF, timeout=20.0)
        assert abs(session.plant.line_out - 3.0) <= \
            3 * PAYOUT_SPEED * CONTROL_PERIOD + 1e-9

    def test_clipped_at_spool_bound(self):
        ctrl = idle_controller()
        ctrl, _ = control_step(ctrl, make_input(9.9, 9.9, 0.0))
        stepped = manual_step(ctrl, "down", 0.5)
        assert stepped.manual_target_line == pytest.approx(10.0)
        assert "clipped" in stepped.last_warning

    def test_rejects_bad_arguments(self):
        ctrl = idle_controller()
        with pytest.raises(CommandRejected):
            manual_step(ctrl, "sideways", 0.25)
        with pytest.raises(CommandRejected):
            manual_step(ctrl, "down", 0.0)


class TestSetUnderway:
    def test_from_six_metres(self):
        session = make_session(initial_line_out=6.0)
        session.run_for(0.2)
        session.apply_command("set_underway", {})
        saw_retrieving = [False]

        def watch(s):
            if s.ctrl.mode is ControllerMode.RETRIEVING:
                saw_retrieving[0] = True
            return s.ctrl.mode is ControllerMode.UNDERWAY

        assert session.run_until(watch, timeout=60.0)
        assert saw_retrieving[0]
        assert session.plant.probe_depth <= 0.3 + 1e-9

    def test_already_shallow_is_immediate(self):
        session = make_session(initial_line_out=0.2)
        session.run_for(0.2)
        session.apply_command("set_underway", {})
        assert session.ctrl.mode is ControllerMode.UNDERWAY

    def test_duration_from_ten_metres(self):
        # arithmetic oracle: (10 - 0.3) / 0.3302 = 29.4 s
        session = make_session(initial_line_out=10.0)
        session.run_for(0.2)
        start = session.time
        session.apply_command("set_underway", {})
        assert session.run_until(
            lambda s: s.ctrl.mode is ControllerMode.UNDERWAY, timeout=60.0)
        duration = session.time - start
        ideal = (10.0 - 0.3) / RETRIEVAL_SPEED
        assert abs(duration - ideal) <= 3 * CONTROL_PERIOD


class TestStallDetection:
    def test_vegetation_stall_fires_on_schedule(self):
        env = make_env(bottom_depth=10.0,
                       obstructions=[dict(lat=0.0, lon=0.0, radius_m=200.0,
                                          top_depth_m=4.0)])
        session = make_session(env=env, initial_line_out=0.0, stall_window=5.0)
        fault_times = []
        session.fault_listeners.append(lambda p: fault_times.append(p["time"]))
        session.apply_command("set_target_depth", {"target_depth": 8.0})
        pin_time = [None]

        def watch(s):
            if pin_time[0] is None and s.plant.probe_depth >= 4.0 - 1e-9:
                pin_time[0] = s.time
            return bool(fault_times)

        assert session.run_until(watch, timeout=60.0)
        delta = fault_times[0] - pin_time[0]
        assert abs(delta - 5.0) <= CONTROL_PERIOD + 1e-9
        assert "payout" in session.ctrl.fault_reason

    def test_relay_off_never_faults(self):
        ctrl = idle_controller()
        for i in range(1000):
            ctrl, relay = control_step(ctrl, make_input(2.0, 4.0, i * 0.1))
            assert relay is RelayCommand.OFF
            assert ctrl.mode is not ControllerMode.FAULT

    def test_nominal_full_cast_never_faults(self):
        session = make_session(initial_line_out=0.0, stall_epsilon=0.02)
        session.apply_command("set_target_depth", {"target_depth": 10.0})
        session.run_until(
            lambda s: s.ctrl.mode is ControllerMode.HOLDING, timeout=120.0)
        assert session.ctrl.mode is ControllerMode.HOLDING

    def test_stall_fires_during_retrieval_of_slack_line(self):
        # pinned probe with line still coming in: depth never moves, so the
        # supervisor aborts the retrieve within window + one period
        ctrl = idle_controller()
        ctrl, _ = control_step(ctrl, make_input(6.0, 8.0, 0.0))
        ctrl = command_target_depth(ctrl, 2.0, make_winch())
        fault_time = None
        for i in range(1, 120):
            t = i * 0.1
            line = max(0.0, 8.0 - 0.3302 * t)
            ctrl, _ = control_step(ctrl, make_input(6.0, line, t))
            if ctrl.mode is ControllerMode.FAULT:
                fault_time = t
                break
        assert fault_time is not None
        assert fault_time <= ctrl.stall_window + 0.1 + 1e-9
        assert "retrieval" in ctrl.fault_reason

    def test_detect_stall_rolls_reference_on_movement(self):
        ctrl = idle_controller()
        ctrl = command_target_depth(ctrl, 8.0, make_winch())
        ctrl, _ = control_step(ctrl, make_input(1.0, 1.0, 0.0))
        assert ctrl.stall_reference_depth == 1.0
        ctrl, _ = control_step(ctrl, make_input(1.5, 1.5, 0.1))
        assert ctrl.stall_reference_depth == 1.5
        assert ctrl.stall_reference_time == 0.1

    def test_fault_then_relay_off_until_ack(self):
        env = make_env(bottom_depth=10.0,
                       obstructions=[dict(lat=0.0, lon=0.0, radius_m=200.0,
                                          top_depth_m=4.0)])
        session = make_session(env=env, initial_line_out=0.0)
        session.apply_command("set_target_depth", {"target_depth": 8.0})
        session.run_until(
            lambda s: s.ctrl.mode is ControllerMode.FAULT, timeout=60.0)
        for _ in range(500):
            session.tick()
            assert session.relay is RelayCommand.OFF
        accepted, _ = session.apply_command(
            "set_target_depth", {"target_depth": 2.0})
        assert not accepted
        accepted, _ = session.apply_command("ack_fault", {})
        assert accepted
        assert session.ctrl.mode is ControllerMode.IDLE
        accepted, _ = session.apply_command(
            "set_target_depth", {"target_depth": 2.0})
        assert accepted


class TestAcknowledgeFault:
    def _faulted(self):
        ctrl = idle_controller()
        ctrl = command_target_depth(ctrl, 8.0, make_winch())
        for i in range(70):
            ctrl, _ = control_step(ctrl, make_input(4.0, 5.0, i * 0.1))
        assert ctrl.mode is ControllerMode.FAULT
        return ctrl

    def test_ack_clears_to_idle(self):
        ctrl = acknowledge_fault(self._faulted())
        assert ctrl.mode is ControllerMode.IDLE
        assert ctrl.fault_reason is None
        assert ctrl.relay_out is RelayCommand.OFF

    def test_double_ack_is_warning_noop(self):
        ctrl = acknowledge_fault(self._faulted())
        again = acknowledge_fault(ctrl)
        assert again.mode is ControllerMode.IDLE
        assert again.last_warning is not None

    def test_command_accepted_after_ack(self):
        ctrl = acknowledge_fault(self._faulted())
        ctrl = command_target_depth(ctrl, 3.0, make_winch())
        assert ctrl.target_depth == 3.0


command_stream = st.lists(
    st.one_of(
        st.tuples(st.just("target"),
                  st.floats(min_value=0.0, max_value=10.0)),
        st.tuples(st.just("manual_down"),
                  st.floats(min_value=0.05, max_value=2.0)),
        st.tuples(st.just("manual_up"),
                  st.floats(min_value=0.05, max_value=2.0)),
        st.tuples(st.just("underway"), st.just(0.0)),
        st.tuples(st.just("wait"), st.floats(min_value=0.5, max_value=8.0)),
    ),
    min_size=1, max_size=8)


class TestAntiChatter:
    @given(command_stream)
    @settings(max_examples=25)
    def test_opposite_directions_separated_by_dwell(self, stream):
        session = make_session(initial_line_out=2.0)
        changes = []
        last = [session.relay]

        def note(s):
            if s.relay is not last[0]:
                changes.append((s.time, s.relay))
                last[0] = s.relay

        session.pacer = note
        for action, value in stream:
            if action == "target":
                session.apply_command("set_target_depth",
                                      {"target_depth": value})
                session.run_for(1.0)
            elif action == "manual_down":
                session.apply_command("manual_step", {"direction": "down",
                                                      "step_line": value})
                session.run_for(1.0)
            elif action == "manual_up":
                session.apply_command("manual_step", {"direction": "up",
                                                      "step_line": value})
                session.run_for(1.0)
            elif action == "underway":
                session.apply_command("set_underway", {})
                session.run_for(1.0)
            else:
                session.run_for(value)

        energised = [(t, r) for t, r in changes if r is not RelayCommand.OFF]
        dwell = session.winch.min_relay_dwell_s
        for (t_a, relay_a), (t_b, relay_b) in zip(energised, energised[1:]):
            if relay_a is not relay_b:
                assert t_b - t_a >= dwell - 1e-6
        # the controller never asks for motion beyond the spool
        # (checked against the plant trace kept by the watcher below)


class TestSpoolSafety:
    def test_never_energised_outside_spool(self):
        session = make_session(initial_line_out=0.0)
        violations = []

        def watch(s):
            if s.relay is RelayCommand.PAYOUT and \
                    s.plant.line_out >= s.winch.spool_capacity_m + 1e-6:
                violations.append(s.time)
            if s.relay is RelayCommand.RETRIEVE and \
                    s.plant.line_out <= -1e-6:
                violations.append(s.time)

        session.pacer = watch
        session.apply_command("set_target_depth", {"target_depth": 10.0})
        session.run_for(40.0)
        session.apply_command("set_underway", {})
        session.run_for(40.0)
        assert violations == []
