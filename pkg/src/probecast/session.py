"""Simulation session: one seeded, steppable run of plant plus controller.

The session owns the only mutable simulation state. Time is derived from an
integer step index (time = n * dt) so cadences (control, sampling,
broadcast) are exact and runs are bitwise reproducible for a given seed.
Network threads never touch the state directly; they enqueue commands that
the owning loop drains at tick boundaries, which gives commands a total
order.
"""

from __future__ import annotations

import queue
from dataclasses import dataclass, replace
from typing import Any, Callable

import numpy as np

from .asv import ASVModel, advance_asv, drift_asv
from .controller import (CommandRejected, ControlInput, ControllerMode,
                         ControllerState, acknowledge_fault,
                         command_target_depth, control_step, controller_for,
                         manual_step, set_underway)
from .datalog import SampleRecord
from .environment import Environment, sample_fields
from .plant import PlantState, RelayCommand, measure_depth, step
from .specs import ProbeSpec, WinchSpec


@dataclass(frozen=True)
class ControllerConfig:
    control_rate_hz: float = 10.0
    deadband_m: float = 0.05
    stall_window_s: float = 5.0
    stall_epsilon_m: float = 0.02
    underway_depth_m: float = 0.3


class SimSession:
    """Deterministic closed-loop run of the probe deployment plant."""

    def __init__(self, *, probe: ProbeSpec, winch: WinchSpec, env: Environment,
                 asv: ASVModel, seed: int, dt: float = 0.01,
                 controller_config: ControllerConfig | None = None,
                 initial_line_out: float = 0.3,
                 broadcast_rate_hz: float = 10.0):
        if dt <= 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        cfg = controller_config or ControllerConfig()
        self.probe = probe
        self.winch = winch
        self.env = env
        self.asv = asv
        self.seed = seed
        self.dt = dt
        self.rng = np.random.default_rng(seed)

        floor = env.effective_floor(*asv.position)
        depth0 = min(max(initial_line_out, 0.0), winch.spool_capacity_m, floor)
        line0 = min(max(initial_line_out, 0.0), winch.spool_capacity_m)
        self.plant = PlantState(
            line_out=line0, probe_depth=depth0, tether_taut=(depth0 == line0),
            asv_position=asv.position)
        self.ctrl: ControllerState = controller_for(
            winch, deadband=cfg.deadband_m, stall_window=cfg.stall_window_s,
            stall_epsilon=cfg.stall_epsilon_m,
            underway_depth=cfg.underway_depth_m)
        self.relay = RelayCommand.OFF

        self._step_index = 0
        self._control_every = max(1, round(1.0 / (cfg.control_rate_hz * dt)))
        self._sample_every = max(1, round(probe.sample_period_s / dt))
        self._broadcast_every = max(1, round(1.0 / (broadcast_rate_hz * dt)))

        self.state_listeners: list[Callable[[dict], None]] = []
        self.sample_listeners: list[Callable[[SampleRecord], None]] = []
        self.fault_listeners: list[Callable[[dict], None]] = []
        self.event_listeners: list[Callable[[dict], None]] = []

        self.commands: queue.Queue = queue.Queue()
        self.asv_goal: tuple[float, float] | None = None
        self.asv_goal_speed: float | None = None
        # optional per-tick hook; the live server uses it for wall-clock pacing
        self.pacer: Callable[["SimSession"], None] | None = None

    # ------------------------------------------------------------------ time

    @property
    def time(self) -> float:
        return self._step_index * self.dt

    @property
    def control_period(self) -> float:
        return self._control_every * self.dt

    # ----------------------------------------------------------------- loop

    def tick(self) -> None:
        """Advance the world by one dt."""
        self._drain_commands()

        if self._step_index % self._control_every == 0:
            self._run_controller()

        if self._step_index % self._sample_every == 0:
            self._emit_sample()

        if self._step_index % self._broadcast_every == 0:
            self._emit_state()

        self.plant = step(self.plant, self.relay, self.env, self.probe,
                          self.winch, self.dt)
        self._advance_asv()
        self._step_index += 1
        if self.pacer is not None:
            self.pacer(self)

    def run_for(self, duration: float) -> None:
        for _ in range(round(duration / self.dt)):
            self.tick()

    def run_until(self, predicate: Callable[["SimSession"], bool],
                  timeout: float) -> bool:
        """Tick until the predicate holds; False if the timeout hit first."""
        deadline = self.time + timeout
        while self.time < deadline:
            if predicate(self):
                return True
            self.tick()
        return predicate(self)

    def _run_controller(self) -> None:
        reading = measure_depth(self.plant, self.probe, self.rng)
        inp = ControlInput(fused_depth=reading, line_out=self.plant.line_out,
                           asv_fix=self.plant.asv_position, time=self.time)
        was_faulted = self.ctrl.mode is ControllerMode.FAULT
        self.ctrl, self.relay = control_step(self.ctrl, inp)
        if self.ctrl.mode is ControllerMode.FAULT and not was_faulted:
            payload = {"time": self.time, "reason": self.ctrl.fault_reason,
                       "depth": reading, "line_out": self.plant.line_out}
            for listener in self.fault_listeners:
                listener(payload)

    def _advance_asv(self) -> None:
        # the vehicle station-keeps whenever the probe is deployed; only the
        # configured drift disturbance (off by default) moves it then
        if self.ctrl.mode not in (ControllerMode.UNDERWAY,
                                  ControllerMode.IDLE):
            drifted = drift_asv(self.asv, self.dt, self.env.plane)
            if drifted is not self.asv:
                self.asv = drifted
                self.plant = replace(self.plant,
                                     asv_position=drifted.position)
            return
        if self.asv_goal is None:
            return
        moved = advance_asv(self.asv, self.asv_goal, self.dt,
                            self.env.plane, self.asv_goal_speed)
        speed = self.env.plane.distance_m(self.asv.position,
                                          moved.position) / self.dt
        self.asv = moved
        self.plant = replace(self.plant, asv_position=moved.position,
                             asv_speed=speed, asv_heading=moved.heading_rad)

    # --------------------------------------------------------------- events

    def _emit_sample(self) -> None:
        lat, lon = self.plant.asv_position
        values = sample_fields(self.env, lat, lon, self.plant.probe_depth,
                               self.time, self.seed)
        record = SampleRecord(
            timestamp=self.time, lat=lat, lon=lon,
            depth=self.ctrl.fused_depth, mode=self.ctrl.mode, values=values)
        for listener in self.sample_listeners:
            listener(record)

    def _emit_state(self) -> None:
        payload = self.state_payload()
        for listener in self.state_listeners:
            listener(payload)

    def state_payload(self) -> dict:
        lat, lon = self.plant.asv_position
        return {
            "time": self.time,
            "probe_depth": self.plant.probe_depth,
            "fused_depth": self.ctrl.fused_depth,
            "line_out": self.plant.line_out,
            "tether_taut": self.plant.tether_taut,
            "relay": self.relay.value,
            "mode": self.ctrl.mode.value,
            "target_depth": self.ctrl.target_depth,
            "fault_reason": self.ctrl.fault_reason,
            "asv": {"lat": lat, "lon": lon,
                    "heading_rad": self.asv.heading_rad},
        }

    def emit_event(self, name: str, **detail: Any) -> None:
        payload = {"time": self.time, "event": name, **detail}
        for listener in self.event_listeners:
            listener(payload)

    # ------------------------------------------------------------- commands

    def _drain_commands(self) -> None:
        while True:
            try:
                kind, arguments, reply = self.commands.get_nowait()
            except queue.Empty:
                return
            accepted, detail = self.apply_command(kind, arguments)
            if reply is not None:
                reply(accepted, detail)

    def apply_command(self, kind: str, arguments: dict) -> tuple[bool, str]:
        """Apply one operator command; returns (accepted, detail)."""
        try:
            if kind == "set_target_depth":
                target = float(arguments["target_depth"])
                self.ctrl = command_target_depth(self.ctrl, target, self.winch)
                return True, f"target {target} m"
            if kind == "manual_step":
                direction = str(arguments["direction"])
                step_line = float(arguments.get("step_line", 0.25))
                self.ctrl = manual_step(self.ctrl, direction, step_line)
                detail = self.ctrl.last_warning or f"{direction} {step_line} m"
                return True, detail
            if kind == "set_underway":
                setpoint = arguments.get("shallow_setpoint")
                self.ctrl = set_underway(
                    self.ctrl, None if setpoint is None else float(setpoint))
                if self.ctrl.last_warning:
                    return False, self.ctrl.last_warning
                return True, "going underway"
            if kind == "ack_fault":
                was = self.ctrl.fault_reason
                self.ctrl = acknowledge_fault(self.ctrl)
                if self.ctrl.last_warning:
                    return False, self.ctrl.last_warning
                self.relay = RelayCommand.OFF
                self.emit_event("fault_acknowledged", reason=was)
                return True, "fault acknowledged"
            return False, f"unknown command kind {kind!r}"
        except (CommandRejected, KeyError, TypeError, ValueError) as exc:
            return False, str(exc)
