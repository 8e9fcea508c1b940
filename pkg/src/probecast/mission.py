"""Mission plans and the loop that executes them against a session.

A mission is an ordered list of legs. Transit legs move the vehicle with
the probe parked just below the surface, sampling along track. Station
legs hold position while the winch works through a list of casts; the
vehicle does not move while the probe is deployed. A controller fault
pauses the mission and surfaces the reason; the caller decides whether to
acknowledge and resume (the faulted cast is abandoned, not retried).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .controller import ControllerMode
from .datalog import SampleRecord
from .plant import RelayCommand
from .session import SimSession
from .specs import ProbeSpec, SpecError, WinchSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cast:
    target_depth_m: float
    dwell_s: float


@dataclass(frozen=True)
class TransitLeg:
    to: tuple[float, float]
    speed_m_s: float


@dataclass(frozen=True)
class StationLeg:
    hold_position: tuple[float, float]
    casts: tuple[Cast, ...]

    def __post_init__(self):
        object.__setattr__(self, "casts", tuple(self.casts))


Leg = TransitLeg | StationLeg


@dataclass(frozen=True)
class MissionPlan:
    legs: tuple[Leg, ...]

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(self.legs))

    def validate(self, winch: WinchSpec, probe: ProbeSpec) -> None:
        if not self.legs:
            raise SpecError("mission plan needs at least one leg")
        for i, leg in enumerate(self.legs):
            if isinstance(leg, TransitLeg):
                if leg.speed_m_s <= 0:
                    raise SpecError(f"leg {i}: transit speed must be > 0")
            elif isinstance(leg, StationLeg):
                for j, cast in enumerate(leg.casts):
                    if not 0 <= cast.target_depth_m <= winch.spool_capacity_m:
                        raise SpecError(
                            f"leg {i} cast {j}: target "
                            f"{cast.target_depth_m} m outside the "
                            f"{winch.spool_capacity_m} m spool")
                    if cast.dwell_s < probe.sample_period_s:
                        raise SpecError(
                            f"leg {i} cast {j}: dwell {cast.dwell_s} s is "
                            f"shorter than the {probe.sample_period_s} s "
                            "sample period")
            else:
                raise SpecError(f"leg {i}: unknown leg type {type(leg).__name__}")


@dataclass
class MissionResult:
    status: str                      # "completed" | "faulted" | "aborted"
    records: list[SampleRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    fault_reason: str | None = None


class MissionRunner:
    """Drives a SimSession through a MissionPlan, collecting the log."""

    # generous per-phase safety timeouts, sim seconds
    TRANSIT_TIMEOUT = 7200.0
    CAST_TIMEOUT = 600.0

    def __init__(self, session: SimSession, plan: MissionPlan):
        plan.validate(session.winch, session.probe)
        self.session = session
        self.plan = plan
        self.result = MissionResult(status="pending")
        self.paused = False
        self._leg_index = 0
        self._cast_index = 0
        session.sample_listeners.append(self.result.records.append)
        session.event_listeners.append(self.result.events.append)

    # ------------------------------------------------------------------ run

    def run(self, start_leg: int = 0, start_cast: int = 0) -> MissionResult:
        """Execute legs in order; stops (paused) on a controller fault."""
        session = self.session
        session.tick()               # flush the initial state and sample
        for leg_index in range(start_leg, len(self.plan.legs)):
            self._leg_index = leg_index
            leg = self.plan.legs[leg_index]
            if isinstance(leg, TransitLeg):
                ok = self._run_transit(leg)
            else:
                first_cast = start_cast if leg_index == start_leg else 0
                ok = self._run_station(leg, first_cast)
            if not ok:
                self.result.status = "faulted"
                self.result.fault_reason = session.ctrl.fault_reason
                session.emit_event("mission_paused",
                                   reason=session.ctrl.fault_reason)
                return self.result
        session.emit_event("mission_completed")
        self.result.status = "completed"
        return self.result

    def resume(self) -> MissionResult:
        """Continue a faulted mission, abandoning the cast that stalled."""
        if self.result.status != "faulted":
            return self.result
        leg = self.plan.legs[self._leg_index]
        next_cast = self._cast_index + 1 if isinstance(leg, StationLeg) else 0
        self.result.status = "pending"
        self.result.fault_reason = None
        self.session.emit_event("mission_resumed", leg=self._leg_index,
                                cast=next_cast)
        if not self._recover_slack():
            self.result.status = "faulted"
            self.result.fault_reason = self.session.ctrl.fault_reason
            return self.result
        return self.run(start_leg=self._leg_index, start_cast=next_cast)

    def _recover_slack(self) -> bool:
        """Reel in slack line left behind by a stalled probe.

        Retrieving slack does not move the probe, so a closed-loop retrieve
        would trip the depth-based stall supervisor again. Short open-loop
        jogs each finish well inside the stall window (the relay drops out
        between jogs, resetting the supervisor), which is also how an
        operator clears a snag by hand.
        """
        session = self.session
        # each jog must complete inside the stall window with margin
        jog = min(1.0, session.winch.retrieval_speed_m_s
                  * session.ctrl.stall_window * 0.5)
        while (not session.plant.tether_taut
               and session.plant.line_out > 0.05):
            accepted, detail = session.apply_command(
                "manual_step", {"direction": "up", "step_line": jog})
            if not accepted:
                log.warning("slack recovery rejected: %s", detail)
                return False
            done = session.run_until(
                lambda s: (s.ctrl.manual_target_line is None
                           and s.relay is RelayCommand.OFF)
                or self._faulted(),
                timeout=self.CAST_TIMEOUT)
            if self._faulted() or not done:
                return False
        return True

    def _faulted(self) -> bool:
        return self.session.ctrl.mode is ControllerMode.FAULT

    def _run_transit(self, leg: TransitLeg) -> bool:
        session = self.session
        session.emit_event("transit_started", to=list(leg.to),
                           speed_m_s=leg.speed_m_s)
        accepted, detail = session.apply_command("set_underway", {})
        if not accepted:
            return False
        # wait for the probe to come shallow before moving off station
        session.run_until(
            lambda s: s.ctrl.mode is ControllerMode.UNDERWAY or self._faulted(),
            timeout=self.CAST_TIMEOUT)
        if self._faulted():
            return False
        session.asv_goal = leg.to
        session.asv_goal_speed = leg.speed_m_s
        arrived = session.run_until(
            lambda s: s.env.plane.distance_m(s.asv.position, leg.to)
            <= s.asv.station_keep_radius_m or self._faulted(),
            timeout=self.TRANSIT_TIMEOUT)
        session.asv_goal = None
        session.asv_goal_speed = None
        if self._faulted():
            return False
        if not arrived:
            log.warning("transit to %s timed out", leg.to)
        session.emit_event("transit_finished", to=list(leg.to))
        return True

    def _run_station(self, leg: StationLeg, start_cast: int = 0) -> bool:
        session = self.session
        session.emit_event("station_started",
                           position=list(leg.hold_position))
        # close the gap to the hold point if the plan skipped a transit leg
        if (session.env.plane.distance_m(session.asv.position, leg.hold_position)
                > session.asv.station_keep_radius_m):
            session.asv_goal = leg.hold_position
            session.run_until(
                lambda s: s.env.plane.distance_m(s.asv.position,
                                                 leg.hold_position)
                <= s.asv.station_keep_radius_m,
                timeout=self.TRANSIT_TIMEOUT)
            session.asv_goal = None

        for cast_index in range(start_cast, len(leg.casts)):
            self._cast_index = cast_index
            if not self._run_cast(leg.casts[cast_index]):
                return False

        # park the probe before departing the station
        accepted, _ = session.apply_command("set_underway", {})
        if accepted:
            session.run_until(
                lambda s: s.ctrl.mode is ControllerMode.UNDERWAY
                or self._faulted(),
                timeout=self.CAST_TIMEOUT)
        if self._faulted():
            return False
        session.emit_event("station_finished",
                           position=list(leg.hold_position))
        return True

    def _run_cast(self, cast: Cast) -> bool:
        session = self.session
        session.emit_event("cast_started", target_depth_m=cast.target_depth_m,
                           dwell_s=cast.dwell_s)
        accepted, detail = session.apply_command(
            "set_target_depth", {"target_depth": cast.target_depth_m})
        if not accepted:
            log.warning("cast to %.2f m rejected: %s",
                        cast.target_depth_m, detail)
            return False
        reached = session.run_until(
            lambda s: s.ctrl.mode is ControllerMode.HOLDING or self._faulted(),
            timeout=self.CAST_TIMEOUT)
        if self._faulted():
            return False
        if not reached:
            log.warning("cast to %.2f m never reached holding",
                        cast.target_depth_m)
            return False
        dwell_end = session.time + cast.dwell_s
        session.run_until(lambda s: s.time >= dwell_end or self._faulted(),
                          timeout=cast.dwell_s + 60.0)
        if self._faulted():
            return False
        session.emit_event("cast_finished", target_depth_m=cast.target_depth_m)
        return True
