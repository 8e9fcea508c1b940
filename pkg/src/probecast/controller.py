"""Winch depth controller: mode machine, relay law, stall supervision.

The relay law is bang-bang with a deadband: inside the band the relay is
held off, outside it the winch drives toward the target. Relay switches
into an energised direction are separated by a minimum dwell so the
mechanical relays never chatter; dropping to off is always immediate, so a
direction reversal passes through off and the two directions are at least
one dwell apart.

The stall supervisor watches the fused depth whenever the relay is
energised: if the probe does not move by stall_epsilon within stall_window
seconds the command is aborted and the controller latches a fault, relay
off, until an operator acknowledges it.

All operations are pure: they take a ControllerState and return a new one,
so a step is reproducible from its inputs alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .plant import RelayCommand
from .specs import WinchSpec

_TIME_EPS = 1e-9


class ControllerMode(enum.Enum):
    UNDERWAY = "underway"
    DEPLOYING = "deploying"
    HOLDING = "holding"
    RETRIEVING = "retrieving"
    FAULT = "fault"
    IDLE = "idle"


class CommandRejected(ValueError):
    """A command was refused; the reason is the message."""


@dataclass(frozen=True)
class ControlInput:
    """One controller tick's view of the world."""

    fused_depth: float               # m, pressure-derived probe depth
    line_out: float                  # m of tether off the spool
    asv_fix: tuple[float, float]     # (lat, lon)
    time: float                      # s

    def __post_init__(self):
        if self.fused_depth < 0:
            raise ValueError(f"fused_depth must be >= 0, got {self.fused_depth}")


@dataclass(frozen=True)
class ControllerState:
    # regulation
    mode: ControllerMode = ControllerMode.IDLE
    target_depth: float | None = None
    deadband: float = 0.05           # m
    relay_out: RelayCommand = RelayCommand.OFF
    last_relay_change: float = -math.inf
    # stall supervision
    stall_window: float = 5.0        # s of no movement before aborting
    stall_epsilon: float = 0.02      # m counted as movement
    stall_reference_depth: float | None = None
    stall_reference_time: float | None = None
    fault_reason: str | None = None
    # limits copied from the winch spec so control_step stays self-contained
    min_relay_dwell: float = 0.5     # s
    spool_capacity: float = 10.0     # m
    underway_depth: float = 0.3      # m, probe parked just below the surface
    # last control input, mirrored for command-time decisions
    fused_depth: float = 0.0
    line_out: float = 0.0
    time: float = 0.0
    # pending open-loop / underway actions
    underway_pending: bool = False
    manual_relay: RelayCommand | None = None
    manual_target_line: float | None = None
    last_warning: str | None = None


def controller_for(winch: WinchSpec, *, deadband: float = 0.05,
                   stall_window: float = 5.0, stall_epsilon: float = 0.02,
                   underway_depth: float = 0.3) -> ControllerState:
    """Fresh idle controller bound to a winch's physical limits."""
    return ControllerState(
        deadband=deadband,
        stall_window=stall_window,
        stall_epsilon=stall_epsilon,
        min_relay_dwell=winch.min_relay_dwell_s,
        spool_capacity=winch.spool_capacity_m,
        underway_depth=underway_depth,
    )


def command_target_depth(ctrl: ControllerState, target: float,
                         limits: WinchSpec) -> ControllerState:
    """Start a closed-loop move of the probe to the given depth."""
    if ctrl.mode is ControllerMode.FAULT:
        raise CommandRejected(
            f"controller is in fault ({ctrl.fault_reason}); acknowledge first")
    if not 0.0 <= target <= limits.spool_capacity_m:
        raise CommandRejected(
            f"target {target} m outside [0, {limits.spool_capacity_m}] m spool range")
    error = target - ctrl.fused_depth
    if abs(error) <= ctrl.deadband:
        mode = ControllerMode.HOLDING
    elif error > 0:
        mode = ControllerMode.DEPLOYING
    else:
        mode = ControllerMode.RETRIEVING
    return replace(
        ctrl, mode=mode, target_depth=target,
        underway_pending=False, manual_relay=None, manual_target_line=None,
        stall_reference_depth=None, stall_reference_time=None, last_warning=None)


def manual_step(ctrl: ControllerState, direction: str,
                step_line: float = 0.25) -> ControllerState:
    """Open-loop jog: run the winch until the line has moved step_line metres.

    Moves that would leave [0, spool] are clipped to the bound and the clip
    is reported in last_warning.
    """
    if ctrl.mode is ControllerMode.FAULT:
        raise CommandRejected(
            f"controller is in fault ({ctrl.fault_reason}); acknowledge first")
    if direction not in ("up", "down"):
        raise CommandRejected(f"manual step direction must be up or down, got {direction!r}")
    if step_line <= 0:
        raise CommandRejected(f"manual step length must be > 0, got {step_line}")

    if direction == "down":
        allowed = min(step_line, ctrl.spool_capacity - ctrl.line_out)
        relay = RelayCommand.PAYOUT
        mode = ControllerMode.DEPLOYING
        target_line = ctrl.line_out + max(allowed, 0.0)
    else:
        allowed = min(step_line, ctrl.line_out)
        relay = RelayCommand.RETRIEVE
        mode = ControllerMode.RETRIEVING
        target_line = ctrl.line_out - max(allowed, 0.0)

    if allowed <= 0:
        return replace(ctrl, last_warning=(
            f"manual step {direction} clipped to no-op at line_out "
            f"{ctrl.line_out:.2f} m"))

    warning = None
    if allowed < step_line:
        warning = (f"manual step {direction} clipped to {allowed:.2f} m of "
                   f"{step_line:.2f} m by the spool bound")
    return replace(
        ctrl, mode=mode, manual_relay=relay, manual_target_line=target_line,
        target_depth=None, underway_pending=False,
        stall_reference_depth=None, stall_reference_time=None,
        last_warning=warning)


def set_underway(ctrl: ControllerState,
                 shallow_setpoint: float | None = None) -> ControllerState:
    """Retrieve until the probe sits just below the surface, then park."""
    if ctrl.mode is ControllerMode.FAULT:
        # fault latches the relay off; going underway must wait for an ack
        return replace(ctrl, last_warning="cannot go underway while in fault")
    setpoint = ctrl.underway_depth if shallow_setpoint is None else shallow_setpoint
    base = replace(
        ctrl, underway_depth=setpoint, manual_relay=None, manual_target_line=None,
        stall_reference_depth=None, stall_reference_time=None, last_warning=None)
    if ctrl.fused_depth <= setpoint:
        return replace(base, mode=ControllerMode.UNDERWAY,
                       target_depth=None, underway_pending=False)
    return replace(base, mode=ControllerMode.RETRIEVING,
                   target_depth=setpoint, underway_pending=True)


def acknowledge_fault(ctrl: ControllerState) -> ControllerState:
    """Clear a latched fault; the controller returns to idle."""
    if ctrl.mode is not ControllerMode.FAULT:
        return replace(ctrl, last_warning="no fault to acknowledge")
    return replace(
        ctrl, mode=ControllerMode.IDLE, fault_reason=None,
        relay_out=RelayCommand.OFF, target_depth=None,
        underway_pending=False, manual_relay=None, manual_target_line=None,
        stall_reference_depth=None, stall_reference_time=None, last_warning=None)


def detect_stall(ctrl: ControllerState, inp: ControlInput) -> ControllerState:
    """Advance the stall supervisor; may latch a fault.

    The reference rolls forward whenever the depth has moved at least
    stall_epsilon since it was taken; while the relay is off there is
    nothing to supervise and the reference is dropped.
    """
    if ctrl.relay_out is RelayCommand.OFF:
        if ctrl.stall_reference_depth is None and ctrl.stall_reference_time is None:
            return ctrl
        return replace(ctrl, stall_reference_depth=None, stall_reference_time=None)

    if ctrl.stall_reference_depth is None:
        return replace(ctrl, stall_reference_depth=inp.fused_depth,
                       stall_reference_time=inp.time)

    if abs(inp.fused_depth - ctrl.stall_reference_depth) >= ctrl.stall_epsilon:
        return replace(ctrl, stall_reference_depth=inp.fused_depth,
                       stall_reference_time=inp.time)

    if inp.time - ctrl.stall_reference_time >= ctrl.stall_window - _TIME_EPS:
        direction = ("payout" if ctrl.relay_out is RelayCommand.PAYOUT
                     else "retrieval")
        reason = (f"stall during {direction}: depth pinned near "
                  f"{inp.fused_depth:.2f} m for {ctrl.stall_window:.1f} s")
        return replace(
            ctrl, mode=ControllerMode.FAULT, fault_reason=reason,
            relay_out=RelayCommand.OFF, last_relay_change=inp.time,
            target_depth=None, underway_pending=False,
            manual_relay=None, manual_target_line=None,
            stall_reference_depth=None, stall_reference_time=None)
    return ctrl


def _desired_relay(ctrl: ControllerState,
                   inp: ControlInput) -> tuple[RelayCommand, ControllerMode,
                                               ControllerState]:
    """Relay the control law wants this tick, before dwell arbitration."""
    # open-loop manual jog tracks line movement, not depth
    if ctrl.manual_target_line is not None:
        done = (ctrl.manual_relay is RelayCommand.PAYOUT
                and inp.line_out >= ctrl.manual_target_line - 1e-6) or \
               (ctrl.manual_relay is RelayCommand.RETRIEVE
                and inp.line_out <= ctrl.manual_target_line + 1e-6)
        if done:
            cleared = replace(ctrl, manual_relay=None, manual_target_line=None)
            return RelayCommand.OFF, ControllerMode.IDLE, cleared
        mode = (ControllerMode.DEPLOYING
                if ctrl.manual_relay is RelayCommand.PAYOUT
                else ControllerMode.RETRIEVING)
        return ctrl.manual_relay, mode, ctrl

    if ctrl.underway_pending:
        if inp.fused_depth <= ctrl.underway_depth:
            cleared = replace(ctrl, underway_pending=False, target_depth=None)
            return RelayCommand.OFF, ControllerMode.UNDERWAY, cleared
        return RelayCommand.RETRIEVE, ControllerMode.RETRIEVING, ctrl

    if ctrl.target_depth is not None:
        error = ctrl.target_depth - inp.fused_depth
        if abs(error) <= ctrl.deadband:
            return RelayCommand.OFF, ControllerMode.HOLDING, ctrl
        if error > 0:
            return RelayCommand.PAYOUT, ControllerMode.DEPLOYING, ctrl
        return RelayCommand.RETRIEVE, ControllerMode.RETRIEVING, ctrl

    return RelayCommand.OFF, ctrl.mode, ctrl


def _arbitrate(ctrl: ControllerState, desired: RelayCommand,
               now: float) -> tuple[RelayCommand, float]:
    """Apply the dwell rule; returns (relay, last_relay_change)."""
    current = ctrl.relay_out
    if desired is current:
        return current, ctrl.last_relay_change
    if desired is RelayCommand.OFF:
        return RelayCommand.OFF, now
    if now - ctrl.last_relay_change >= ctrl.min_relay_dwell - _TIME_EPS:
        return desired, now
    # dwell not yet served: wait it out de-energised
    if current is not RelayCommand.OFF:
        return RelayCommand.OFF, now
    return RelayCommand.OFF, ctrl.last_relay_change


def control_step(ctrl: ControllerState,
                 inp: ControlInput) -> tuple[ControllerState, RelayCommand]:
    """One controller tick; pure function of (state, input)."""
    ctrl = replace(ctrl, fused_depth=inp.fused_depth, line_out=inp.line_out,
                   time=inp.time)

    if ctrl.mode is ControllerMode.FAULT:
        if ctrl.relay_out is not RelayCommand.OFF:
            ctrl = replace(ctrl, relay_out=RelayCommand.OFF,
                           last_relay_change=inp.time)
        return ctrl, ctrl.relay_out

    desired, mode, ctrl = _desired_relay(ctrl, inp)

    # never ask the plant to run past the spool bounds
    if desired is RelayCommand.PAYOUT and inp.line_out >= ctrl.spool_capacity - 1e-6:
        desired = RelayCommand.OFF
    elif desired is RelayCommand.RETRIEVE and inp.line_out <= 1e-6:
        desired = RelayCommand.OFF

    relay, last_change = _arbitrate(ctrl, desired, inp.time)
    ctrl = replace(ctrl, mode=mode, relay_out=relay, last_relay_change=last_change)
    ctrl = detect_stall(ctrl, inp)
    return ctrl, ctrl.relay_out
