"""Session drivers: live serving, headless transcript recording, replay.

A transcript is the broadcast stream written to disk as NDJSON with its own
sequence numbers; replaying one re-serves the identical message sequence,
optionally compressing or stretching the recorded timing.
"""

from __future__ import annotations

import logging
import threading
import time as wallclock
from collections import deque
from pathlib import Path

from .controller import ControllerMode
from .mission import MissionRunner
from .protocol import CommandMessage, TelemetryMessage, decode_line, encode, \
    snapshot_payload
from .session import SimSession
from .telemetry import TelemetryServer

log = logging.getLogger(__name__)


class SessionStopped(Exception):
    """Raised inside the driver loop to unwind when stop() is requested."""


class TranscriptRecorder:
    """Tee of the broadcast stream, sequenced like a virtual connection.

    The file copy is complete; the in-memory tail is bounded so an
    open-ended live session cannot grow without limit.
    """

    def __init__(self, path: Path | None = None, keep: int = 50_000):
        self.messages: deque[TelemetryMessage] = deque(maxlen=keep)
        self._seq = 0
        self._fh = open(path, "wb") if path is not None else None

    def record(self, kind: str, payload: dict) -> None:
        self._seq += 1
        message = TelemetryMessage(kind=kind, sequence=self._seq,
                                   payload=payload)
        self.messages.append(message)
        if self._fh is not None:
            self._fh.write(encode(message))

    def close(self) -> None:
        if self._fh is not None:
            self._fh.flush()
            self._fh.close()
            self._fh = None


def load_transcript(path: Path) -> list[TelemetryMessage]:
    messages = []
    offset = 0
    with open(path, "rb") as fh:
        for line in fh:
            decoded = decode_line(line, offset)
            offset += len(line)
            if isinstance(decoded, TelemetryMessage):
                messages.append(decoded)
    return messages


def make_snapshot(session: SimSession, scenario_name: str) -> dict:
    return snapshot_payload(
        session.state_payload(), scenario_name=scenario_name,
        spool_capacity_m=session.winch.spool_capacity_m,
        deadband_m=session.ctrl.deadband,
        parameters=list(session.probe.parameters))


class SessionDriver:
    """Owns the simulation thread for a live (or fast) served session."""

    def __init__(self, session: SimSession, runner: MissionRunner | None,
                 *, scenario_name: str, host: str = "127.0.0.1", port: int = 0,
                 pacing: str = "realtime", speed: float = 1.0,
                 transcript_path: Path | None = None,
                 static_root: Path | None = None):
        self.session = session
        self.runner = runner
        self.scenario_name = scenario_name
        self.pacing = pacing
        self.speed = speed
        self.transcript = TranscriptRecorder(transcript_path)
        self.paused = False
        self._stop_requested = False
        self._mission_requested = threading.Event()
        self._resume_requested = threading.Event()
        self._thread: threading.Thread | None = None
        self._next_wall: float | None = None

        session.state_listeners.append(lambda p: self._out("state", p))
        session.sample_listeners.append(
            lambda r: self._out("sample", r.to_json_obj()))
        session.fault_listeners.append(lambda p: self._out("fault", p))
        session.event_listeners.append(lambda p: self._out("mission_event", p))
        session.pacer = self._pace

        self.server = TelemetryServer(
            host, port, command_sink=self._command_sink,
            snapshot_provider=lambda: make_snapshot(session, scenario_name),
            static_root=static_root)

        self.transcript.record("state", make_snapshot(session, scenario_name))

    # ------------------------------------------------------------- plumbing

    def _out(self, kind: str, payload: dict) -> None:
        self.transcript.record(kind, payload)
        self.server.broadcast(kind, payload)

    def _command_sink(self, command: CommandMessage, reply) -> None:
        """Called from client reader threads; must not touch session state."""
        kind = command.kind
        if kind == "start_mission":
            if self.runner is None:
                reply(False, "no mission plan in this scenario")
            elif self._mission_requested.is_set():
                reply(False, "mission already started")
            else:
                self._mission_requested.set()
                reply(True, "mission starting")
            return
        if kind == "pause":
            self.paused = True
            reply(True, "paused")
            return
        if kind == "resume":
            if self.runner is not None and self.runner.result.status == "faulted":
                if self.session.ctrl.mode is ControllerMode.FAULT:
                    reply(False, "acknowledge the fault before resuming")
                    return
                self._resume_requested.set()
            self.paused = False
            reply(True, "resumed")
            return
        self.session.commands.put((kind, command.arguments, reply))

    def _pace(self, session: SimSession) -> None:
        if self._stop_requested:
            raise SessionStopped
        while self.paused and not self._stop_requested:
            session._drain_commands()
            wallclock.sleep(0.02)
            self._next_wall = None
        if self.pacing != "realtime":
            return
        now = wallclock.monotonic()
        if self._next_wall is None:
            self._next_wall = now
        self._next_wall += session.dt / max(self.speed, 1e-9)
        delay = self._next_wall - now
        if delay > 0:
            wallclock.sleep(delay)
        elif delay < -1.0:
            self._next_wall = now      # fell badly behind; do not spiral

    # ----------------------------------------------------------------- loop

    def start(self) -> "SessionDriver":
        self.server.start()
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop_requested = True
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self.server.stop()
        self.transcript.close()

    def _loop(self) -> None:
        try:
            while not self._stop_requested:
                if self.runner is not None and \
                        self._mission_requested.is_set() and \
                        self.runner.result.status == "pending":
                    self.runner.run()
                elif self.runner is not None and self._resume_requested.is_set():
                    self._resume_requested.clear()
                    self.runner.resume()
                else:
                    self.session.tick()
        except SessionStopped:
            pass
        except Exception:
            log.exception("session driver crashed")


class ReplayDriver:
    """Re-serves a recorded transcript over the live protocol."""

    def __init__(self, messages: list[TelemetryMessage], *,
                 host: str = "127.0.0.1", port: int = 0, speed: float = 1.0,
                 static_root: Path | None = None):
        if speed <= 0:
            raise ValueError("replay speed must be > 0")
        self.messages = messages
        self.speed = speed
        self._stop_requested = False
        self._thread: threading.Thread | None = None
        self.server = TelemetryServer(
            host, port, command_sink=self._reject,
            snapshot_provider=dict, static_root=static_root,
            send_snapshot_on_connect=False)

    @staticmethod
    def _reject(command: CommandMessage, reply) -> None:
        reply(False, "replay session is read-only")

    def start(self) -> "ReplayDriver":
        self.server.start()
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop_requested = True
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self.server.stop()

    def wait(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def _loop(self) -> None:
        # hold the stream until somebody is listening
        while not self._stop_requested and not self.server.clients():
            wallclock.sleep(0.02)
        previous_time: float | None = None
        for message in self.messages:
            if self._stop_requested:
                return
            t = message.payload.get("time")
            if previous_time is not None and isinstance(t, (int, float)):
                delta = max(0.0, (t - previous_time) / self.speed)
                if delta > 0:
                    wallclock.sleep(min(delta, 5.0))
            if isinstance(t, (int, float)):
                previous_time = t
            self.server.broadcast_verbatim(message)
        # let writer threads drain before anyone tears the server down
        deadline = wallclock.monotonic() + 5.0
        while wallclock.monotonic() < deadline:
            if all(len(c._buffer) == 0 for c in self.server.clients()):
                return
            wallclock.sleep(0.02)
