"""Wire protocol: newline-delimited JSON messages, one document per line.

Two message families share the stream. Server-to-client telemetry carries a
per-connection strictly increasing sequence number so receivers can detect
drops. Client-to-server commands carry a client-unique command_id and are
answered by exactly one ack telemetry message, accepted or not.

The full field-by-field schema lives in docs/protocol.md; PROTOCOL_VERSION
is sent in the first state message (the connection snapshot) and checked by
clients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PROTOCOL_VERSION = 1

TELEMETRY_KINDS = frozenset({"state", "sample", "fault", "ack", "mission_event"})
COMMAND_KINDS = frozenset({"set_target_depth", "manual_step", "set_underway",
                           "start_mission", "pause", "resume", "ack_fault"})


class ProtocolError(ValueError):
    """Malformed wire data; carries the byte offset where decoding failed."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class TelemetryMessage:
    kind: str
    sequence: int
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in TELEMETRY_KINDS:
            raise ProtocolError(f"unknown telemetry kind {self.kind!r}")


@dataclass(frozen=True)
class CommandMessage:
    kind: str
    command_id: str
    arguments: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in COMMAND_KINDS:
            raise ProtocolError(f"unknown command kind {self.kind!r}")


Message = TelemetryMessage | CommandMessage


def encode(message: Message) -> bytes:
    """One message as a single UTF-8 JSON line, newline-terminated."""
    if isinstance(message, TelemetryMessage):
        obj = {"kind": message.kind, "seq": message.sequence,
               "payload": message.payload}
    elif isinstance(message, CommandMessage):
        obj = {"kind": message.kind, "command_id": message.command_id,
               "arguments": message.arguments}
    else:
        raise ProtocolError(f"cannot encode {type(message).__name__}")
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def decode_line(line: bytes, offset: int = 0) -> Message | None:
    """Decode one wire line; None for a blank line (skipped by readers)."""
    try:
        text = line.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"invalid UTF-8: {exc.reason}",
                            offset + exc.start) from exc
    text = text.strip()
    if not text:
        return None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"bad JSON: {exc.msg}", offset + exc.pos) from exc
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ProtocolError("message must be an object with a 'kind'", offset)

    kind = obj["kind"]
    if kind in TELEMETRY_KINDS:
        try:
            seq = int(obj["seq"])
        except (KeyError, TypeError, ValueError):
            raise ProtocolError(f"telemetry {kind!r} needs an integer 'seq'",
                                offset) from None
        payload = obj.get("payload", {})
        if not isinstance(payload, dict):
            raise ProtocolError("telemetry payload must be an object", offset)
        return TelemetryMessage(kind=kind, sequence=seq, payload=payload)
    if kind in COMMAND_KINDS:
        command_id = obj.get("command_id")
        if not isinstance(command_id, str) or not command_id:
            raise ProtocolError(
                f"command {kind!r} needs a non-empty string 'command_id'",
                offset)
        arguments = obj.get("arguments", {})
        if not isinstance(arguments, dict):
            raise ProtocolError("command arguments must be an object", offset)
        return CommandMessage(kind=kind, command_id=command_id,
                              arguments=arguments)
    raise ProtocolError(f"unknown message kind {kind!r}", offset)


def snapshot_payload(session_payload: dict, *, scenario_name: str,
                     spool_capacity_m: float, deadband_m: float,
                     parameters: list[str]) -> dict:
    """The first state payload on a connection: full snapshot plus bounds."""
    return {
        **session_payload,
        "snapshot": True,
        "protocol_version": PROTOCOL_VERSION,
        "scenario": scenario_name,
        "spool_capacity_m": spool_capacity_m,
        "deadband_m": deadband_m,
        "parameters": list(parameters),
    }
