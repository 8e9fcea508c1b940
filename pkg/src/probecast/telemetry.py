"""Live telemetry endpoint: broadcast state, accept operator commands.

One listening port serves two framings of the same message schema: raw
stream clients speak newline-delimited JSON directly, and browsers open a
WebSocket (detected by the HTTP upgrade request) carrying one JSON document
per text frame. The listener can also serve the operator console's static
bundle over plain HTTP GET.

The simulation loop never blocks on the network: every client has a
bounded outbound buffer and its own writer thread. When a slow client's
buffer fills, the oldest state broadcasts are dropped first (sequence
numbers make the gap visible to the client); commands and acks are routed
through the session's serialized queue so nothing is ever silently lost.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import mimetypes
import socket
import struct
import threading
from collections import deque
from pathlib import Path
from typing import Callable

from .protocol import CommandMessage, ProtocolError, TelemetryMessage, \
    decode_line, encode

log = logging.getLogger(__name__)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

CommandSink = Callable[[CommandMessage, Callable[[bool, str], None]], None]
SnapshotProvider = Callable[[], dict]


class _ClientGone(ConnectionError):
    pass


class ClientConnection:
    """One connected operator client (NDJSON or WebSocket framing)."""

    def __init__(self, sock: socket.socket, addr, server: "TelemetryServer"):
        self.sock = sock
        self.addr = addr
        self.server = server
        self.websocket = False
        self.alive = True
        self.sequence = 0
        self.dropped = 0
        self._buffer: deque[TelemetryMessage] = deque()
        self._cond = threading.Condition()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._writer: threading.Thread | None = None

    # ------------------------------------------------------------- lifecycle

    def start(self) -> None:
        self._reader.start()

    def close(self) -> None:
        if not self.alive:
            return
        self.alive = False
        with self._cond:
            self._cond.notify_all()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()
        self.server._forget(self)

    # --------------------------------------------------------------- sending

    def enqueue(self, kind: str, payload: dict) -> None:
        """Queue a telemetry message; never blocks the caller."""
        if not self.alive:
            return
        with self._cond:
            self.sequence += 1
            message = TelemetryMessage(kind=kind, sequence=self.sequence,
                                       payload=payload)
            self._append(message)

    def enqueue_verbatim(self, message: TelemetryMessage) -> None:
        """Queue a pre-sequenced message (replay path)."""
        if not self.alive:
            return
        with self._cond:
            self._append(message)

    def _append(self, message: TelemetryMessage) -> None:
        if len(self._buffer) >= self.server.client_buffer:
            self._drop_one()
        self._buffer.append(message)
        self._cond.notify()

    def _drop_one(self) -> None:
        # sacrifice the oldest periodic state first; the connection snapshot,
        # faults and acks survive
        for i, queued in enumerate(self._buffer):
            if queued.kind == "state" and not queued.payload.get("snapshot"):
                del self._buffer[i]
                self.dropped += 1
                return
        self._buffer.popleft()
        self.dropped += 1

    def _write_loop(self) -> None:
        try:
            while True:
                with self._cond:
                    while self.alive and not self._buffer:
                        self._cond.wait(timeout=0.5)
                    if not self.alive:
                        return
                    message = self._buffer.popleft()
                data = encode(message)
                if self.websocket:
                    self.sock.sendall(_ws_frame(data.rstrip(b"\n")))
                else:
                    self.sock.sendall(data)
        except OSError:
            pass
        finally:
            self.close()

    # -------------------------------------------------------------- receiving

    def _read_loop(self) -> None:
        try:
            if self._peek_looks_like_http():
                if not self._http_entry():
                    return
                self.websocket = True
            self.server._welcome(self)
            self._writer = threading.Thread(target=self._write_loop, daemon=True)
            self._writer.start()
            if self.websocket:
                self._ws_read_commands()
            else:
                self._ndjson_read_commands()
        except (_ClientGone, OSError, ProtocolError) as exc:
            log.debug("client %s gone: %s", self.addr, exc)
        finally:
            self.close()

    def _peek_looks_like_http(self) -> bool:
        """Classify the framing from the client's first bytes.

        Browsers send their HTTP request immediately; a client that stays
        silent briefly is a raw stream listener and must not be kept
        waiting for its snapshot.
        """
        self.sock.settimeout(0.25)
        try:
            data = self.sock.recv(4, socket.MSG_PEEK)
            if not data:
                raise _ClientGone("closed before handshake")
            return data[:4] in (b"GET ", b"HEAD", b"POST")
        except TimeoutError:
            return False
        finally:
            self.sock.settimeout(None)

    def _handle_command_line(self, line: bytes, offset: int) -> None:
        try:
            message = decode_line(line, offset)
        except ProtocolError as exc:
            # reject this message, keep the connection; echo the command_id
            # if one survives in the raw document
            command_id = None
            try:
                raw = json.loads(line.decode("utf-8", "replace"))
                if isinstance(raw, dict) and isinstance(raw.get("command_id"),
                                                        str):
                    command_id = raw["command_id"]
            except (json.JSONDecodeError, ValueError):
                pass
            self.enqueue("ack", {"command_id": command_id, "accepted": False,
                                 "reason": str(exc)})
            return
        if message is None:
            log.warning("client %s sent a blank line, skipped", self.addr)
            return
        if not isinstance(message, CommandMessage):
            self.enqueue("ack", {"command_id": None, "accepted": False,
                                 "reason": "clients may only send commands"})
            return
        command_id = message.command_id

        def reply(accepted: bool, detail: str) -> None:
            self.enqueue("ack", {"command_id": command_id,
                                 "accepted": accepted, "reason": detail})

        self.server.command_sink(message, reply)

    def _ndjson_read_commands(self) -> None:
        offset = 0
        stream = self.sock.makefile("rb")
        for line in stream:
            self._handle_command_line(line, offset)
            offset += len(line)

    # ------------------------------------------------------------- websocket

    def _http_entry(self) -> bool:
        """Handle the HTTP request; True if upgraded to a WebSocket."""
        request = _read_http_request(self.sock)
        headers = _parse_headers(request)
        if headers.get("upgrade", "").lower() == "websocket":
            key = headers.get("sec-websocket-key", "")
            accept = base64.b64encode(
                hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
            self.sock.sendall(
                b"HTTP/1.1 101 Switching Protocols\r\n"
                b"Upgrade: websocket\r\nConnection: Upgrade\r\n"
                b"Sec-WebSocket-Accept: " + accept.encode() + b"\r\n\r\n")
            return True
        # plain HTTP: serve the console bundle if configured
        path = request.split(b" ", 2)[1].decode("utf-8", "replace") \
            if b" " in request else "/"
        self._serve_static(path.split("?", 1)[0])
        raise _ClientGone("http request served")

    def _serve_static(self, path: str) -> None:
        root = self.server.static_root
        body, status, ctype = b"not found\n", "404 Not Found", "text/plain"
        if root is not None:
            target = (root / path.lstrip("/")) if path not in ("", "/") \
                else root / "index.html"
            try:
                target = target.resolve()
                if str(target).startswith(str(root.resolve())) and target.is_file():
                    body = target.read_bytes()
                    status = "200 OK"
                    ctype = mimetypes.guess_type(target.name)[0] or \
                        "application/octet-stream"
            except OSError:
                pass
        head = (f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n")
        self.sock.sendall(head.encode() + body)

    def _ws_read_commands(self) -> None:
        assembled = b""
        while True:
            fin, opcode, data = _ws_read_frame(self.sock)
            if opcode == 0x8:                      # close
                raise _ClientGone("websocket close")
            if opcode == 0x9:                      # ping -> pong
                self.sock.sendall(_ws_frame(data, opcode=0xA))
                continue
            if opcode in (0x1, 0x2, 0x0):
                assembled += data
                if fin:
                    self._handle_command_line(assembled, 0)
                    assembled = b""


class TelemetryServer:
    """Accepts clients, fans out broadcasts, funnels commands to one sink."""

    def __init__(self, host: str, port: int, *, command_sink: CommandSink,
                 snapshot_provider: SnapshotProvider,
                 static_root: Path | None = None, client_buffer: int = 256,
                 send_snapshot_on_connect: bool = True):
        self.command_sink = command_sink
        self.snapshot_provider = snapshot_provider
        self.static_root = static_root
        self.client_buffer = client_buffer
        self.send_snapshot_on_connect = send_snapshot_on_connect
        self._clients: list[ClientConnection] = []
        self._clients_lock = threading.Lock()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))          # raises if the port is busy
        self._listener.listen(8)
        self.port = self._listener.getsockname()[1]
        self._accepting = True
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               daemon=True)

    def start(self) -> "TelemetryServer":
        self._accept_thread.start()
        return self

    def stop(self) -> None:
        self._accepting = False
        try:
            self._listener.close()
        except OSError:
            pass
        for client in self.clients():
            client.close()

    def clients(self) -> list[ClientConnection]:
        with self._clients_lock:
            return list(self._clients)

    def broadcast(self, kind: str, payload: dict) -> None:
        for client in self.clients():
            client.enqueue(kind, payload)

    def broadcast_verbatim(self, message: TelemetryMessage) -> None:
        for client in self.clients():
            client.enqueue_verbatim(message)

    # ------------------------------------------------------------- internals

    def _accept_loop(self) -> None:
        while self._accepting:
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            ClientConnection(sock, addr, self).start()

    def _welcome(self, client: ClientConnection) -> None:
        """Snapshot-then-stream: the snapshot is queued atomically with the
        client becoming visible to broadcasts, so it is always first."""
        with self._clients_lock:
            if self.send_snapshot_on_connect:
                client.enqueue("state", self.snapshot_provider())
            self._clients.append(client)

    def _forget(self, client: ClientConnection) -> None:
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)


# ---------------------------------------------------------------- websocket

def _read_http_request(sock: socket.socket) -> bytes:
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise _ClientGone("closed during http request")
        data += chunk
        if len(data) > 65536:
            raise ProtocolError("oversized http request")
    return data


def _parse_headers(request: bytes) -> dict[str, str]:
    headers: dict[str, str] = {}
    for raw in request.split(b"\r\n")[1:]:
        if b":" in raw:
            name, _, value = raw.partition(b":")
            headers[name.decode("latin1").strip().lower()] = \
                value.decode("latin1").strip()
    return headers


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    data = b""
    while len(data) < n:
        chunk = sock.recv(n - len(data))
        if not chunk:
            raise _ClientGone("closed mid-frame")
        data += chunk
    return data


def _ws_read_frame(sock: socket.socket) -> tuple[bool, int, bytes]:
    head = _recv_exact(sock, 2)
    fin = bool(head[0] & 0x80)
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        length = struct.unpack(">H", _recv_exact(sock, 2))[0]
    elif length == 127:
        length = struct.unpack(">Q", _recv_exact(sock, 8))[0]
    mask = _recv_exact(sock, 4) if masked else b"\x00" * 4
    data = _recv_exact(sock, length)
    if masked:
        data = bytes(b ^ mask[i % 4] for i, b in enumerate(data))
    return fin, opcode, data


def _ws_frame(data: bytes, opcode: int = 0x1) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(data)
    if n < 126:
        head += bytes([n])
    elif n < 65536:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + data
