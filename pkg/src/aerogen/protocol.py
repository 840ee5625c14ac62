"""Wire format for the scenario-control connection.

Every message is a 4-byte big-endian unsigned length followed by exactly
that many bytes of UTF-8 JSON.  Frame replies are followed by a raw PNG
payload of exactly ``payload_bytes`` bytes (the payload has no own length
prefix).  JSON object keys are always emitted sorted, so encodings are
byte-stable.  docs/protocol.md documents the message schema; this module
and that file must agree.
"""

from __future__ import annotations

import json
import socket
import struct

from .errors import MessageDecodeError, ProtocolError

LENGTH_BYTES = 4
LENGTH_FORMAT = ">I"
MAX_MESSAGE_BYTES = 1 << 20       # JSON messages; PNG payloads are separate
MAX_PAYLOAD_BYTES = 1 << 28


def encode_message(obj: dict) -> bytes:
    """dict -> length-prefixed UTF-8 JSON bytes."""
    body = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    if len(body) > MAX_MESSAGE_BYTES:
        raise ProtocolError(
            f"message of {len(body)} bytes exceeds {MAX_MESSAGE_BYTES}")
    return struct.pack(LENGTH_FORMAT, len(body)) + body


def decode_message(data: bytes) -> dict:
    """Inverse of encode_message for a single complete buffer."""
    if len(data) < LENGTH_BYTES:
        raise ProtocolError("buffer shorter than the length prefix")
    (length,) = struct.unpack(LENGTH_FORMAT, data[:LENGTH_BYTES])
    if length > MAX_MESSAGE_BYTES:
        raise ProtocolError(f"declared length {length} exceeds limit")
    body = data[LENGTH_BYTES:]
    if len(body) != length:
        raise ProtocolError(
            f"declared length {length}, got {len(body)} body bytes")
    return _parse_body(body)


def _parse_body(body: bytes) -> dict:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MessageDecodeError(f"body is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MessageDecodeError("message must be a JSON object")
    return obj


class MessageStream:
    """Blocking message reader/writer over a connected socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def _read_exact(self, n: int, *, allow_eof_at_start: bool = False):
        chunks = []
        got = 0
        while got < n:
            try:
                chunk = self._sock.recv(min(65536, n - got))
            except socket.timeout as exc:
                raise ProtocolError("timed out mid-message") from exc
            except OSError as exc:
                raise ProtocolError(f"socket error: {exc}") from exc
            if not chunk:
                if got == 0 and allow_eof_at_start:
                    return None
                raise ProtocolError(
                    f"connection closed after {got} of {n} bytes")
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def read_message(self):
        """Next JSON message, or None on clean EOF between messages."""
        prefix = self._read_exact(LENGTH_BYTES, allow_eof_at_start=True)
        if prefix is None:
            return None
        (length,) = struct.unpack(LENGTH_FORMAT, prefix)
        if length == 0:
            raise ProtocolError("zero-length message")
        if length > MAX_MESSAGE_BYTES:
            raise ProtocolError(
                f"declared length {length} exceeds {MAX_MESSAGE_BYTES}")
        return _parse_body(self._read_exact(length))

    def read_payload(self, n: int) -> bytes:
        if not 0 < n <= MAX_PAYLOAD_BYTES:
            raise ProtocolError(f"payload size {n} out of range")
        return self._read_exact(n)

    def write_message(self, obj: dict) -> None:
        self.write_bytes(encode_message(obj))

    def write_bytes(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise ProtocolError(f"socket error: {exc}") from exc
