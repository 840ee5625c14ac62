"""Wire format and the scenario-control server."""

import io
import json
import socket
import struct
import threading

import numpy as np
import pytest
from hypothesis import given, settings as hyp
from hypothesis import strategies as st

from aerogen.errors import MessageDecodeError, ProtocolError
from aerogen.protocol import (LENGTH_BYTES, MAX_MESSAGE_BYTES, MessageStream,
                              decode_message, encode_message)
from aerogen.server import ScenarioServer, ServerConfig

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6)
    | st.floats(allow_nan=False, allow_infinity=False, width=32)
    | st.text(max_size=12),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=12)
json_objects = st.dictionaries(st.text(max_size=8), json_values, max_size=6)


class TestEncodeDecode:
    def test_layout(self):
        data = encode_message({"b": 1, "a": 2})
        assert data[:LENGTH_BYTES] == struct.pack(">I", len(data) - 4)
        assert data[LENGTH_BYTES:] == b'{"a":2,"b":1}'  # sorted, compact

    def test_round_trip_simple(self):
        msg = {"cmd": "ping", "n": 3, "x": [1, 2, {"y": None}]}
        assert decode_message(encode_message(msg)) == msg

    @hyp(max_examples=150, deadline=None)
    @given(json_objects)
    def test_round_trip_random(self, msg):
        assert decode_message(encode_message(msg)) == msg

    def test_decode_rejects_short_buffer(self):
        with pytest.raises(ProtocolError):
            decode_message(b"\x00\x00")

    def test_decode_rejects_length_mismatch(self):
        with pytest.raises(ProtocolError):
            decode_message(struct.pack(">I", 10) + b"{}")

    def test_decode_rejects_oversized(self):
        with pytest.raises(ProtocolError):
            decode_message(struct.pack(">I", MAX_MESSAGE_BYTES + 1))

    def test_decode_rejects_non_object(self):
        for body in (b'"x"', b"[1,2,3]", b"17"):
            with pytest.raises(MessageDecodeError):
                decode_message(struct.pack(">I", len(body)) + body)

    def test_decode_rejects_bad_utf8(self):
        body = b"\xff\xfe{}"
        with pytest.raises(MessageDecodeError):
            decode_message(struct.pack(">I", len(body)) + body)

    def test_encode_rejects_oversized(self):
        with pytest.raises(ProtocolError):
            encode_message({"blob": "x" * (MAX_MESSAGE_BYTES + 1)})


class TestMessageStream:
    def pair(self):
        a, b = socket.socketpair()
        return MessageStream(a), MessageStream(b), a, b

    def test_write_then_read(self):
        sa, sb, a, b = self.pair()
        sa.write_message({"cmd": "ping"})
        assert sb.read_message() == {"cmd": "ping"}
        a.close(); b.close()

    def test_clean_eof_returns_none(self):
        sa, sb, a, b = self.pair()
        a.close()
        assert sb.read_message() is None
        b.close()

    def test_eof_mid_message_raises(self):
        sa, sb, a, b = self.pair()
        a.sendall(struct.pack(">I", 10) + b"{}")
        a.close()
        with pytest.raises(ProtocolError):
            sb.read_message()
        b.close()

    def test_zero_length_raises(self):
        sa, sb, a, b = self.pair()
        a.sendall(struct.pack(">I", 0))
        with pytest.raises(ProtocolError):
            sb.read_message()
        a.close(); b.close()

    def test_oversized_length_raises(self):
        sa, sb, a, b = self.pair()
        a.sendall(struct.pack(">I", MAX_MESSAGE_BYTES + 5))
        with pytest.raises(ProtocolError):
            sb.read_message()
        a.close(); b.close()

    def test_payload_round_trip(self):
        sa, sb, a, b = self.pair()
        blob = bytes(range(256)) * 4
        sa.write_bytes(blob)
        assert sb.read_payload(len(blob)) == blob
        a.close(); b.close()

    def test_payload_size_validated(self):
        sa, sb, a, b = self.pair()
        with pytest.raises(ProtocolError):
            sb.read_payload(0)
        a.close(); b.close()


@pytest.fixture(scope="module")
def server():
    srv = ScenarioServer(ServerConfig(
        port=0, width=96, height=96, supersample=2, quality="low",
        recv_timeout=20.0))
    srv.start()
    yield srv
    srv.stop()


def connect(srv):
    sock = socket.create_connection(("127.0.0.1", srv.port), timeout=20.0)
    return sock, MessageStream(sock)


def rpc(stream, **msg):
    stream.write_message(msg)
    return stream.read_message()


class TestServerCommands:
    def test_ping(self, server):
        sock, stream = connect(server)
        try:
            assert rpc(stream, cmd="ping") == {"ok": True, "event": "pong"}
        finally:
            sock.close()

    def test_pose_weather_clock_quality(self, server):
        sock, stream = connect(server)
        try:
            r = rpc(stream, cmd="set_camera_pose", position=[1.0, 2.0, 30.0],
                    yaw=45.0, pitch=60.0, roll=0.0)
            assert r["ok"]
            assert rpc(stream, cmd="set_clock", clock=90000.0) == {
                "ok": True, "clock": 3600.0}
            assert rpc(stream, cmd="set_weather", weather="rain")["ok"]
            assert rpc(stream, cmd="set_quality", quality="high")["ok"]
        finally:
            sock.close()

    def test_invalid_requests_keep_connection(self, server):
        sock, stream = connect(server)
        try:
            assert not rpc(stream, cmd="warp_drive")["ok"]
            assert not rpc(stream, cmd="set_weather", weather="snow")["ok"]
            assert not rpc(stream, cmd="set_camera_pose", position=[1.0],
                           yaw=0.0, pitch=0.0, roll=0.0)["ok"]
            assert not rpc(stream, cmd="spawn", **{"class": "cow"})["ok"]
            assert not rpc(stream)["ok"]  # no cmd at all
            assert rpc(stream, cmd="ping")["event"] == "pong"
        finally:
            sock.close()

    def test_spawn_and_frame(self, server):
        sock, stream = connect(server)
        try:
            r = rpc(stream, cmd="set_camera_pose", position=[0.0, 0.0, 25.0],
                    yaw=0.0, pitch=90.0, roll=0.0)
            assert r["ok"]
            r1 = rpc(stream, cmd="spawn", **{"class": "cow",
                                             "position": [0.0, 0.0]})
            r2 = rpc(stream, cmd="spawn", **{"class": "car",
                                             "position": [4.0, 3.0],
                                             "heading": 90.0})
            assert r1["ok"] and r2["ok"]
            assert r2["object_id"] == r1["object_id"] + 1

            stream.write_message({"cmd": "request_frame"})
            head = stream.read_message()
            assert head["event"] == "frame"
            assert head["width"] == 96 and head["height"] == 96
            png = stream.read_payload(head["payload_bytes"])
            from PIL import Image
            img = np.asarray(Image.open(io.BytesIO(png)))
            assert img.shape == (96, 96, 3)
            anns = {a["id"]: a for a in head["annotations"]}
            assert r1["object_id"] in anns
            cow = anns[r1["object_id"]]
            assert cow["class"] == "cow"
            assert len(cow["bbox"]) == 4
            assert 0.0 < cow["visibility"] <= 1.0
            assert head["meta"]["pose"]["pitch"] == 90.0
        finally:
            sock.close()

    def test_goto_moves_camera(self, server):
        sock, stream = connect(server)
        try:
            rpc(stream, cmd="set_camera_pose", position=[0.0, 0.0, 30.0],
                yaw=10.0, pitch=70.0, roll=0.0)
            assert rpc(stream, cmd="goto", position=[5.0, 6.0, 40.0])["ok"]
            stream.write_message({"cmd": "request_frame"})
            head = stream.read_message()
            stream.read_payload(head["payload_bytes"])
            pose = head["meta"]["pose"]
            assert pose["position"] == [5.0, 6.0, 40.0]
            assert pose["yaw"] == 10.0 and pose["pitch"] == 70.0
        finally:
            sock.close()

    def test_frame_ids_increment(self, server):
        sock, stream = connect(server)
        try:
            ids = []
            for _ in range(2):
                stream.write_message({"cmd": "request_frame"})
                head = stream.read_message()
                stream.read_payload(head["payload_bytes"])
                ids.append(head["frame_id"])
            assert ids == [0, 1]  # fresh session counts from zero
        finally:
            sock.close()

    def test_malformed_json_keeps_connection(self, server):
        sock, stream = connect(server)
        try:
            body = b"{not json"
            sock.sendall(struct.pack(">I", len(body)) + body)
            reply = stream.read_message()
            assert reply["ok"] is False
            assert rpc(stream, cmd="ping")["event"] == "pong"
        finally:
            sock.close()

    def test_framing_violation_closes_connection(self, server):
        sock, stream = connect(server)
        try:
            sock.sendall(struct.pack(">I", MAX_MESSAGE_BYTES + 1))
            reply = stream.read_message()
            assert reply["ok"] is False
            assert stream.read_message() is None  # server hung up
        finally:
            sock.close()

    def test_stop_closes_and_server_survives(self, server):
        sock, stream = connect(server)
        assert rpc(stream, cmd="stop")["event"] == "stopped"
        assert stream.read_message() is None
        sock.close()
        sock2, stream2 = connect(server)
        try:
            assert rpc(stream2, cmd="ping")["event"] == "pong"
        finally:
            sock2.close()

    def test_start_scenario_streams_frames(self, server):
        sock, stream = connect(server)
        try:
            config = {
                "biome": "pasture",
                "area": [-200.0, -200.0, 200.0, 200.0],
                "seed": 5,
                "frame_count": 2,
                "altitude_range": [20.0, 40.0],
                "pitch_range": [60.0, 90.0],
                "spawn_rules": ["2xcow@2s"],
                "spawn_forward_range": [5.0, 40.0],
                "spawn_lateral_range": [-20.0, 20.0],
                "quality": "low",
                "image": {"width": 64, "height": 64, "supersample": 1},
            }
            stream.write_message({"cmd": "start_scenario", "config": config})
            events = []
            for _ in range(2):
                head = stream.read_message()
                assert head["event"] == "frame"
                # scenario frames use the config's image size, not the
                # server's interactive size
                assert head["width"] == 64 and head["height"] == 64
                stream.read_payload(head["payload_bytes"])
                events.append(head["frame_id"])
            done = stream.read_message()
            assert done == {"ok": True, "event": "scenario_complete",
                            "frames": 2}
        finally:
            sock.close()

    def test_start_scenario_requires_exactly_one_source(self, server):
        sock, stream = connect(server)
        try:
            r = rpc(stream, cmd="start_scenario")
            assert not r["ok"]
            r = rpc(stream, cmd="start_scenario", preset="cattle",
                    config={"biome": "pasture"})
            assert not r["ok"]
            assert rpc(stream, cmd="ping")["event"] == "pong"
        finally:
            sock.close()
