"""TCP scenario-control server.

One client at a time; requests are handled synchronously in arrival order.
Recoverable problems (bad arguments, unknown commands, malformed JSON of a
well-framed message) produce an error reply and leave the connection open.
Framing violations (oversized or zero declared length, truncated messages)
produce a best-effort error reply and close the connection, since byte
alignment with the client is lost.
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass, field

from . import annotate, dataset_io, renderer
from .camera import CameraPose
from .errors import (AerogenError, ConfigError, MessageDecodeError,
                     ProtocolError)
from .protocol import MessageStream
from .renderer import QUALITY_LEVELS, RenderSettings
from .scenario import ScenarioConfig, iter_scenario, load_preset
from .world import Rect, WorldState, get_class

DEFAULT_PORT = 17607


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    width: int = 640
    height: int = 360
    supersample: int = 2
    quality: str = "high"
    biome: str = "pasture"
    area: tuple = (-1000.0, -1000.0, 1000.0, 1000.0)
    seed: int = 0
    recv_timeout: float = 60.0


class _Session:
    """Per-connection interactive state."""

    def __init__(self, cfg: ServerConfig, stream: MessageStream):
        self.cfg = cfg
        self.stream = stream
        self.world = WorldState(cfg.biome, Rect(*cfg.area), cfg.seed)
        self.pose = CameraPose((0.0, 0.0, 50.0), yaw=0.0, pitch=90.0, roll=0.0)
        self.quality = cfg.quality
        self.frame_id = 0
        self.closing = False

    # -- helpers ---------------------------------------------------------

    def _settings(self, grain_seed: int) -> RenderSettings:
        return RenderSettings(
            width=self.cfg.width, height=self.cfg.height,
            supersample=self.cfg.supersample, quality=self.quality,
            grain_seed=grain_seed)

    def _send_frame(self, world: WorldState, pose: CameraPose,
                    clock: float, weather: str,
                    settings: RenderSettings = None) -> None:
        if settings is None:
            settings = self._settings(self.frame_id)
        frame, anns, _ = annotate.capture(world, pose, settings)
        png = dataset_io.encode_png(frame.color)
        self.stream.write_message({
            "ok": True,
            "event": "frame",
            "frame_id": self.frame_id,
            "width": settings.width,
            "height": settings.height,
            "payload_bytes": len(png),
            "annotations": [
                {
                    "id": a.object_id,
                    "class": a.class_name,
                    "bbox": [a.x_min, a.y_min, a.x_max, a.y_max],
                    "visible_pixels": a.visible_pixels,
                    "visibility": round(a.visibility, 6),
                    "truncated": a.truncated,
                }
                for a in anns
            ],
            "meta": {
                "clock": clock,
                "weather": weather,
                "biome": world.biome,
                "quality": settings.quality,
                "pose": {
                    "position": list(pose.position),
                    "yaw": pose.yaw,
                    "pitch": pose.pitch,
                    "roll": pose.roll,
                },
            },
        })
        self.stream.write_bytes(png)
        self.frame_id += 1

    @staticmethod
    def _require(msg: dict, key: str):
        if key not in msg:
            raise ConfigError(f"missing field {key!r}")
        return msg[key]

    @staticmethod
    def _vector(value, n: int, what: str) -> list:
        if (not isinstance(value, (list, tuple)) or len(value) != n
                or not all(isinstance(v, (int, float)) for v in value)):
            raise ConfigError(f"{what} must be a list of {n} numbers")
        return [float(v) for v in value]

    # -- command handlers ------------------------------------------------

    def cmd_ping(self, msg: dict) -> dict:
        return {"ok": True, "event": "pong"}

    def cmd_set_camera_pose(self, msg: dict) -> dict:
        position = self._vector(self._require(msg, "position"), 3, "position")
        pose = CameraPose(
            position=tuple(position),
            yaw=float(self._require(msg, "yaw")),
            pitch=float(self._require(msg, "pitch")),
            roll=float(self._require(msg, "roll")))
        self.pose = pose
        return {"ok": True}

    def cmd_set_clock(self, msg: dict) -> dict:
        clock = self._require(msg, "clock")
        if not isinstance(clock, (int, float)):
            raise ConfigError("clock must be a number of seconds")
        self.world.set_clock(float(clock))
        return {"ok": True, "clock": self.world.clock}

    def cmd_set_weather(self, msg: dict) -> dict:
        self.world.set_weather(str(self._require(msg, "weather")))
        return {"ok": True}

    def cmd_set_quality(self, msg: dict) -> dict:
        quality = str(self._require(msg, "quality"))
        if quality not in QUALITY_LEVELS:
            raise ConfigError(f"quality must be one of {QUALITY_LEVELS}")
        self.quality = quality
        return {"ok": True}

    def cmd_spawn(self, msg: dict) -> dict:
        cls = get_class(str(self._require(msg, "class")))
        x, y = self._vector(self._require(msg, "position"), 2, "position")
        heading = float(msg.get("heading", 0.0))
        oid = self.world.spawn_object(cls, (x, y, 0.0), heading, now=0.0)
        return {"ok": True, "object_id": oid}

    def cmd_goto(self, msg: dict) -> dict:
        position = self._vector(self._require(msg, "position"), 3, "position")
        self.pose = CameraPose(
            position=tuple(position), yaw=self.pose.yaw,
            pitch=self.pose.pitch, roll=self.pose.roll)
        return {"ok": True}

    def cmd_request_frame(self, msg: dict):
        self._send_frame(self.world, self.pose,
                         self.world.clock, self.world.weather)
        return None  # frame already sent

    def cmd_start_scenario(self, msg: dict):
        has_preset = "preset" in msg
        has_config = "config" in msg
        if has_preset == has_config:
            raise ConfigError(
                "start_scenario needs exactly one of 'preset' or 'config'")
        if has_preset:
            config = load_preset(str(msg["preset"]),
                                 overrides=msg.get("overrides"))
        else:
            config = ScenarioConfig.from_dict(dict(msg["config"]))
        sent = 0
        # scenario frames use the scenario's own image settings and grain
        # seeds, so streamed output matches a server-side export
        for sf in iter_scenario(config):
            self.quality = config.quality
            self._send_frame(sf.world, sf.pose, sf.clock, sf.weather,
                             settings=RenderSettings(
                                 width=config.image_width,
                                 height=config.image_height,
                                 supersample=config.supersample,
                                 quality=config.quality,
                                 grain_seed=sf.index))
            sent += 1
        return {"ok": True, "event": "scenario_complete", "frames": sent}

    def cmd_stop(self, msg: dict) -> dict:
        self.closing = True
        return {"ok": True, "event": "stopped"}

    # -- dispatch --------------------------------------------------------

    def handle(self, msg: dict) -> bool:
        """Handle one message; returns False when the session should end."""
        cmd = msg.get("cmd")
        handler = getattr(self, f"cmd_{cmd}", None) if isinstance(cmd, str) else None
        if handler is None or not (isinstance(cmd, str) and cmd.isidentifier()):
            self.stream.write_message(
                {"ok": False, "error": f"unknown command {cmd!r}"})
            return True
        try:
            reply = handler(msg)
        except AerogenError as exc:
            self.stream.write_message({"ok": False, "error": str(exc)})
            return True
        if reply is not None:
            self.stream.write_message(reply)
        return not self.closing


class ScenarioServer:
    """Accept loop around _Session; serves one client at a time."""

    def __init__(self, config: ServerConfig = None):
        self.config = config or ServerConfig()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.config.host, self.config.port))
        self._listener.listen(1)
        self._stopping = threading.Event()
        self._thread = None

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    def serve_forever(self) -> None:
        self._listener.settimeout(0.2)
        try:
            while not self._stopping.is_set():
                try:
                    conn, _ = self._listener.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                with conn:
                    self._serve_client(conn)
        finally:
            self._listener.close()

    def _serve_client(self, conn: socket.socket) -> None:
        conn.settimeout(self.config.recv_timeout)
        stream = MessageStream(conn)
        session = _Session(self.config, stream)
        while not self._stopping.is_set():
            try:
                msg = stream.read_message()
            except MessageDecodeError as exc:
                # frame fully consumed, stream still aligned: keep going
                try:
                    stream.write_message({"ok": False, "error": str(exc)})
                except ProtocolError:
                    return
                continue
            except ProtocolError as exc:
                # framing is broken; report if possible, then drop the client
                try:
                    stream.write_message({"ok": False, "error": str(exc)})
                except ProtocolError:
                    pass
                return
            if msg is None:
                return
            try:
                keep_going = session.handle(msg)
            except ProtocolError:
                return  # client vanished mid-reply
            if not keep_going:
                return

    def start(self) -> None:
        """Run the accept loop in a background thread."""
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stopping.set()
        try:
            self._listener.close()
        except OSError:
            pass
        if self._thread is not None:
            self._thread.join(timeout=5.0)


def run_server(config: ServerConfig = None) -> None:
    """Blocking entry point used by the command line."""
    server = ScenarioServer(config)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
