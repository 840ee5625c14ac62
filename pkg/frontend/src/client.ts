/**
 * Scripting client for the scenario-control server.
 *
 * One in-flight request at a time, mirroring the server's synchronous
 * request/reply discipline. Frame events carry a raw PNG payload after
 * the JSON header; readers here keep the byte stream aligned.
 */

import * as net from "node:net";

import {
  Encodable,
  Float,
  MAX_MESSAGE_BYTES,
  MAX_PAYLOAD_BYTES,
  ProtocolError,
  encodeMessage,
  flt,
  parseBody,
} from "./protocol";

/** The server answered with {"ok": false}. The connection stays usable. */
export class CommandError extends Error {}

export interface FramePose {
  position: [number, number, number];
  yaw: number;
  pitch: number;
  roll: number;
}

export interface FrameMeta {
  clock: number;
  weather: string;
  biome: string;
  quality: string;
  pose: FramePose;
}

export interface AnnotationRecord {
  id: number;
  class: string;
  bbox: [number, number, number, number];
  visible_pixels: number;
  visibility: number;
  truncated: boolean;
}

export interface FrameEvent {
  frameId: number;
  width: number;
  height: number;
  annotations: AnnotationRecord[];
  meta: FrameMeta;
  png: Buffer;
}

export type ScenarioSource =
  | { preset: string; overrides?: Record<string, Encodable> }
  | { config: Record<string, Encodable> };

function toFrameEvent(head: Record<string, unknown>, png: Buffer): FrameEvent {
  return {
    frameId: head.frame_id as number,
    width: head.width as number,
    height: head.height as number,
    annotations: head.annotations as AnnotationRecord[],
    meta: head.meta as FrameMeta,
    png,
  };
}

export class ScenarioClient {
  private chunks: Buffer[] = [];
  private buffered = 0;
  private eof = false;
  private failure: Error | null = null;
  private notify: (() => void) | null = null;

  private constructor(private readonly sock: net.Socket) {
    sock.on("data", (chunk: Buffer) => {
      this.chunks.push(chunk);
      this.buffered += chunk.length;
      this.wake();
    });
    sock.on("end", () => {
      this.eof = true;
      this.wake();
    });
    sock.on("error", (err: Error) => {
      this.failure = err;
      this.wake();
    });
  }

  static connect(port: number, host = "127.0.0.1"): Promise<ScenarioClient> {
    return new Promise((resolve, reject) => {
      const sock = net.connect({ port, host, noDelay: true });
      sock.once("connect", () => resolve(new ScenarioClient(sock)));
      sock.once("error", reject);
    });
  }

  close(): void {
    this.sock.destroy();
  }

  private wake(): void {
    const pending = this.notify;
    this.notify = null;
    if (pending) {
      pending();
    }
  }

  private async readExact(
    n: number,
    allowEofAtStart: boolean,
  ): Promise<Buffer | null> {
    while (this.buffered < n) {
      if (this.failure) {
        throw new ProtocolError(`socket error: ${this.failure.message}`);
      }
      if (this.eof) {
        if (this.buffered === 0 && allowEofAtStart) {
          return null;
        }
        throw new ProtocolError(
          `connection closed after ${this.buffered} of ${n} bytes`);
      }
      await new Promise<void>((resolve) => {
        this.notify = resolve;
      });
    }
    const whole =
      this.chunks.length === 1 ? this.chunks[0] : Buffer.concat(this.chunks);
    const head = whole.subarray(0, n);
    const rest = whole.subarray(n);
    this.chunks = rest.length > 0 ? [rest] : [];
    this.buffered = rest.length;
    return head;
  }

  /** Next JSON message, or null on clean EOF between messages. */
  async readMessage(): Promise<Record<string, unknown> | null> {
    const prefix = await this.readExact(4, true);
    if (prefix === null) {
      return null;
    }
    const length = prefix.readUInt32BE(0);
    if (length === 0) {
      throw new ProtocolError("zero-length message");
    }
    if (length > MAX_MESSAGE_BYTES) {
      throw new ProtocolError(
        `declared length ${length} exceeds ${MAX_MESSAGE_BYTES}`);
    }
    const body = await this.readExact(length, false);
    return parseBody(body as Buffer);
  }

  async readPayload(n: number): Promise<Buffer> {
    if (!(n > 0 && n <= MAX_PAYLOAD_BYTES)) {
      throw new ProtocolError(`payload size ${n} out of range`);
    }
    return (await this.readExact(n, false)) as Buffer;
  }

  writeMessage(obj: Record<string, Encodable>): void {
    this.sock.write(encodeMessage(obj));
  }

  /** Send one command and return its reply; throws CommandError on
   * {"ok": false}. */
  async request(
    obj: Record<string, Encodable>,
  ): Promise<Record<string, unknown>> {
    this.writeMessage(obj);
    const reply = await this.readMessage();
    if (reply === null) {
      throw new ProtocolError("connection closed before the reply");
    }
    if (reply.ok === false) {
      throw new CommandError(String(reply.error ?? "command failed"));
    }
    return reply;
  }

  // -- typed commands ----------------------------------------------------

  async ping(): Promise<void> {
    await this.request({ cmd: "ping" });
  }

  async setCameraPose(
    position: [number, number, number],
    yaw: number,
    pitch: number,
    roll: number,
  ): Promise<void> {
    await this.request({
      cmd: "set_camera_pose",
      position: position.map(flt),
      yaw: flt(yaw),
      pitch: flt(pitch),
      roll: flt(roll),
    });
  }

  /** Returns the clock wrapped into [0, 86400). */
  async setClock(seconds: number): Promise<number> {
    const reply = await this.request({ cmd: "set_clock", clock: flt(seconds) });
    return reply.clock as number;
  }

  async setWeather(weather: string): Promise<void> {
    await this.request({ cmd: "set_weather", weather });
  }

  async setQuality(quality: "low" | "high"): Promise<void> {
    await this.request({ cmd: "set_quality", quality });
  }

  /** Returns the spawned object id. */
  async spawn(
    className: string,
    position: [number, number],
    heading = 0,
  ): Promise<number> {
    const reply = await this.request({
      cmd: "spawn",
      class: className,
      position: position.map(flt),
      heading: flt(heading),
    });
    return reply.object_id as number;
  }

  async goto(position: [number, number, number]): Promise<void> {
    await this.request({ cmd: "goto", position: position.map(flt) });
  }

  async requestFrame(): Promise<FrameEvent> {
    const head = await this.request({ cmd: "request_frame" });
    if (head.event !== "frame") {
      throw new ProtocolError(`expected a frame event, got ${head.event}`);
    }
    const png = await this.readPayload(head.payload_bytes as number);
    return toFrameEvent(head, png);
  }

  /**
   * Run a scenario; the server streams one frame per tick. Returns the
   * frame count from the completion event.
   */
  async startScenario(
    source: ScenarioSource,
    onFrame?: (frame: FrameEvent) => void | Promise<void>,
  ): Promise<number> {
    const msg: Record<string, Encodable> = { cmd: "start_scenario" };
    if ("preset" in source) {
      msg.preset = source.preset;
      if (source.overrides !== undefined) {
        msg.overrides = source.overrides;
      }
    } else {
      msg.config = source.config;
    }
    this.writeMessage(msg);
    for (;;) {
      const head = await this.readMessage();
      if (head === null) {
        throw new ProtocolError("connection closed mid-scenario");
      }
      if (head.ok === false) {
        throw new CommandError(String(head.error ?? "scenario failed"));
      }
      if (head.event === "frame") {
        const png = await this.readPayload(head.payload_bytes as number);
        if (onFrame) {
          await onFrame(toFrameEvent(head, png));
        }
        continue;
      }
      if (head.event === "scenario_complete") {
        return head.frames as number;
      }
      throw new ProtocolError(`unexpected event ${head.event}`);
    }
  }

  /** Ask the server to end the session; resolves when it hangs up. */
  async stop(): Promise<void> {
    const reply = await this.request({ cmd: "stop" });
    if (reply.event !== "stopped") {
      throw new ProtocolError(`unexpected stop reply ${reply.event}`);
    }
    await this.readMessage(); // drain the EOF
    this.close();
  }
}

export { Float, flt };
