/**
 * Wire format: 4-byte big-endian length prefix, UTF-8 JSON object body.
 *
 * Encodings must be byte-identical to the server's Python reference:
 * object keys sorted by code point, compact separators, non-ASCII and
 * control characters escaped as \uXXXX per UTF-16 code unit, and Python's
 * distinction between int and float preserved. JavaScript numbers carry
 * no such distinction, so float-typed protocol fields are wrapped in
 * {@link Float}; plain integral numbers encode as Python ints.
 */

import { pythonFloatRepr } from "./format";

export const LENGTH_BYTES = 4;
export const MAX_MESSAGE_BYTES = 1 << 20;
export const MAX_PAYLOAD_BYTES = 1 << 28;

/** Marks a number that must encode as a Python float (e.g. "50.0"). */
export class Float {
  constructor(readonly value: number) {
    if (!Number.isFinite(value)) {
      throw new RangeError(`Float: non-finite value ${value}`);
    }
  }
}

/** Shorthand for wrapping float-typed protocol fields. */
export function flt(value: number): Float {
  return new Float(value);
}

export type Encodable =
  | null
  | boolean
  | number
  | bigint
  | string
  | Float
  | Encodable[]
  | { [key: string]: Encodable };

/** Raised on framing violations; the connection must be abandoned. */
export class ProtocolError extends Error {}

/** Raised when a well-framed body is not a JSON object. */
export class MessageDecodeError extends ProtocolError {}

const SHORT_ESCAPES: Record<number, string> = {
  0x08: "\\b",
  0x09: "\\t",
  0x0a: "\\n",
  0x0c: "\\f",
  0x0d: "\\r",
  0x22: '\\"',
  0x5c: "\\\\",
};

function escapeString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const code = s.charCodeAt(i);
    const short = SHORT_ESCAPES[code];
    if (short !== undefined) {
      out += short;
    } else if (code < 0x20 || code > 0x7e) {
      out += "\\u" + code.toString(16).padStart(4, "0");
    } else {
      out += s[i];
    }
  }
  return out + '"';
}

/** Python sorts str keys by code point; JS string compare uses UTF-16
 * code units, which disagrees for astral characters. */
function codePointCompare(a: string, b: string): number {
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    const ca = a.codePointAt(i) as number;
    const cb = b.codePointAt(j) as number;
    if (ca !== cb) {
      return ca - cb;
    }
    i += ca > 0xffff ? 2 : 1;
    j += cb > 0xffff ? 2 : 1;
  }
  return a.length - i - (b.length - j);
}

function encodeNumber(x: number): string {
  if (Number.isInteger(x) && !Object.is(x, -0)) {
    if (Math.abs(x) > Number.MAX_SAFE_INTEGER) {
      throw new RangeError(
        `integer ${x} is outside the exact double range; `
        + "pass a bigint or wrap in Float");
    }
    return x.toFixed(0);
  }
  return pythonFloatRepr(x);
}

export function jsonBody(value: Encodable): string {
  if (value === null) {
    return "null";
  }
  switch (typeof value) {
    case "boolean":
      return value ? "true" : "false";
    case "number":
      return encodeNumber(value);
    case "bigint":
      return value.toString(10);
    case "string":
      return escapeString(value);
    case "object":
      break;
    default:
      throw new TypeError(`cannot encode ${typeof value}`);
  }
  if (value instanceof Float) {
    return pythonFloatRepr(value.value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(jsonBody).join(",") + "]";
  }
  const keys = Object.keys(value).sort(codePointCompare);
  const parts = keys.map(
    (k) => `${escapeString(k)}:${jsonBody((value as Record<string, Encodable>)[k])}`);
  return "{" + parts.join(",") + "}";
}

export function encodeMessage(obj: Record<string, Encodable>): Buffer {
  const body = Buffer.from(jsonBody(obj), "utf8");
  if (body.length > MAX_MESSAGE_BYTES) {
    throw new ProtocolError(
      `message of ${body.length} bytes exceeds ${MAX_MESSAGE_BYTES}`);
  }
  const out = Buffer.allocUnsafe(LENGTH_BYTES + body.length);
  out.writeUInt32BE(body.length, 0);
  body.copy(out, LENGTH_BYTES);
  return out;
}

const strictUtf8 = new TextDecoder("utf-8", { fatal: true });

export function parseBody(body: Buffer): Record<string, unknown> {
  let parsed: unknown;
  try {
    parsed = JSON.parse(strictUtf8.decode(body));
  } catch (err) {
    throw new MessageDecodeError(`body is not UTF-8 JSON: ${err}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new MessageDecodeError("message must be a JSON object");
  }
  return parsed as Record<string, unknown>;
}

export function decodeMessage(data: Buffer): Record<string, unknown> {
  if (data.length < LENGTH_BYTES) {
    throw new ProtocolError("buffer shorter than the length prefix");
  }
  const length = data.readUInt32BE(0);
  if (length > MAX_MESSAGE_BYTES) {
    throw new ProtocolError(`declared length ${length} exceeds limit`);
  }
  if (data.length - LENGTH_BYTES !== length) {
    throw new ProtocolError(
      `declared length ${length}, got ${data.length - LENGTH_BYTES} body bytes`);
  }
  return parseBody(data.subarray(LENGTH_BYTES));
}
