/**
 * Numeric formatting that byte-matches the server's Python reference.
 *
 * Label files use fixed six-decimal formatting with IEEE round-half-even
 * of the exact binary value (C printf "%.6f" semantics). JavaScript's
 * toFixed rounds ties away from zero, so the exact value is reconstructed
 * from the float's bit pattern and rounded with BigInt arithmetic.
 */

const SCALE = 1000000n;

/** Format a finite double to six decimals, ties to even, like "%.6f". */
export function formatFixed6(x: number): string {
  if (!Number.isFinite(x)) {
    throw new RangeError(`formatFixed6: non-finite value ${x}`);
  }
  const view = new DataView(new ArrayBuffer(8));
  view.setFloat64(0, x);
  const hi = view.getUint32(0);
  const lo = view.getUint32(4);
  const negative = (hi >>> 31) === 1;
  const biasedExp = (hi >>> 20) & 0x7ff;
  const fraction = (BigInt(hi & 0xfffff) << 32n) | BigInt(lo);

  let mantissa: bigint;
  let exp2: number;
  if (biasedExp === 0) {
    mantissa = fraction; // subnormal (or zero)
    exp2 = -1074;
  } else {
    mantissa = fraction | (1n << 52n);
    exp2 = biasedExp - 1075;
  }

  // exact |x| * 10^6 = scaled * 2^exp2
  const scaled = mantissa * SCALE;
  let units: bigint;
  if (exp2 >= 0) {
    units = scaled << BigInt(exp2);
  } else {
    const shift = BigInt(-exp2);
    units = scaled >> shift;
    const remainder = scaled & ((1n << shift) - 1n);
    const half = 1n << (shift - 1n);
    if (remainder > half || (remainder === half && (units & 1n) === 1n)) {
      units += 1n;
    }
  }

  const whole = units / SCALE;
  const frac = units % SCALE;
  const body = `${whole}.${frac.toString().padStart(6, "0")}`;
  return negative ? `-${body}` : body;
}

/**
 * Python repr() of a float: shortest round-trip digits, positional form
 * for decimal exponents in [-4, 15], otherwise scientific with a signed,
 * zero-padded two-digit exponent, and a trailing ".0" on integral values.
 * V8 and CPython agree on the shortest digit strings, so only the layout
 * needs translating.
 */
export function pythonFloatRepr(x: number): string {
  if (!Number.isFinite(x)) {
    throw new RangeError(`pythonFloatRepr: non-finite value ${x}`);
  }
  if (Number.isInteger(x) && Math.abs(x) < 1e16) {
    const digits = Object.is(x, -0) ? "-0" : x.toFixed(0);
    return `${digits}.0`;
  }

  const sign = x < 0 ? "-" : "";
  let s = String(Math.abs(x));
  let exp10 = 0;
  const eAt = s.indexOf("e");
  if (eAt >= 0) {
    exp10 = parseInt(s.slice(eAt + 1), 10);
    s = s.slice(0, eAt);
  }
  const dotAt = s.indexOf(".");
  let pointPos = dotAt >= 0 ? dotAt : s.length;
  let digits = s.replace(".", "");
  while (digits.length > 1 && digits[0] === "0") {
    digits = digits.slice(1);
    pointPos -= 1;
  }
  digits = digits.replace(/0+$/, "") || "0";
  // decimal exponent of the leading significant digit
  const dec = digits === "0" ? 0 : pointPos - 1 + exp10;

  if (dec >= -4 && dec <= 15) {
    if (dec >= digits.length - 1) {
      return `${sign}${digits}${"0".repeat(dec - digits.length + 1)}.0`;
    }
    if (dec >= 0) {
      return `${sign}${digits.slice(0, dec + 1)}.${digits.slice(dec + 1)}`;
    }
    return `${sign}0.${"0".repeat(-dec - 1)}${digits}`;
  }
  const mantissa =
    digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
  const expSign = dec < 0 ? "-" : "+";
  const expDigits = Math.abs(dec).toString().padStart(2, "0");
  return `${sign}${mantissa}e${expSign}${expDigits}`;
}
