import * as assert from "node:assert/strict";
import * as fs from "node:fs";
import * as path from "node:path";
import { test } from "node:test";

import { formatFixed6, pythonFloatRepr } from "../src/format";

const FIXTURES = path.resolve(__dirname, "../../fixtures");

function loadCases(): Array<[number, string]> {
  const raw = fs.readFileSync(path.join(FIXTURES, "format_cases.json"), "utf8");
  return JSON.parse(raw);
}

test("formatFixed6 matches every golden case", () => {
  const cases = loadCases();
  assert.ok(cases.length > 500);
  for (const [value, expected] of cases) {
    assert.equal(formatFixed6(value), expected, `value ${value}`);
  }
});

test("formatFixed6 rounds exact ties to even", () => {
  // 1/128 and 3/128 are exactly representable; their 6th decimal digit
  // sits exactly on a rounding boundary.
  assert.equal(formatFixed6(0.0078125), "0.007812");
  assert.equal(formatFixed6(0.0234375), "0.023438");
  assert.equal(formatFixed6(-0.0078125), "-0.007812");
});

test("formatFixed6 handles signed zero and integers", () => {
  assert.equal(formatFixed6(0), "0.000000");
  assert.equal(formatFixed6(-0), "-0.000000");
  assert.equal(formatFixed6(3), "3.000000");
  assert.equal(formatFixed6(-12.5), "-12.500000");
});

test("pythonFloatRepr picks positional vs scientific like CPython", () => {
  assert.equal(pythonFloatRepr(50), "50.0");
  assert.equal(pythonFloatRepr(-0), "-0.0");
  assert.equal(pythonFloatRepr(0.1), "0.1");
  assert.equal(pythonFloatRepr(1 / 3), "0.3333333333333333");
  assert.equal(pythonFloatRepr(1e16), "1e+16");
  assert.equal(pythonFloatRepr(1e15), "1000000000000000.0");
  assert.equal(pythonFloatRepr(1e-4), "0.0001");
  assert.equal(pythonFloatRepr(1e-5), "1e-05");
  assert.equal(pythonFloatRepr(1.5e-7), "1.5e-07");
  assert.equal(pythonFloatRepr(5e-324), "5e-324");
  assert.equal(pythonFloatRepr(1.7976931348623157e308), "1.7976931348623157e+308");
});

test("pythonFloatRepr rejects non-finite input", () => {
  assert.throws(() => pythonFloatRepr(Infinity));
  assert.throws(() => pythonFloatRepr(NaN));
});
