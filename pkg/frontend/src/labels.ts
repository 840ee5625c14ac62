/**
 * Client-side label derivation, byte-identical to the server's dataset
 * writer: "<class_index> <cx> <cy> <w> <h>" normalized to the image size,
 * six decimals each, one line per annotation in annotation order.
 */

import { formatFixed6 } from "./format";

/** The server's object catalog in index order (alphabetical). */
export const CLASS_NAMES: readonly string[] = [
  "bicycle",
  "boat",
  "bus",
  "car",
  "cow",
  "floater",
  "floater-on-boat",
  "motor",
  "people",
  "swimmer",
  "swimmer-on-boat",
  "truck",
  "van",
];

export const CLASS_INDEX: ReadonlyMap<string, number> = new Map(
  CLASS_NAMES.map((name, i) => [name, i]),
);

/** One annotation as delivered in a frame event. */
export interface FrameAnnotation {
  class: string;
  /** Half-open output-pixel box [x_min, y_min, x_max, y_max]. */
  bbox: [number, number, number, number];
}

export function labelLine(
  ann: FrameAnnotation,
  width: number,
  height: number,
): string {
  const index = CLASS_INDEX.get(ann.class);
  if (index === undefined) {
    throw new Error(`unknown class ${JSON.stringify(ann.class)}`);
  }
  const [x0, y0, x1, y1] = ann.bbox;
  const cx = (x0 + x1) / (2 * width);
  const cy = (y0 + y1) / (2 * height);
  const w = (x1 - x0) / width;
  const h = (y1 - y0) / height;
  return `${index} ${formatFixed6(cx)} ${formatFixed6(cy)} ` +
    `${formatFixed6(w)} ${formatFixed6(h)}`;
}

export function labelLines(
  annotations: readonly FrameAnnotation[],
  width: number,
  height: number,
): string[] {
  return annotations.map((ann) => labelLine(ann, width, height));
}

/** Full label-file text: each line newline-terminated, empty for none. */
export function labelFileText(
  annotations: readonly FrameAnnotation[],
  width: number,
  height: number,
): string {
  return labelLines(annotations, width, height)
    .map((line) => line + "\n")
    .join("");
}
