/** Figure-spec JSON loading and validation. */

import { FIGURE_KINDS, FigureKind, FigureSpec } from "./figures.js";

function isPair(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && v.every((x) => typeof x === "number");
}

export function parseFigureSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("figure spec must be a JSON object");
  }
  const o = raw as Record<string, unknown>;
  if (!FIGURE_KINDS.includes(o.kind as FigureKind)) {
    throw new Error(`unknown figure kind ${JSON.stringify(o.kind)}; expected one of ${FIGURE_KINDS.join(", ")}`);
  }
  if (typeof o.csv !== "string" || o.csv.length === 0) {
    throw new Error("figure spec needs a csv path");
  }
  if (typeof o.output !== "string" || o.output.length === 0) {
    throw new Error("figure spec needs an output path");
  }
  for (const key of ["title", "x_label", "y_label"]) {
    if (o[key] !== undefined && typeof o[key] !== "string") {
      throw new Error(`${key} must be a string`);
    }
  }
  for (const key of ["x_limits", "y_limits"]) {
    if (o[key] !== undefined && !isPair(o[key])) {
      throw new Error(`${key} must be [min, max]`);
    }
  }
  return {
    kind: o.kind as FigureKind,
    csv: o.csv,
    output: o.output,
    title: o.title as string | undefined,
    xLabel: o.x_label as string | undefined,
    yLabel: o.y_label as string | undefined,
    xLimits: o.x_limits as [number, number] | undefined,
    yLimits: o.y_limits as [number, number] | undefined,
  };
}
