#!/usr/bin/env node
/** isacplot <figure_spec.json> [...more specs]
 *
 * Reads experiment CSVs named by each figure spec and writes SVG files.
 * Exits nonzero with a diagnostic on any error (missing file, missing
 * columns, empty CSV, bad spec).
 */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import path from "path";

import { parseCsv } from "./csv.js";
import { parseFigureSpec } from "./figspec.js";
import { renderFigure } from "./figures.js";

export function renderSpecFile(specPath: string): string {
  const spec = parseFigureSpec(JSON.parse(readFileSync(specPath, "utf-8")));
  const base = path.dirname(path.resolve(specPath));
  const csvPath = path.resolve(base, spec.csv);
  const rows = parseCsv(readFileSync(csvPath, "utf-8"));
  const svg = renderFigure(spec, rows);
  const outPath = path.resolve(base, spec.output);
  mkdirSync(path.dirname(outPath), { recursive: true });
  writeFileSync(outPath, svg);
  return outPath;
}

export function main(argv: string[]): number {
  if (argv.length === 0) {
    console.error("usage: isacplot <figure_spec.json> [...]");
    return 2;
  }
  for (const specPath of argv) {
    try {
      const out = renderSpecFile(specPath);
      console.log(`wrote ${out}`);
    } catch (err) {
      console.error(`error: ${specPath}: ${err instanceof Error ? err.message : err}`);
      return 1;
    }
  }
  return 0;
}

const self = process.argv[1] ?? "";
if (self.endsWith("cli.js") || self.endsWith("isacplot")) {
  process.exit(main(process.argv.slice(2)));
}
