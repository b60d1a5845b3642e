/** Minimal CSV reader for the simulator's result files. */

export type CsvRow = Record<string, string>;

export function parseCsv(text: string): CsvRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`row ${i + 2}: expected ${header.length} cells, got ${cells.length}`);
    }
    const row: CsvRow = {};
    header.forEach((name, j) => (row[name] = cells[j]));
    return row;
  });
  if (rows.length === 0) {
    throw new Error("CSV has a header but no data rows");
  }
  return rows;
}

export function requireColumns(rows: CsvRow[], columns: string[]): void {
  const have = new Set(Object.keys(rows[0]));
  const missing = columns.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new Error(`CSV is missing required columns: ${missing.join(", ")}`);
  }
}

export function num(row: CsvRow, column: string): number {
  const v = Number(row[column]);
  if (!Number.isFinite(v)) {
    throw new Error(`column ${column}: not a number (${JSON.stringify(row[column])})`);
  }
  return v;
}
