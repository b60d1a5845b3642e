import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";
import { describe, expect, it } from "vitest";

import { parseCsv, requireColumns } from "../src/csv.js";
import { parseFigureSpec } from "../src/figspec.js";
import { FigureSpec, renderFigure } from "../src/figures.js";
import { renderSpecFile } from "../src/cli.js";

const DATA = path.join(__dirname, "..", "testdata");

function load(name: string) {
  return parseCsv(readFileSync(path.join(DATA, name), "utf-8"));
}

function spec(kind: FigureSpec["kind"], csv: string): FigureSpec {
  return { kind, csv, output: "out.svg" };
}

/** Legend labels embedded in the SVG. */
function legendLabels(svg: string): string[] {
  return [...svg.matchAll(/class="legend">([^<]*)<\/text>/g)].map((m) => m[1]);
}

function seriesCount(svg: string): number {
  return [...svg.matchAll(/data-series=/g)].length;
}

const GOLDEN: Array<[FigureSpec["kind"], string]> = [
  ["pd_vs_rcs", "rcs_sweep.csv"],
  ["pd_vs_rho", "pilot_sweep.csv"],
  ["range_profile", "range_profiles.csv"],
  ["tradeoff", "tradeoff.csv"],
  ["pd_vs_iteration", "iteration_study.csv"],
];

/** Series key columns per figure kind, mirroring the renderer. */
const KEY_COLUMNS: Record<string, string[]> = {
  pd_vs_rcs: ["scheme", "estimator"],
  pd_vs_rho: ["scheme", "estimator"],
  range_profile: ["scheme", "estimator"],
  tradeoff: ["scheme", "estimator", "constellation"],
  pd_vs_iteration: ["scheme", "estimator", "iteration"],
};

describe("figure rendering from golden CSVs", () => {
  it.each(GOLDEN)("%s renders an SVG", (kind, csv) => {
    const svg = renderFigure(spec(kind, csv), load(csv));
    expect(svg).toContain("<svg");
    expect(svg).toContain("</svg>");
    expect(seriesCount(svg)).toBeGreaterThan(0);
  });

  it.each(GOLDEN)("%s embeds every series present in the CSV", (kind, csv) => {
    const rows = load(csv);
    const keys = KEY_COLUMNS[kind];
    const expected = new Set(rows.map((r) => keys.map((k) => r[k]).join("|")));
    const svg = renderFigure(spec(kind, csv), rows);
    expect(seriesCount(svg)).toBe(expected.size);
  });

  it("embeds one series per (scheme, estimator) in sweep figures", () => {
    const rows = load("rcs_sweep.csv");
    const expected = new Set(rows.map((r) => `${r.scheme}|${r.estimator}`));
    const svg = renderFigure(spec("pd_vs_rcs", "x"), rows);
    expect(seriesCount(svg)).toBe(expected.size);
    const labels = legendLabels(svg);
    expect(labels).toContain("pilot_only");
    expect(labels).toContain("genie");
    expect(labels).toContain("data_aided (LMMSE)");
    expect(labels).toContain("data_aided (MF)");
    expect(labels).toContain("data_aided (RF)");
  });

  it("embeds one series per (scheme, estimator) in the profile figure", () => {
    const rows = load("range_profiles.csv");
    const expected = new Set(rows.map((r) => `${r.scheme}|${r.estimator}`));
    const svg = renderFigure(spec("range_profile", "x"), rows);
    expect(seriesCount(svg)).toBe(expected.size);
  });

  it("splits trade-off series by constellation and draws the boundary", () => {
    const rows = load("tradeoff.csv");
    const expected = new Set(
      rows.map((r) => `${r.scheme}|${r.estimator}|${r.constellation}`),
    );
    const svg = renderFigure(spec("tradeoff", "x"), rows);
    expect(seriesCount(svg)).toBe(expected.size);
    const labels = legendLabels(svg);
    expect(labels).toContain("genie Pd bound");
    expect(labels).toContain("max rate");
    // one horizontal and one vertical dashed guide
    expect([...svg.matchAll(/stroke-dasharray="7,4"/g)].length).toBeGreaterThanOrEqual(2);
  });

  it("splits iteration series by sensing pass", () => {
    const rows = load("iteration_study.csv");
    const expected = new Set(
      rows.map((r) => `${r.scheme}|${r.estimator}|${r.iteration}`),
    );
    const svg = renderFigure(spec("pd_vs_iteration", "x"), rows);
    expect(seriesCount(svg)).toBe(expected.size);
    expect(legendLabels(svg).some((l) => l.includes("iteration=1"))).toBe(true);
  });

  it("normalizes profiles to a 0 dB peak and floors at -60 dB", () => {
    const rows = load("range_profiles.csv");
    const values = rows.map((r) => Number(r.value_db));
    expect(Math.max(...values)).toBe(0);
    const svg = renderFigure(spec("range_profile", "x"), rows);
    // y-axis covers the floor
    expect(svg).toContain(">-60<");
  });

  it("is a pure function of the CSV content", () => {
    const rows = load("pilot_sweep.csv");
    const a = renderFigure(spec("pd_vs_rho", "x"), rows);
    const b = renderFigure(spec("pd_vs_rho", "x"), rows);
    expect(a).toBe(b);
  });
});

describe("error handling", () => {
  it("rejects an empty CSV", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
    expect(() => parseCsv("sweep_value,pd\n")).toThrow(/no data rows/);
  });

  it("rejects missing columns", () => {
    const rows = parseCsv("a,b\n1,2\n");
    expect(() => requireColumns(rows, ["pd"])).toThrow(/missing required columns: pd/);
    expect(() => renderFigure(spec("pd_vs_rcs", "x"), rows)).toThrow(/missing/);
  });

  it("rejects unknown figure kinds and bad specs", () => {
    expect(() => parseFigureSpec({ kind: "pie", csv: "a", output: "b" })).toThrow(/unknown figure kind/);
    expect(() => parseFigureSpec({ kind: "pd_vs_rcs", output: "b" })).toThrow(/csv/);
    expect(() => parseFigureSpec({ kind: "pd_vs_rcs", csv: "a" })).toThrow(/output/);
    expect(() =>
      parseFigureSpec({ kind: "pd_vs_rcs", csv: "a", output: "b", x_limits: [1] }),
    ).toThrow(/x_limits/);
  });

  it("rejects malformed rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/row 2/);
  });
});

describe("cli", () => {
  it("renders a spec file end to end", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "isacplot-"));
    const csv = path.join(DATA, "rcs_sweep.csv");
    const specPath = path.join(dir, "fig.json");
    writeFileSync(
      specPath,
      JSON.stringify({
        kind: "pd_vs_rcs",
        csv,
        output: "figures/out.svg",
        title: "test",
      }),
    );
    const out = renderSpecFile(specPath);
    const svg = readFileSync(out, "utf-8");
    expect(out.endsWith(path.join("figures", "out.svg"))).toBe(true);
    expect(svg).toContain("</svg>");
  });
});
