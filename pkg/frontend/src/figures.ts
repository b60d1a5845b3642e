/** The five figure kinds: CSV rows in, chart options out.
 *
 * Rendering never recomputes simulation quantities; it only reshapes
 * what the CSVs carry.  Colors and dashes are fixed per scheme and
 * estimator so the same receiver looks the same across figures.
 */

import { CsvRow, num, requireColumns } from "./csv.js";
import { ChartOptions, Guide, Series, renderChart } from "./chart.js";

export const FIGURE_KINDS = [
  "pd_vs_rcs",
  "pd_vs_rho",
  "range_profile",
  "tradeoff",
  "pd_vs_iteration",
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  csv: string;
  output: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  xLimits?: [number, number];
  yLimits?: [number, number];
}

const SCHEME_COLOR: Record<string, string> = {
  pilot_only: "#d62728",
  data_aided: "#1f77b4",
  genie: "#2ca02c",
};
const ESTIMATOR_DASH: Record<string, string | undefined> = {
  none: undefined,
  LMMSE: undefined,
  MF: "6,3",
  RF: "2,3",
};
const FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"];
const PROFILE_FLOOR_DB = -60;

function seriesLabel(scheme: string, estimator: string): string {
  return estimator === "none" ? scheme : `${scheme} (${estimator})`;
}

function seriesStyle(scheme: string, estimator: string, index: number) {
  return {
    color: SCHEME_COLOR[scheme] ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length],
    dash: ESTIMATOR_DASH[estimator],
  };
}

/** Stable unique (scheme, estimator[, extra]) keys in row order. */
function seriesKeys(rows: CsvRow[], extra?: string): string[][] {
  const seen = new Set<string>();
  const keys: string[][] = [];
  for (const r of rows) {
    const key = [r.scheme, r.estimator, ...(extra ? [r[extra]] : [])];
    const tag = key.join("|");
    if (!seen.has(tag)) {
      seen.add(tag);
      keys.push(key);
    }
  }
  return keys;
}

function sweepSeries(rows: CsvRow[], yColumn: string, extra?: string): Series[] {
  return seriesKeys(rows, extra).map((key, i) => {
    const [scheme, estimator, extraValue] = key;
    const mine = rows.filter(
      (r) =>
        r.scheme === scheme &&
        r.estimator === estimator &&
        (extra === undefined || r[extra] === extraValue),
    );
    const points = mine
      .map((r) => [num(r, "sweep_value"), num(r, yColumn)] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    const style = seriesStyle(scheme, estimator, i);
    const label =
      seriesLabel(scheme, estimator) + (extra && extraValue !== "" ? ` [${extra}=${extraValue}]` : "");
    return { label, points, ...style };
  });
}

function pdVsSweep(rows: CsvRow[], spec: FigureSpec, xLabel: string): ChartOptions {
  requireColumns(rows, ["sweep_value", "scheme", "estimator", "pd"]);
  return {
    title: spec.title ?? "Detection probability",
    xLabel: spec.xLabel ?? xLabel,
    yLabel: spec.yLabel ?? "Probability of detection",
    series: sweepSeries(rows, "pd"),
    yLimits: spec.yLimits ?? [0, 1.05],
    xLimits: spec.xLimits,
  };
}

function pdVsIteration(rows: CsvRow[], spec: FigureSpec): ChartOptions {
  requireColumns(rows, ["sweep_value", "scheme", "estimator", "iteration", "pd"]);
  return {
    title: spec.title ?? "Detection probability per sensing pass",
    xLabel: spec.xLabel ?? "Target RCS (dBsm)",
    yLabel: spec.yLabel ?? "Probability of detection",
    series: sweepSeries(rows, "pd", "iteration").map((s, i) => ({
      ...s,
      // distinguish passes by dash within the scheme color
      dash: i % 3 === 1 ? "6,3" : i % 3 === 2 ? "2,3" : undefined,
    })),
    yLimits: spec.yLimits ?? [0, 1.05],
    xLimits: spec.xLimits,
  };
}

function rangeProfile(rows: CsvRow[], spec: FigureSpec): ChartOptions {
  requireColumns(rows, ["scheme", "estimator", "differential_range_m", "value_db"]);
  const series = seriesKeys(rows).map((key, i) => {
    const [scheme, estimator] = key;
    const mine = rows.filter((r) => r.scheme === scheme && r.estimator === estimator);
    const points = mine
      .map(
        (r) =>
          [num(r, "differential_range_m"), Math.max(num(r, "value_db"), PROFILE_FLOOR_DB)] as [
            number,
            number,
          ],
      )
      .sort((a, b) => a[0] - b[0]);
    return {
      label: seriesLabel(scheme, estimator),
      points,
      marker: false,
      ...seriesStyle(scheme, estimator, i),
    };
  });
  return {
    title: spec.title ?? "Range profiles",
    xLabel: spec.xLabel ?? "Differential range (m)",
    yLabel: spec.yLabel ?? "Normalized level (dB)",
    series,
    yLimits: spec.yLimits ?? [PROFILE_FLOOR_DB, 2],
    xLimits: spec.xLimits ?? [-40, 150],
  };
}

function tradeoff(rows: CsvRow[], spec: FigureSpec): ChartOptions {
  requireColumns(rows, ["scheme", "estimator", "constellation", "pd", "rate"]);
  const series = seriesKeys(rows, "constellation").map((key, i) => {
    const [scheme, estimator, constellation] = key;
    const mine = rows.filter(
      (r) =>
        r.scheme === scheme &&
        r.estimator === estimator &&
        r.constellation === constellation,
    );
    const points = mine
      .map((r) => [num(r, "rate"), num(r, "pd")] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    const style = seriesStyle(scheme, estimator, i);
    return {
      label: `${seriesLabel(scheme, estimator)} ${constellation}`,
      points,
      color: style.color,
      dash: constellation === "QPSK" ? style.dash : "8,3",
    };
  });
  // trade-off region boundary: best genie detection and maximum rate
  const genie = rows.filter((r) => r.scheme === "genie");
  const guides: Guide[] = [];
  if (genie.length > 0) {
    guides.push({
      orientation: "h",
      value: Math.max(...genie.map((r) => num(r, "pd"))),
      color: "#444",
      label: "genie Pd bound",
    });
  }
  guides.push({
    orientation: "v",
    value: Math.max(...rows.map((r) => num(r, "rate"))),
    color: "#888",
    label: "max rate",
  });
  return {
    title: spec.title ?? "Detection / rate trade-off",
    xLabel: spec.xLabel ?? "Achievable rate (bits/symbol use)",
    yLabel: spec.yLabel ?? "Probability of detection",
    series,
    guides,
    yLimits: spec.yLimits ?? [0, 1.05],
    xLimits: spec.xLimits,
  };
}

export function buildChart(kind: FigureKind, rows: CsvRow[], spec: FigureSpec): ChartOptions {
  switch (kind) {
    case "pd_vs_rcs":
      return pdVsSweep(rows, spec, "Target RCS (dBsm)");
    case "pd_vs_rho":
      return pdVsSweep(rows, spec, "Pilot percentage (%)");
    case "range_profile":
      return rangeProfile(rows, spec);
    case "tradeoff":
      return tradeoff(rows, spec);
    case "pd_vs_iteration":
      return pdVsIteration(rows, spec);
  }
}

export function renderFigure(spec: FigureSpec, rows: CsvRow[]): string {
  return renderChart(buildChart(spec.kind, rows, spec));
}
