/** Generic SVG line chart: scales, ticks, guides and a legend. */

export interface Series {
  label: string;
  color: string;
  points: Array<[number, number]>;
  dash?: string;
  marker?: boolean;
}

export interface Guide {
  /** "h" draws a horizontal line at value, "v" a vertical one. */
  orientation: "h" | "v";
  value: number;
  color: string;
  label: string;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  guides?: Guide[];
  xLimits?: [number, number];
  yLimits?: [number, number];
  width?: number;
  height?: number;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function niceTicks(min: number, max: number, count = 6): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return Number(v.toFixed(3)).toString();
}

export function renderChart(opts: ChartOptions): string {
  const { series, guides = [] } = opts;
  if (series.length === 0) {
    throw new Error("chart has no series");
  }
  const W = opts.width ?? 720;
  const H = opts.height ?? 420;
  const ml = 64, mr = 18, mt = 34, mb = 50;
  const pw = W - ml - mr;
  const ph = H - mt - mb;

  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  guides.forEach((g) => (g.orientation === "v" ? xs : ys).push(g.value));
  const [xMin, xMax] = opts.xLimits ?? [Math.min(...xs), Math.max(...xs)];
  const [yMin, yMax] = opts.yLimits ?? pad(Math.min(...ys), Math.max(...ys));
  const xOf = (v: number) => ml + ((v - xMin) / (xMax - xMin || 1)) * pw;
  const yOf = (v: number) => mt + ph - ((v - yMin) / (yMax - yMin || 1)) * ph;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ml}" y="${mt - 12}" font-size="13" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;
  s += `<defs><clipPath id="plot"><rect x="${ml}" y="${mt}" width="${pw}" height="${ph}"/></clipPath></defs>\n`;

  const xTicks = niceTicks(xMin, xMax, 8);
  const yTicks = niceTicks(yMin, yMax, 6);
  for (const v of yTicks) {
    s += `<line x1="${ml}" y1="${yOf(v).toFixed(1)}" x2="${ml + pw}" y2="${yOf(v).toFixed(1)}" stroke="#eee"/>\n`;
  }
  for (const v of xTicks) {
    s += `<line x1="${xOf(v).toFixed(1)}" y1="${mt}" x2="${xOf(v).toFixed(1)}" y2="${mt + ph}" stroke="#f3f3f3"/>\n`;
  }

  for (const g of guides) {
    const dash = `stroke-dasharray="7,4"`;
    if (g.orientation === "h") {
      const y = yOf(g.value).toFixed(1);
      s += `<line clip-path="url(#plot)" x1="${ml}" y1="${y}" x2="${ml + pw}" y2="${y}" stroke="${g.color}" ${dash} stroke-width="1.2"/>\n`;
    } else {
      const x = xOf(g.value).toFixed(1);
      s += `<line clip-path="url(#plot)" x1="${x}" y1="${mt}" x2="${x}" y2="${mt + ph}" stroke="${g.color}" ${dash} stroke-width="1.2"/>\n`;
    }
  }

  for (const sr of series) {
    const pts = sr.points
      .map(([x, y]) => `${xOf(x).toFixed(2)},${yOf(y).toFixed(2)}`)
      .join(" ");
    const dash = sr.dash ? ` stroke-dasharray="${sr.dash}"` : "";
    s += `<polyline clip-path="url(#plot)" fill="none" stroke="${sr.color}" stroke-width="1.6"${dash} points="${pts}" data-series="${esc(sr.label)}"/>\n`;
    if (sr.marker !== false) {
      for (const [x, y] of sr.points) {
        s += `<circle clip-path="url(#plot)" cx="${xOf(x).toFixed(2)}" cy="${yOf(y).toFixed(2)}" r="2.4" fill="${sr.color}"/>\n`;
      }
    }
  }

  // axes
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333"/>\n`;
  for (const v of xTicks) {
    const x = xOf(v).toFixed(1);
    s += `<line x1="${x}" y1="${mt + ph}" x2="${x}" y2="${mt + ph + 4}" stroke="#333"/>\n`;
    s += `<text x="${x}" y="${mt + ph + 16}" text-anchor="middle" font-size="10" fill="#555">${fmtTick(v)}</text>\n`;
  }
  for (const v of yTicks) {
    const y = yOf(v).toFixed(1);
    s += `<line x1="${ml - 4}" y1="${y}" x2="${ml}" y2="${y}" stroke="#333"/>\n`;
    s += `<text x="${ml - 7}" y="${(yOf(v) + 3.5).toFixed(1)}" text-anchor="end" font-size="10" fill="#555">${fmtTick(v)}</text>\n`;
  }
  s += `<text x="${ml + pw / 2}" y="${H - 8}" text-anchor="middle" font-size="11" fill="#333">${esc(opts.xLabel)}</text>\n`;
  s += `<text x="16" y="${mt + ph / 2}" text-anchor="middle" font-size="11" fill="#333" transform="rotate(-90,16,${mt + ph / 2})">${esc(opts.yLabel)}</text>\n`;

  // legend (series then guides)
  const entries = [
    ...series.map((sr) => ({ label: sr.label, color: sr.color, dash: sr.dash })),
    ...guides.map((g) => ({ label: g.label, color: g.color, dash: "7,4" })),
  ];
  const lw = Math.max(...entries.map((e) => e.label.length)) * 5.6 + 30;
  const lx = ml + pw - lw - 6;
  let ly = mt + 8;
  s += `<rect x="${lx - 4}" y="${ly - 8}" width="${lw}" height="${entries.length * 13 + 6}" fill="#fff" fill-opacity="0.85" stroke="#ddd"/>\n`;
  for (const e of entries) {
    const dash = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
    s += `<line x1="${lx}" y1="${ly}" x2="${lx + 16}" y2="${ly}" stroke="${e.color}" stroke-width="1.6"${dash}/>\n`;
    s += `<text x="${lx + 20}" y="${ly + 3.5}" font-size="9.5" fill="#333" class="legend">${esc(e.label)}</text>\n`;
    ly += 13;
  }

  s += `</svg>\n`;
  return s;
}

function pad(min: number, max: number): [number, number] {
  const span = max - min || Math.abs(max) || 1;
  return [min - 0.04 * span, max + 0.04 * span];
}
