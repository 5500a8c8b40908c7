/** Minimal deterministic SVG line charts: no rendering backend, just text.
 * Figures carry their data as-is; only pixel placement is computed here. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
  /** Draw markers at the data points (used for CDF steps). */
  markers?: boolean;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 42, right: 24, bottom: 48, left: 64 };

function extent(arrays: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of arrays) {
    for (const v of arr) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    throw new Error("cannot scale an empty or non-finite series");
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const start = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += s) out.push(v);
  return out;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function lineChart(series: Series[], opts: ChartOptions): string {
  const W = opts.width ?? 720;
  const H = opts.height ?? 440;
  const iw = W - MARGIN.left - MARGIN.right;
  const ih = H - MARGIN.top - MARGIN.bottom;
  for (const s of series) {
    if (s.x.length !== s.y.length) throw new Error(`series "${s.label}" has mismatched x/y`);
    if (s.x.length === 0) throw new Error(`series "${s.label}" is empty`);
  }
  const [x0, x1] = extent(series.map((s) => s.x));
  const [y0, y1] = extent(series.map((s) => s.y));
  const px = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0)) * iw;
  const py = (v: number) => MARGIN.top + ih - ((v - y0) / (y1 - y0)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(
    `<text x="${W / 2}" y="20" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`,
  );

  // axes and grid
  for (const t of ticks(x0, x1)) {
    const x = px(t);
    parts.push(`<line x1="${x.toFixed(1)}" y1="${MARGIN.top}" x2="${x.toFixed(1)}" y2="${MARGIN.top + ih}" stroke="#ddd"/>`);
    parts.push(`<text x="${x.toFixed(1)}" y="${MARGIN.top + ih + 16}" text-anchor="middle">${fmtTick(t)}</text>`);
  }
  for (const t of ticks(y0, y1)) {
    const y = py(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${MARGIN.left + iw}" y2="${y.toFixed(1)}" stroke="#ddd"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${(y + 4).toFixed(1)}" text-anchor="end">${fmtTick(t)}</text>`);
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" fill="none" stroke="#333"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + iw / 2}" y="${H - 10}" text-anchor="middle">${esc(opts.xLabel)}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + ih / 2}" text-anchor="middle" transform="rotate(-90 16 ${MARGIN.top + ih / 2})">${esc(opts.yLabel)}</text>`,
  );

  // data
  series.forEach((s, k) => {
    const color = PALETTE[k % PALETTE.length];
    const pts = s.x.map((v, i) => `${px(v).toFixed(2)},${py(s.y[i]).toFixed(2)}`).join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    if (opts.markers) {
      for (let i = 0; i < s.x.length; i++) {
        parts.push(
          `<circle cx="${px(s.x[i]).toFixed(2)}" cy="${py(s.y[i]).toFixed(2)}" r="1.6" fill="${color}"/>`,
        );
      }
    }
    const ly = MARGIN.top + 14 + 16 * k;
    parts.push(`<line x1="${MARGIN.left + iw - 120}" y1="${ly - 4}" x2="${MARGIN.left + iw - 96}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${MARGIN.left + iw - 90}" y="${ly}">${esc(s.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
