/** Hand-rolled SVG line/step charts; no DOM, plain string assembly. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  /** "line" joins points directly; "step" draws a right-continuous staircase. */
  kind?: "line" | "step";
}

export interface AxesOptions {
  width?: number;
  height?: number;
  xLabel: string;
  yLabel: string;
  title?: string;
  logX?: boolean;
  logY?: boolean;
  /** Vertical reference line at this x value (e.g. a budget threshold). */
  xMarker?: number;
  xMarkerLabel?: string;
}

const PALETTE = ["#1f6fb2", "#d1495b", "#3a7d44", "#8454a3", "#c77d1e", "#3c3c3c"];
const MARGIN = { top: 34, right: 20, bottom: 46, left: 62 };

interface Scale {
  (v: number): number;
  ticks: number[];
}

function makeScale(values: number[], log: boolean, outLo: number, outHi: number): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (log) {
    const positive = values.filter((v) => v > 0);
    lo = Math.min(...positive);
    hi = Math.max(...positive);
  }
  if (!(hi > lo)) {
    hi = lo + (Math.abs(lo) || 1) * 0.1;
    lo = lo - (Math.abs(lo) || 1) * 0.1;
  }
  const t = (v: number) => (log ? Math.log10(v) : v);
  const tLo = t(lo);
  const tHi = t(hi);
  const pad = 0.04 * (tHi - tLo);
  const a = tLo - pad;
  const b = tHi + pad;
  const scale = ((v: number) => outLo + ((t(v) - a) / (b - a)) * (outHi - outLo)) as Scale;
  scale.ticks = log ? logTicks(lo, hi) : linearTicks(lo, hi);
  return scale;
}

function linearTicks(lo: number, hi: number): number[] {
  const span = hi - lo;
  const raw = span / 5;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= 6) ?? mag * 10;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * Math.abs(step); v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const v = Math.pow(10, e);
    if (v >= lo / 1.0001 && v <= hi * 1.0001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e4 || abs < 1e-3) return v.toExponential(0);
  return Number(v.toPrecision(4)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Renders one axes block; returns inner SVG markup (no outer <svg>). */
export function axesGroup(series: Series[], opts: AxesOptions,
                          width: number, height: number, yOffset: number): string {
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const xs = series.flatMap((s) => s.x).concat(opts.xMarker !== undefined ? [opts.xMarker] : []);
  const ys = series.flatMap((s) => s.y);
  const sx = makeScale(xs, !!opts.logX, MARGIN.left, MARGIN.left + plotW);
  const sy = makeScale(ys, !!opts.logY, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [`<g transform="translate(0,${yOffset})">`];
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#888"/>`);
  if (opts.title) {
    parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${MARGIN.top - 14}" text-anchor="middle" font-size="13" font-family="sans-serif">${esc(opts.title)}</text>`);
  }
  for (const tv of sx.ticks) {
    const x = sx(tv);
    parts.push(`<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#ddd"/>`);
    parts.push(`<text x="${x}" y="${MARGIN.top + plotH + 16}" text-anchor="middle" font-size="10" font-family="sans-serif">${fmt(tv)}</text>`);
  }
  for (const tv of sy.ticks) {
    const y = sy(tv);
    parts.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#ddd"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${y + 3}" text-anchor="end" font-size="10" font-family="sans-serif">${fmt(tv)}</text>`);
  }
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-size="12" font-family="sans-serif">${esc(opts.xLabel)}</text>`);
  parts.push(`<text transform="translate(16,${MARGIN.top + plotH / 2}) rotate(-90)" text-anchor="middle" font-size="12" font-family="sans-serif">${esc(opts.yLabel)}</text>`);

  if (opts.xMarker !== undefined) {
    const x = sx(opts.xMarker);
    parts.push(`<line class="x-marker" x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#b22" stroke-dasharray="5,3" stroke-width="1.5"/>`);
    if (opts.xMarkerLabel) {
      parts.push(`<text x="${x + 4}" y="${MARGIN.top + 12}" font-size="10" fill="#b22" font-family="sans-serif">${esc(opts.xMarkerLabel)}</text>`);
    }
  }

  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = s.x.map((xv, i) => [sx(xv), sy(s.y[i])] as const);
    let d = "";
    if (s.kind === "step") {
      pts.forEach(([x, y], i) => {
        if (i === 0) d += `M${x.toFixed(2)},${y.toFixed(2)}`;
        else d += `H${x.toFixed(2)}V${y.toFixed(2)}`;
      });
    } else {
      pts.forEach(([x, y], i) => {
        d += `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`;
      });
    }
    parts.push(`<path class="series" data-label="${esc(s.label)}" d="${d}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    for (const [x, y] of pts) {
      parts.push(`<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="2.4" fill="${color}"/>`);
    }
    const lx = MARGIN.left + plotW - 8;
    const ly = MARGIN.top + 14 + idx * 15;
    parts.push(`<line x1="${lx - 116}" y1="${ly - 4}" x2="${lx - 96}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text class="legend" x="${lx - 92}" y="${ly}" font-size="10" font-family="sans-serif">${esc(s.label)}</text>`);
  });
  parts.push("</g>");
  return parts.join("\n");
}

/** One or more stacked axes panels in a single SVG document. */
export function renderSvg(panels: { series: Series[]; opts: AxesOptions }[],
                          width = 560, panelHeight = 360): string {
  const height = panelHeight * panels.length;
  const body = panels
    .map((p, i) => axesGroup(p.series, p.opts, width, panelHeight, i * panelHeight))
    .join("\n");
  return `<?xml version="1.0" encoding="UTF-8"?>\n` +
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`;
}
