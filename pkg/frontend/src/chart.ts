/**
 * Self-contained SVG renderer for convergence curves: iteration count on a
 * linear x-axis, metric values on a log (default) or linear y-axis, one
 * line per solver.  No DOM or canvas dependency; the output is a pure
 * function of the input series and the style constants below.
 */

import type { TraceSeries } from "./trace.js";

export const LOG_FLOOR = 1e-16; // non-positive values clamp here for log plots

const W = 720;
const H = 420;
const MARGIN = { left: 70, right: 24, top: 36, bottom: 52 };
const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f3722c",
  "#7209b7", "#0096c7", "#b5838d", "#495057",
];

export interface ChartOptions {
  metric: string;
  logY: boolean;
  title?: string;
}

interface PreparedSeries extends TraceSeries {
  plotted: number[];
  clamped: boolean;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceLinearTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.01; v += step) {
    ticks.push(v);
  }
  return ticks;
}

function fmtPow10(exp: number): string {
  return `1e${exp}`;
}

export function renderChart(series: TraceSeries[], opts: ChartOptions): string {
  const prepared: PreparedSeries[] = series.map((s) => {
    const clamped = opts.logY && s.values.some((v) => v < LOG_FLOOR);
    const plotted = opts.logY ? s.values.map((v) => Math.max(v, LOG_FLOOR)) : s.values;
    return { ...s, plotted, clamped };
  });

  const xs = prepared.flatMap((s) => s.iterations);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const pw = W - MARGIN.left - MARGIN.right;
  const ph = H - MARGIN.top - MARGIN.bottom;
  const xOf = (v: number) => MARGIN.left + ((v - xMin) / (xMax - xMin || 1)) * pw;

  const ys = prepared.flatMap((s) => s.plotted);
  let yOf: (v: number) => number;
  let yTicks: { v: number; label: string }[];
  if (opts.logY) {
    const loExp = Math.floor(Math.log10(Math.min(...ys)));
    const hiExp = Math.ceil(Math.log10(Math.max(...ys)));
    const span = Math.max(hiExp - loExp, 1);
    yOf = (v) => MARGIN.top + ph - ((Math.log10(v) - loExp) / span) * ph;
    const every = Math.max(1, Math.ceil(span / 8));
    yTicks = [];
    for (let e = loExp; e <= hiExp; e += every) {
      yTicks.push({ v: Math.pow(10, e), label: fmtPow10(e) });
    }
  } else {
    const lo = Math.min(...ys);
    const hi = Math.max(...ys);
    yOf = (v) => MARGIN.top + ph - ((v - lo) / (hi - lo || 1)) * ph;
    yTicks = niceLinearTicks(lo, hi, 6).map((v) => ({ v, label: String(v) }));
  }

  let svg = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  svg += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  const title = opts.title ?? `${opts.metric} vs iteration`;
  svg += `<text x="${MARGIN.left}" y="${MARGIN.top - 14}" font-size="13" font-weight="600" fill="#222">${esc(title)}</text>\n`;

  // grid + y ticks
  for (const t of yTicks) {
    const y = yOf(t.v);
    svg += `<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${MARGIN.left + pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.6"/>\n`;
    svg += `<text x="${MARGIN.left - 6}" y="${(y + 3).toFixed(1)}" text-anchor="end" font-size="9" fill="#555">${esc(t.label)}</text>\n`;
  }
  // x ticks
  for (const v of niceLinearTicks(xMin, xMax, 8)) {
    const x = xOf(v);
    svg += `<line x1="${x.toFixed(1)}" y1="${MARGIN.top + ph}" x2="${x.toFixed(1)}" y2="${MARGIN.top + ph + 4}" stroke="#333" stroke-width="0.6"/>\n`;
    svg += `<text x="${x.toFixed(1)}" y="${MARGIN.top + ph + 16}" text-anchor="middle" font-size="9" fill="#555">${v}</text>\n`;
  }

  // axes
  svg += `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  svg += `<line x1="${MARGIN.left}" y1="${MARGIN.top + ph}" x2="${MARGIN.left + pw}" y2="${MARGIN.top + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  svg += `<text x="${MARGIN.left + pw / 2}" y="${H - 10}" text-anchor="middle" font-size="11" fill="#333">iteration</text>\n`;
  const yLabel = opts.logY ? `${opts.metric} (log scale)` : opts.metric;
  svg += `<text x="16" y="${MARGIN.top + ph / 2}" text-anchor="middle" font-size="11" fill="#333" transform="rotate(-90,16,${MARGIN.top + ph / 2})">${esc(yLabel)}</text>\n`;

  // series
  prepared.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    if (s.plotted.length === 1) {
      svg += `<circle cx="${xOf(s.iterations[0]).toFixed(1)}" cy="${yOf(s.plotted[0]).toFixed(1)}" r="3.5" fill="${color}"/>\n`;
      return;
    }
    const pts = s.iterations
      .map((it, k) => `${xOf(it).toFixed(1)},${yOf(s.plotted[k]).toFixed(1)}`)
      .join(" ");
    svg += `<polyline fill="none" stroke="${color}" stroke-width="1.4" points="${pts}"/>\n`;
  });

  // legend
  const legendX = MARGIN.left + pw - 210;
  const legendY = MARGIN.top + 8;
  svg += `<rect x="${legendX - 8}" y="${legendY - 12}" width="214" height="${prepared.length * 15 + 8}" rx="3" fill="#fff" fill-opacity="0.88" stroke="#ddd" stroke-width="0.5"/>\n`;
  prepared.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = legendY + i * 15;
    const note = s.clamped ? ` (clamped at ${LOG_FLOOR})` : "";
    svg += `<line x1="${legendX}" y1="${y}" x2="${legendX + 18}" y2="${y}" stroke="${color}" stroke-width="1.6"/>\n`;
    svg += `<text x="${legendX + 24}" y="${y + 3}" font-size="9.5" fill="#333">${esc(s.label + note)}</text>\n`;
  });

  svg += `</svg>\n`;
  return svg;
}
