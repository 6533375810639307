/**
 * Log-scale performance-error chart rendered as standalone SVG.
 *
 * One curve per trace file, y = max_i |u_i(t) - unom_i(t)| on a log10
 * axis floored at 1e-12 (zero rows clip to the floor), legend entries
 * carry the file label and its time-averaged error.
 */

import { TraceFile } from "./trace.js";

export const PLOT_FLOOR = 1e-12;

const WIDTH = 860;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 24, top: 20, bottom: 44 };

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

export function timeAverage(errs: number[]): number {
  return errs.reduce((a, b) => a + b, 0) / errs.length;
}

function niceExpRange(lo: number, hi: number): [number, number] {
  return [Math.floor(Math.log10(lo)), Math.ceil(Math.log10(hi))];
}

export function renderErrorSvg(traces: TraceFile[]): string {
  if (traces.length === 0) {
    throw new Error("no traces to plot");
  }
  const clipped = traces.map((tr) => tr.errInf.map((e) => Math.max(e, PLOT_FLOOR)));
  const tMax = Math.max(...traces.map((tr) => tr.t[tr.t.length - 1]));
  const yLo = Math.min(...clipped.map((c) => Math.min(...c)));
  const yHi = Math.max(...clipped.map((c) => Math.max(...c)));
  const [eLo, eHi] = niceExpRange(yLo, Math.max(yHi, yLo * 10));

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const x = (t: number) => MARGIN.left + (t / Math.max(tMax, 1)) * plotW;
  const y = (v: number) =>
    MARGIN.top + plotH - ((Math.log10(v) - eLo) / (eHi - eLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // Decade gridlines and y tick labels.
  for (let e = eLo; e <= eHi; e++) {
    const yy = y(10 ** e);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${yy.toFixed(2)}" x2="${WIDTH - MARGIN.right}" ` +
        `y2="${yy.toFixed(2)}" stroke="#dddddd"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(yy + 4).toFixed(2)}" text-anchor="end">1e${e}</text>`
    );
  }
  // x ticks at fifths.
  for (let k = 0; k <= 5; k++) {
    const tt = (tMax * k) / 5;
    parts.push(
      `<text x="${x(tt).toFixed(2)}" y="${HEIGHT - MARGIN.bottom + 18}" ` +
        `text-anchor="middle">${Math.round(tt)}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 8}" text-anchor="middle">time step</text>`
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">max |u - u_nom|</text>`
  );

  traces.forEach((tr, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = tr.t
      .map((tt, i) => `${x(tt).toFixed(2)},${y(clipped[idx][i]).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline id="curve-${tr.label}" points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>`
    );
    const avg = timeAverage(tr.errInf);
    parts.push(
      `<text x="${WIDTH - MARGIN.right - 8}" y="${MARGIN.top + 18 + 16 * idx}" ` +
        `text-anchor="end" fill="${color}">${tr.label} (avg ${avg.toExponential(3)})</text>`
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}
