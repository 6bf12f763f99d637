// Minimal SVG chart builders (line, bar, scatter). They return markup
// strings so they stay testable without a DOM.

import type { BarSeries, ScatterPoint, XYSeries } from "./series.js";

const PALETTE = ["#2563eb", "#dc2626", "#16a34a", "#9333ea", "#ea580c", "#0891b2"];
const W = 640;
const H = 260;
const PAD = 36;

function scale(domainLo: number, domainHi: number, rangeLo: number, rangeHi: number) {
  const span = domainHi - domainLo || 1;
  return (v: number) => rangeLo + ((v - domainLo) / span) * (rangeHi - rangeLo);
}

function numericX(series: XYSeries[]): number[][] {
  return series.map((s) => s.x.map((v, i) => (typeof v === "number" ? v : i)));
}

export function lineChart(series: XYSeries[], title = ""): string {
  const xs = numericX(series);
  const allX = xs.flat();
  const allY = series.flatMap((s) => s.y.filter((v): v is number => v !== null));
  if (!allX.length || !allY.length) return emptyChart(title);
  const sx = scale(Math.min(...allX), Math.max(...allX), PAD, W - PAD);
  const sy = scale(Math.min(...allY, 0), Math.max(...allY), H - PAD, PAD);

  const paths = series.map((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    let d = "";
    let pen = "M";
    s.y.forEach((v, i) => {
      if (v === null) {
        pen = "M";
        return;
      }
      d += `${pen}${sx(xs[si][i]).toFixed(1)},${sy(v).toFixed(1)} `;
      pen = "L";
    });
    return `<path d="${d.trim()}" fill="none" stroke="${color}" stroke-width="1.5"/>`;
  });
  return svg(title, paths.join(""), legend(series.map((s) => s.label)));
}

export function barChart(bars: BarSeries, title = ""): string {
  if (!bars.values.length) return emptyChart(title);
  const maxV = Math.max(...bars.values, 1);
  const sy = scale(0, maxV, H - PAD, PAD);
  const bw = (W - 2 * PAD) / bars.values.length;
  const rects = bars.values
    .map((v, i) => {
      const x = PAD + i * bw;
      const y = sy(v);
      return (
        `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(bw * 0.85).toFixed(1)}" ` +
        `height="${(H - PAD - y).toFixed(1)}" fill="${PALETTE[0]}"></rect>` +
        `<text x="${(x + bw * 0.4).toFixed(1)}" y="${H - PAD + 14}" font-size="9" ` +
        `text-anchor="middle">${escapeText(bars.labels[i] ?? String(i))}</text>`
      );
    })
    .join("");
  return svg(title, rects, legend([bars.label]));
}

export function scatterChart(points: ScatterPoint[], title = ""): string {
  if (!points.length) return emptyChart(title);
  const sx = scale(
    Math.min(...points.map((p) => p.x)),
    Math.max(...points.map((p) => p.x)),
    PAD,
    W - PAD,
  );
  const sy = scale(
    Math.min(...points.map((p) => p.y)),
    Math.max(...points.map((p) => p.y)),
    H - PAD,
    PAD,
  );
  const dots = points
    .map(
      (p) =>
        `<circle cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="4" ` +
        `fill="${PALETTE[p.cluster % PALETTE.length]}"><title>${escapeText(p.id)}</title></circle>`,
    )
    .join("");
  return svg(title, dots, "");
}

function svg(title: string, body: string, extra: string): string {
  return (
    `<svg viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg">` +
    `<text x="${PAD}" y="16" font-size="12" font-weight="bold">${escapeText(title)}</text>` +
    `<line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" stroke="#999"/>` +
    `<line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}" stroke="#999"/>` +
    body +
    extra +
    `</svg>`
  );
}

function legend(labels: string[]): string {
  return labels
    .map(
      (label, i) =>
        `<text x="${W - PAD - 150}" y="${PAD + i * 14}" font-size="10" ` +
        `fill="${PALETTE[i % PALETTE.length]}">${escapeText(label)}</text>`,
    )
    .join("");
}

function emptyChart(title: string): string {
  return svg(title, `<text x="${W / 2}" y="${H / 2}" text-anchor="middle">no data</text>`, "");
}

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
