/**
 * Minimal deterministic SVG assembly for log-log curve plots: scales, decade
 * ticks, polylines, filled bands, legends.  No DOM, no randomness, no
 * timestamps, so identical inputs yield identical bytes.
 */

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export const PALETTE = ["#c23b3b", "#2c62b0", "#e08f2d", "#3d8f5f", "#7b4fa6", "#5b5b5b"];

const fmt = (v: number): string => {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

export function logX(frame: Frame, x: number): number {
  const f = (Math.log10(x) - Math.log10(frame.xMin)) / (Math.log10(frame.xMax) - Math.log10(frame.xMin));
  return frame.left + f * (frame.width - frame.left - frame.right);
}

export function logY(frame: Frame, y: number): number {
  const f = (Math.log10(y) - Math.log10(frame.yMin)) / (Math.log10(frame.yMax) - Math.log10(frame.yMin));
  return frame.height - frame.bottom - f * (frame.height - frame.top - frame.bottom);
}

/** Positive finite range of the data, padded by one minor decade step. */
export function positiveRange(values: Iterable<number>): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v) && v > 0) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!(lo < hi)) {
    if (Number.isFinite(lo) && lo > 0) return [lo / 2, lo * 2];
    throw new Error("no positive finite values to scale");
  }
  return [lo / 1.3, hi * 1.3];
}

export function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e += 1) {
    ticks.push(10 ** e);
  }
  return ticks;
}

/** Polyline through positive points; nonpositive values split the path. */
export function curvePath(frame: Frame, xs: ArrayLike<number>, ys: ArrayLike<number>): string {
  const parts: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i += 1) {
    const x = xs[i];
    const y = ys[i];
    if (!(x > 0 && y > 0 && Number.isFinite(y))) {
      pen = false;
      continue;
    }
    parts.push(`${pen ? "L" : "M"}${fmt(logX(frame, x))},${fmt(logY(frame, y))}`);
    pen = true;
  }
  return parts.join(" ");
}

/** Closed region between a lower and an upper curve (clamped to the frame floor). */
export function bandPath(frame: Frame, xs: ArrayLike<number>, lo: ArrayLike<number>,
                         hi: ArrayLike<number>): string {
  const up: string[] = [];
  const down: string[] = [];
  for (let i = 0; i < xs.length; i += 1) {
    if (!(xs[i] > 0) || !Number.isFinite(hi[i]) || hi[i] <= 0) continue;
    const yLo = Math.max(lo[i], frame.yMin);
    up.push(`${fmt(logX(frame, xs[i]))},${fmt(logY(frame, hi[i]))}`);
    down.push(`${fmt(logX(frame, xs[i]))},${fmt(logY(frame, Math.max(yLo, frame.yMin)))}`);
  }
  if (up.length === 0) return "";
  return `M${up.join(" L")} L${down.reverse().join(" L")} Z`;
}

export interface LegendEntry {
  label: string;
  color: string;
  dashed?: boolean;
  filled?: boolean;
}

export function renderFrame(frame: Frame, title: string, caption: string,
                            body: string[], legend: LegendEntry[],
                            xLabel = "t", yLabel = "SFF"): string {
  const out: string[] = [];
  out.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">`);
  out.push(`<rect width="${frame.width}" height="${frame.height}" fill="#ffffff"/>`);
  out.push(`<text x="${frame.left}" y="18" font-family="sans-serif" font-size="13" font-weight="bold">${escapeXml(title)}</text>`);
  const plotBottom = frame.height - frame.bottom;
  out.push(`<rect x="${frame.left}" y="${frame.top}" width="${frame.width - frame.left - frame.right}" height="${plotBottom - frame.top}" fill="none" stroke="#444444"/>`);
  for (const tick of decadeTicks(frame.xMin, frame.xMax)) {
    const x = fmt(logX(frame, tick));
    out.push(`<line x1="${x}" y1="${frame.top}" x2="${x}" y2="${plotBottom}" stroke="#dddddd"/>`);
    out.push(`<text x="${x}" y="${plotBottom + 14}" font-family="sans-serif" font-size="10" text-anchor="middle">1e${Math.round(Math.log10(tick))}</text>`);
  }
  for (const tick of decadeTicks(frame.yMin, frame.yMax)) {
    const y = fmt(logY(frame, tick));
    out.push(`<line x1="${frame.left}" y1="${y}" x2="${frame.width - frame.right}" y2="${y}" stroke="#dddddd"/>`);
    out.push(`<text x="${frame.left - 4}" y="${y}" font-family="sans-serif" font-size="10" text-anchor="end" dominant-baseline="middle">1e${Math.round(Math.log10(tick))}</text>`);
  }
  out.push(...body);
  out.push(`<text x="${(frame.left + frame.width - frame.right) / 2}" y="${frame.height - 6}" font-family="sans-serif" font-size="11" text-anchor="middle">${escapeXml(xLabel)}</text>`);
  out.push(`<text x="14" y="${(frame.top + plotBottom) / 2}" font-family="sans-serif" font-size="11" text-anchor="middle" transform="rotate(-90 14 ${(frame.top + plotBottom) / 2})">${escapeXml(yLabel)}</text>`);
  legend.forEach((entry, i) => {
    const y = frame.top + 14 + 16 * i;
    const x = frame.width - frame.right - 170;
    if (entry.filled) {
      out.push(`<rect x="${x}" y="${y - 8}" width="22" height="9" fill="${entry.color}" fill-opacity="0.35"/>`);
    } else {
      out.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${entry.color}" stroke-width="1.8"${entry.dashed ? ' stroke-dasharray="4 3"' : ""}/>`);
    }
    out.push(`<text x="${x + 27}" y="${y}" font-family="sans-serif" font-size="10">${escapeXml(entry.label)}</text>`);
  });
  // caption carries the data provenance (paths and columns) for every curve
  out.push(`<text x="${frame.left}" y="${frame.height - 22}" font-family="sans-serif" font-size="9" fill="#666666">${escapeXml(caption)}</text>`);
  out.push("</svg>");
  return out.join("\n") + "\n";
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function verticalMarker(frame: Frame, x: number, label: string): string {
  if (!(x > frame.xMin && x < frame.xMax)) return "";
  const px = fmt(logX(frame, x));
  return `<line x1="${px}" y1="${frame.top}" x2="${px}" y2="${frame.height - frame.bottom}" stroke="#999999" stroke-dasharray="2 4"/>` +
    `<text x="${px}" y="${frame.top + 10}" font-family="sans-serif" font-size="9" text-anchor="middle" fill="#666666">${escapeXml(label)}</text>`;
}
