/**
 * The three figure types rebuilt from simulation CSVs: the
 * slope-dip-ramp-plateau overview of a single run, empirical-versus-predicted
 * comparisons, and sample-size strip studies.  Rendering is read-only over
 * the inputs and fully deterministic; every curve's provenance (file and
 * column) is embedded in the caption text.
 */

import { CsvTable, configSize, readCsv, requireColumn } from "./csv.js";
import {
  Frame,
  LegendEntry,
  PALETTE,
  bandPath,
  curvePath,
  positiveRange,
  renderFrame,
  verticalMarker,
} from "./svg.js";

export interface RenderResult {
  svg: string;
  warnings: string[];
}

export interface SffFigureSpec {
  csv: string;
  title?: string;
}

export interface CompareFigureSpec {
  empirical: string;
  prediction: string;
  /** pairs of (empirical column, prediction column); defaults by file kind */
  pairs?: [string, string][];
  title?: string;
}

export interface StripFigureSpec {
  csv: string;
  title?: string;
}

function makeFrame(xs: number[], ys: number[]): Frame {
  const [xMin, xMax] = positiveRange(xs);
  const [yMin, yMax] = positiveRange(ys);
  return {
    width: 760, height: 480, left: 64, right: 24, top: 30, bottom: 52,
    xMin, xMax, yMin, yMax,
  };
}

function collect(table: CsvTable, names: string[]): number[] {
  const out: number[] = [];
  for (const name of names) {
    for (const v of requireColumn(table, name)) out.push(v);
  }
  return out;
}

/** Single-realization overview: single, mean, std overlays with the
 *  dip-scale (sqrt N) and Heisenberg-time (pi N / 2) markers. */
export function renderSffFigure(spec: SffFigureSpec): RenderResult {
  const table = readCsv(spec.csv);
  const t = requireColumn(table, "t");
  const series: [string, Float64Array][] = [
    ["single", requireColumn(table, "single")],
    ["mean", requireColumn(table, "mean")],
    ["std", requireColumn(table, "std")],
  ];
  const frame = makeFrame([...t], collect(table, ["single", "mean", "std"]));
  const body: string[] = [];
  const legend: LegendEntry[] = [];
  series.forEach(([name, col], i) => {
    body.push(`<path d="${curvePath(frame, t, col)}" fill="none" stroke="${PALETTE[i]}" stroke-width="1.6"/>`);
    legend.push({ label: name, color: PALETTE[i] });
  });
  const size = configSize(table);
  if (size !== undefined) {
    body.push(verticalMarker(frame, Math.sqrt(size), "sqrt(N)"));
    body.push(verticalMarker(frame, (Math.PI * size) / 2, "pi N/2"));
  }
  const caption = `source: ${spec.csv} [t, single, mean, std]`;
  const svg = renderFrame(frame, spec.title ?? "spectral form factor: single run, mean, std",
    caption, body, legend);
  return { svg, warnings: [] };
}

const WIGNER_PAIRS: [string, string][] = [["mean", "e_wig"], ["std", "s_wig"]];
const MONO_PAIRS: [string, string][] = [
  ["mean_h_mean_s", "e_wig"],
  ["mean_h_var_s", "var_s_pred"],
  ["var_h_mean_s", "s_res_sq"],
];

/** Empirical curves (solid) against prediction columns (dotted). */
export function renderCompareFigure(spec: CompareFigureSpec): RenderResult {
  const emp = readCsv(spec.empirical);
  const pred = readCsv(spec.prediction);
  const isMono = emp.columns["mean_h_mean_s"] !== undefined;
  const pairs = spec.pairs ?? (isMono ? MONO_PAIRS : WIGNER_PAIRS);
  const t = requireColumn(emp, "t");
  const tp = requireColumn(pred, "t");
  const body: string[] = [];
  const legend: LegendEntry[] = [];
  const allValues: number[] = [...collectPairValues(emp, pred, pairs)];
  const frame = makeFrame([...t, ...tp], allValues);
  pairs.forEach(([empCol, predCol], i) => {
    const color = PALETTE[i % PALETTE.length];
    body.push(`<path d="${curvePath(frame, t, requireColumn(emp, empCol))}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    body.push(`<path d="${curvePath(frame, tp, predictionColumn(pred, predCol))}" fill="none" stroke="${color}" stroke-width="1.8" stroke-dasharray="2 4"/>`);
    legend.push({ label: empCol, color });
    legend.push({ label: `${predCol} (prediction)`, color, dashed: true });
  });
  const caption = `empirical: ${spec.empirical} [${pairs.map((p) => p[0]).join(", ")}]; ` +
    `prediction: ${spec.prediction} [${pairs.map((p) => p[1]).join(", ")}]`;
  const svg = renderFrame(frame, spec.title ?? "empirical moments vs predictions",
    caption, body, legend);
  return { svg, warnings: [] };
}

function collectPairValues(emp: CsvTable, pred: CsvTable, pairs: [string, string][]): number[] {
  const values: number[] = [];
  for (const [empCol, predCol] of pairs) {
    for (const v of requireColumn(emp, empCol)) values.push(v);
    for (const v of predictionColumn(pred, predCol)) values.push(v);
  }
  return values;
}

/** Derived prediction columns for the nested-moment panels:
 *  var_s_pred = s_wig^2 - s_res^2, s_res_sq = s_res^2. */
function predictionColumn(pred: CsvTable, name: string): Float64Array {
  if (name === "var_s_pred") {
    const swig = requireColumn(pred, "s_wig");
    const sres = requireColumn(pred, "s_res");
    return Float64Array.from(swig, (v, i) => Math.max(v * v - sres[i] * sres[i], 0));
  }
  if (name === "s_res_sq") {
    const sres = requireColumn(pred, "s_res");
    return Float64Array.from(sres, (v) => v * v);
  }
  return requireColumn(pred, name);
}

/** Sample-size strips: per-count empirical means over filled theory bands. */
export function renderStripFigure(spec: StripFigureSpec): RenderResult {
  const table = readCsv(spec.csv);
  const t = requireColumn(table, "t");
  const counts = table.header
    .map((h) => /^mean_n(\d+)$/.exec(h))
    .filter((m): m is RegExpExecArray => m !== null)
    .map((m) => Number(m[1]))
    .sort((a, b) => a - b);
  if (counts.length === 0) throw new Error(`no mean_n<count> columns in ${spec.csv}`);
  const warnings: string[] = [];
  const values: number[] = [];
  for (const c of counts) {
    for (const v of requireColumn(table, `mean_n${c}`)) values.push(v);
  }
  const frame = makeFrame([...t], values);
  const body: string[] = [];
  const legend: LegendEntry[] = [];
  counts.forEach((c, i) => {
    const color = PALETTE[i % PALETTE.length];
    const lo = table.columns[`band_lo_n${c}`];
    const hi = table.columns[`band_hi_n${c}`];
    if (lo !== undefined && hi !== undefined && hi.some((v) => Number.isFinite(v) && v > 0)) {
      body.push(`<path d="${bandPath(frame, t, lo, hi)}" fill="${color}" fill-opacity="0.18" stroke="none"/>`);
      legend.push({ label: `band n=${c}`, color, filled: true });
    } else {
      warnings.push(`band columns for n=${c} empty or absent; drawing lines only`);
    }
  });
  counts.forEach((c, i) => {
    const color = PALETTE[i % PALETTE.length];
    body.push(`<path d="${curvePath(frame, t, requireColumn(table, `mean_n${c}`))}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    legend.push({ label: `mean n=${c}`, color });
  });
  const caption = `source: ${spec.csv} [${counts.map((c) => `mean_n${c}`).join(", ")} + bands]`;
  const svg = renderFrame(frame, spec.title ?? "sampling strips: prefix means vs fluctuation bands",
    caption, body, legend);
  return { svg, warnings };
}
