/**
 * Reader for the simulation CSV schema: `# key=value` metadata comment lines,
 * one lowercase snake_case header row, comma-separated 64-bit reals, LF
 * terminators.  Files are consumed read-only.
 */

import { readFileSync } from "node:fs";

export interface CsvTable {
  path: string;
  meta: Record<string, string>;
  header: string[];
  columns: Record<string, Float64Array>;
  rows: number;
}

export class MissingColumnError extends Error {
  readonly column: string;

  constructor(column: string, path: string) {
    super(`missing column '${column}' in ${path}`);
    this.column = column;
  }
}

export function parseCsv(text: string, path = "<string>"): CsvTable {
  const meta: Record<string, string> = {};
  let header: string[] = [];
  const data: number[][] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trimEnd();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf("=");
      if (eq > 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
      continue;
    }
    if (header.length === 0) {
      header = line.split(",");
      continue;
    }
    data.push(line.split(",").map(Number));
  }
  if (header.length === 0) throw new Error(`no header row in ${path}`);
  const columns: Record<string, Float64Array> = {};
  header.forEach((name, j) => {
    const col = new Float64Array(data.length);
    data.forEach((row, i) => {
      col[i] = row[j];
    });
    columns[name] = col;
  });
  return { path, meta, header, columns, rows: data.length };
}

export function readCsv(path: string): CsvTable {
  return parseCsv(readFileSync(path, "utf-8"), path);
}

export function requireColumn(table: CsvTable, name: string): Float64Array {
  const col = table.columns[name];
  if (col === undefined) throw new MissingColumnError(name, table.path);
  return col;
}

/** Matrix dimension recorded in the provenance line, when present. */
export function configSize(table: CsvTable): number | undefined {
  const config = table.meta["config"];
  if (!config) return undefined;
  const m = config.match(/\bsize=(\d+)/);
  return m ? Number(m[1]) : undefined;
}
