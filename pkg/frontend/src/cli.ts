/**
 * Standalone render entry points.
 *
 *   node dist/cli.js sff     <wigner_sff.csv>              <out.svg>
 *   node dist/cli.js compare <empirical.csv> <predict.csv> <out.svg>
 *   node dist/cli.js strip   <strip.csv>                   <out.svg>
 *
 * Exit 0 on success (warnings on stderr), 1 on bad usage or render errors;
 * missing-column errors name the column.
 */

import { writeFileSync } from "node:fs";
import process from "node:process";

import { MissingColumnError } from "./csv.js";
import { RenderResult, renderCompareFigure, renderSffFigure, renderStripFigure } from "./figures.js";

const USAGE = `usage:
  cli.js sff     <wigner_sff.csv> <out.svg>
  cli.js compare <empirical.csv> <predict.csv> <out.svg>
  cli.js strip   <strip.csv> <out.svg>`;

export function run(argv: string[]): number {
  const [mode, ...rest] = argv;
  let result: RenderResult;
  let output: string;
  try {
    if (mode === "sff" && rest.length === 2) {
      result = renderSffFigure({ csv: rest[0] });
      output = rest[1];
    } else if (mode === "compare" && rest.length === 3) {
      result = renderCompareFigure({ empirical: rest[0], prediction: rest[1] });
      output = rest[2];
    } else if (mode === "strip" && rest.length === 2) {
      result = renderStripFigure({ csv: rest[0] });
      output = rest[1];
    } else {
      process.stderr.write(USAGE + "\n");
      return 1;
    }
  } catch (err) {
    if (err instanceof MissingColumnError) {
      process.stderr.write(`render error: ${err.message}\n`);
    } else {
      process.stderr.write(`render error: ${String(err instanceof Error ? err.message : err)}\n`);
    }
    return 1;
  }
  for (const warning of result.warnings) {
    process.stderr.write(`warning: ${warning}\n`);
  }
  writeFileSync(output, result.svg, "utf-8");
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
