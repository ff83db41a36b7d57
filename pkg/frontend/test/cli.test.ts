import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

const fixture = (name: string): string =>
  new URL(`../fixtures/${name}`, import.meta.url).pathname;
const cliPath = new URL("../dist/cli.js", import.meta.url).pathname;

function runCli(args: string[]): { code: number; stderr: string } {
  try {
    execFileSync("node", [cliPath, ...args], { stdio: ["ignore", "pipe", "pipe"] });
    return { code: 0, stderr: "" };
  } catch (err) {
    const e = err as { status?: number; stderr?: Buffer };
    return { code: e.status ?? -1, stderr: e.stderr?.toString() ?? "" };
  }
}

describe("render scripts", () => {
  it("each script consumes its CSV and writes an image", () => {
    const dir = mkdtempSync(join(tmpdir(), "sffcli-"));
    const jobs: [string, string[]][] = [
      ["sff.svg", ["sff", fixture("wigner_sff.csv")]],
      ["compare_wig.svg", ["compare", fixture("wigner_sff.csv"), fixture("predict.csv")]],
      ["compare_mono.svg", ["compare", fixture("mono_moments.csv"), fixture("predict.csv")]],
      ["strip.svg", ["strip", fixture("strip.csv")]],
    ];
    for (const [name, args] of jobs) {
      const out = join(dir, name);
      const { code } = runCli([...args, out]);
      expect(code).toBe(0);
      expect(existsSync(out)).toBe(true);
      expect(readFileSync(out, "utf-8")).toContain("</svg>");
    }
  });

  it("reruns produce identical bytes", () => {
    const dir = mkdtempSync(join(tmpdir(), "sffcli-"));
    const outA = join(dir, "a.svg");
    const outB = join(dir, "b.svg");
    expect(runCli(["strip", fixture("strip.csv"), outA]).code).toBe(0);
    expect(runCli(["strip", fixture("strip.csv"), outB]).code).toBe(0);
    expect(readFileSync(outA, "utf-8")).toBe(readFileSync(outB, "utf-8"));
  });

  it("missing columns are reported by name with exit 1", () => {
    const dir = mkdtempSync(join(tmpdir(), "sffcli-"));
    const { code, stderr } = runCli(["sff", fixture("predict.csv"), join(dir, "x.svg")]);
    expect(code).toBe(1);
    expect(stderr).toContain("single");
  });

  it("bad usage exits 1", () => {
    expect(runCli(["sff"]).code).toBe(1);
    expect(runCli(["nope", "a", "b"]).code).toBe(1);
  });
});
