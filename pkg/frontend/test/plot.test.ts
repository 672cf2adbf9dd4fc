import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { main, plotTraces } from "../src/plot_traces.js";
import {
  EmptyTraceError,
  MissingColumnError,
  TRACE_HEADER,
  readMetric,
  solverLabel,
} from "../src/trace.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plot-traces-"));
}

/** Write a synthetic trace in the harness schema; `gaps` drives the gap
 * column, the other metric fields stay empty. */
function writeTrace(dir: string, name: string, gaps: (number | null)[]): string {
  const rows = gaps.map((g, i) => {
    const gap = g === null ? "" : g.toExponential(10);
    return `${i + 1},0.5,1,1,${(1 / (i + 1)).toExponential(10)},,,${gap},,0,0.001`;
  });
  const path = join(dir, name);
  writeFileSync(path, [TRACE_HEADER, ...rows].join("\n") + "\n");
  return path;
}

function gameGrid(dir: string): string[] {
  const solvers = ["EG_FIXED", "PF_NE_EG", "PF_NE_EG_BT", "PF_NE_EG_ADABT"];
  return solvers.map((s, k) =>
    writeTrace(dir, `matrix_game__${s}.csv`,
      Array.from({ length: 60 }, (_, i) => Math.pow(10, -(i + k) / 10))));
}

describe("trace reading", () => {
  it("parses the solver label from harness filenames", () => {
    expect(solverLabel("results/matrix_game__PF_NE_EG.csv")).toBe("PF_NE_EG");
    expect(solverLabel("standalone.csv")).toBe("standalone");
  });

  it("rejects metrics outside the trace schema", () => {
    const dir = tmp();
    const file = writeTrace(dir, "matrix_game__EG_FIXED.csv", [1, 0.5]);
    expect(() => readMetric(file, "volume")).toThrow(MissingColumnError);
  });

  it("reports a column with no finite values", () => {
    const dir = tmp();
    // tan_residual stays empty on simplex-domain traces
    const file = writeTrace(dir, "matrix_game__PF_NE_EG.csv", [1, 0.5]);
    expect(() => readMetric(file, "tan_residual")).toThrow(/no finite values/);
  });

  it("rejects header-only traces", () => {
    const dir = tmp();
    const path = join(dir, "matrix_game__EG_FIXED.csv");
    writeFileSync(path, TRACE_HEADER + "\n");
    expect(() => readMetric(path, "gap")).toThrow(EmptyTraceError);
  });

  it("skips rows where the metric is unrecorded", () => {
    const dir = tmp();
    const file = writeTrace(dir, "g__S.csv", [1, null, 0.25]);
    const series = readMetric(file, "gap");
    expect(series.iterations).toEqual([1, 3]);
    expect(series.values).toEqual([1, 0.25]);
  });
});

describe("figure rendering", () => {
  it("renders a 4-curve log-scale figure from a matrix-game grid", () => {
    const dir = tmp();
    const files = gameGrid(dir);
    const out = join(dir, "gap.svg");
    plotTraces({ traceFiles: files, metric: "gap", outPath: out, logY: true });
    const svg = readFileSync(out, "utf8");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(4);
    for (const s of ["EG_FIXED", "PF_NE_EG", "PF_NE_EG_BT", "PF_NE_EG_ADABT"]) {
      expect(svg).toContain(s);
    }
    expect(svg).toContain("log scale");
  });

  it("never mutates its input files", () => {
    const dir = tmp();
    const files = gameGrid(dir);
    const before = files.map((f) => readFileSync(f, "utf8"));
    plotTraces({ traceFiles: files, metric: "eg_residual", outPath: join(dir, "o.svg"), logY: true });
    files.forEach((f, i) => expect(readFileSync(f, "utf8")).toBe(before[i]));
  });

  it("plots a one-row trace as a single marker without crashing", () => {
    const dir = tmp();
    const file = writeTrace(dir, "g__ONE.csv", [0.5]);
    const out = join(dir, "one.svg");
    plotTraces({ traceFiles: [file], metric: "gap", outPath: out, logY: true });
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("<circle");
  });

  it("clamps non-positive values for log plotting and says so in the legend", () => {
    const dir = tmp();
    const file = writeTrace(dir, "g__CLAMP.csv", [1, 0, 1e-20]);
    const out = join(dir, "clamp.svg");
    plotTraces({ traceFiles: [file], metric: "gap", outPath: out, logY: true });
    expect(readFileSync(out, "utf8")).toContain("clamped at 1e-16");
  });

  it("supports a linear y axis when asked", () => {
    const dir = tmp();
    const file = writeTrace(dir, "g__LIN.csv", [3, 2, 1]);
    const out = join(dir, "lin.svg");
    plotTraces({ traceFiles: [file], metric: "gap", outPath: out, logY: false });
    expect(readFileSync(out, "utf8")).not.toContain("log scale");
  });
});

describe("command line", () => {
  it("exits 0 and writes the figure on a valid invocation", () => {
    const dir = tmp();
    const files = gameGrid(dir);
    const out = join(dir, "cli.svg");
    expect(main(["--metric", "gap", "--out", out, ...files])).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("exits 1 with usage when required flags are missing", () => {
    expect(main([])).toBe(1);
    expect(main(["--metric", "gap"])).toBe(1);
  });

  it("exits 1 on the documented metric errors", () => {
    const dir = tmp();
    const files = gameGrid(dir);
    expect(main(["--metric", "volume", "--out", join(dir, "x.svg"), ...files])).toBe(1);
    expect(main(["--metric", "tan_residual", "--out", join(dir, "x.svg"), ...files])).toBe(1);
  });
});
