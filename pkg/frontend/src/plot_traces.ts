#!/usr/bin/env node
/**
 * plot_traces — log-scale convergence figures from benchmark trace CSVs.
 *
 * Usage:
 *   plot_traces --metric <column> --out <figure.svg> <trace.csv>...
 *   plot_traces --metric gap --out gap.svg --linear-y results/*.csv
 *
 * One line per input trace; the legend labels come from the solver part of
 * each filename (`<family>__<SOLVER>.csv`).  The y-axis is log-scaled by
 * default; values at or below 0 are clamped to 1e-16 for plotting only and
 * the legend says so.  Input files are never modified.
 *
 * Errors exit with code 1 and a message on stderr:
 *   MISSING_COLUMN — the metric is not a trace column, or holds no finite
 *                    values in some input file;
 *   EMPTY_TRACE    — an input file has no data rows.
 */

import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { renderChart } from "./chart.js";
import { readMetric, TraceSeries } from "./trace.js";

export interface PlotSpec {
  traceFiles: string[];
  metric: string;
  outPath: string;
  logY: boolean;
  title?: string;
}

/** Read every trace, render the figure, and write it to spec.outPath. */
export function plotTraces(spec: PlotSpec): void {
  if (spec.traceFiles.length === 0) {
    throw new Error("no trace files given");
  }
  const series: TraceSeries[] = spec.traceFiles.map((f) => readMetric(f, spec.metric));
  const svg = renderChart(series, {
    metric: spec.metric,
    logY: spec.logY,
    title: spec.title,
  });
  writeFileSync(spec.outPath, svg);
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        metric: { type: "string" },
        out: { type: "string" },
        "linear-y": { type: "boolean", default: false },
        title: { type: "string" },
      },
    });
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  const { metric, out, title } = parsed.values;
  if (!metric || !out || parsed.positionals.length === 0) {
    console.error(
      "usage: plot_traces --metric <column> --out <figure.svg> [--linear-y] [--title <text>] <trace.csv>...");
    return 1;
  }
  try {
    plotTraces({
      traceFiles: parsed.positionals,
      metric,
      outPath: out,
      logY: !parsed.values["linear-y"],
      title,
    });
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  console.log(`wrote ${out} (${parsed.positionals.length} series, metric=${metric})`);
  return 0;
}

if (process.argv[1] && /plot_traces\.js$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
