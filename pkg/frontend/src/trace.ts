/**
 * Reader for the benchmark trace CSV schema.
 *
 * The harness emits one file per (problem, solver) cell with the fixed
 * header below; optional metrics appear as empty fields.  Filenames follow
 * `<family>__<SOLVER>.csv`, which is where the plot legend gets its labels.
 */

import { readFileSync } from "node:fs";
import { basename } from "node:path";

export const TRACE_HEADER =
  "iter,eta,L_t,hatL_t,eg_residual,nat_residual,tan_residual," +
  "gap,dist_to_solution,backtrack_failures,elapsed_s";

export const TRACE_COLUMNS = TRACE_HEADER.split(",");

export class MissingColumnError extends Error {
  constructor(metric: string, detail: string) {
    super(`MISSING_COLUMN: ${metric} (${detail})`);
    this.name = "MissingColumnError";
  }
}

export class EmptyTraceError extends Error {
  constructor(file: string) {
    super(`EMPTY_TRACE: ${file} has no data rows`);
    this.name = "EmptyTraceError";
  }
}

export interface TraceSeries {
  /** solver label parsed from the filename */
  label: string;
  file: string;
  iterations: number[];
  /** finite metric values, aligned with `iterations` */
  values: number[];
}

/** Solver name from a trace filename: `matrix_game__PF_NE_EG.csv` -> `PF_NE_EG`. */
export function solverLabel(file: string): string {
  const stem = basename(file).replace(/\.csv$/i, "");
  const split = stem.lastIndexOf("__");
  return split >= 0 ? stem.slice(split + 2) : stem;
}

/**
 * Extract one metric column from a trace file.
 *
 * Rows where the metric field is empty are skipped (unrecorded); a file
 * whose column never holds a finite value is an error, as is a metric name
 * outside the schema.
 */
export function readMetric(file: string, metric: string): TraceSeries {
  const col = TRACE_COLUMNS.indexOf(metric);
  if (col < 0) {
    throw new MissingColumnError(metric, `not a trace column; expected one of ${TRACE_HEADER}`);
  }
  const text = readFileSync(file, "utf8");
  const lines = text.split("\n").filter((ln) => ln.trim() !== "");
  if (lines.length === 0 || lines[0] !== TRACE_HEADER) {
    throw new Error(`${file}: not a trace file (bad header)`);
  }
  if (lines.length === 1) {
    throw new EmptyTraceError(file);
  }
  const iterations: number[] = [];
  const values: number[] = [];
  for (const line of lines.slice(1)) {
    const fields = line.split(",");
    if (fields.length !== TRACE_COLUMNS.length) {
      throw new Error(`${file}: malformed row '${line}'`);
    }
    const raw = fields[col];
    if (raw === "") continue;
    const v = Number(raw);
    if (!Number.isFinite(v)) continue;
    iterations.push(Number(fields[0]));
    values.push(v);
  }
  if (values.length === 0) {
    throw new MissingColumnError(metric, `no finite values in ${file}`);
  }
  return { label: solverLabel(file), file, iterations, values };
}
