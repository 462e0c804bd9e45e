/**
 * Typed readers for the three CSV schemas the study tools emit:
 *
 *   regret.csv   method,replicate,s,t,period_regret,cum_regret
 *   summary.csv  sweep_value,method,mean_final_cum_regret,ci_half_width
 *   wealth.csv   date,method,wealth
 *
 * Parsing is strict: a missing column or an unparsable cell raises
 * SchemaError with a diagnostic naming the offending columns, so the
 * command-line tool can fail loudly instead of drawing nonsense.
 */

import Papa from "papaparse";

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface RegretRow {
  method: string;
  replicate: number;
  s: number;
  t: number;
  periodRegret: number;
  cumRegret: number;
}

export interface SummaryRow {
  sweepValue: number;
  method: string;
  meanFinalCumRegret: number;
  ciHalfWidth: number;
}

export interface WealthRow {
  date: string;
  method: string;
  wealth: number;
}

type CellKind = "string" | "int" | "float";

interface ColumnSpec {
  name: string;
  kind: CellKind;
}

function parseCell(raw: string, spec: ColumnSpec, source: string, row: number): string | number {
  const text = raw.trim();
  if (spec.kind === "string") {
    if (text === "") {
      throw new SchemaError(`${source}: row ${row}: column "${spec.name}" is empty`);
    }
    return text;
  }
  const value = Number(text);
  if (text === "" || !Number.isFinite(value)) {
    throw new SchemaError(
      `${source}: row ${row}: column "${spec.name}" has non-numeric value "${raw}"`,
    );
  }
  if (spec.kind === "int" && !Number.isInteger(value)) {
    throw new SchemaError(
      `${source}: row ${row}: column "${spec.name}" expected an integer, got "${raw}"`,
    );
  }
  return value;
}

/** Parse CSV text against an expected header, returning one record per row. */
function parseRows(
  text: string,
  source: string,
  columns: ColumnSpec[],
): Record<string, string | number>[] {
  if (text.trim() === "") {
    throw new SchemaError(`${source}: no data rows`);
  }
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const fatal = parsed.errors.find((e) => e.type !== "FieldMismatch");
  if (fatal) {
    throw new SchemaError(`${source}: CSV parse error: ${fatal.message}`);
  }
  const found = parsed.meta.fields ?? [];
  const missing = columns.map((c) => c.name).filter((name) => !found.includes(name));
  if (missing.length > 0) {
    throw new SchemaError(
      `${source}: missing column(s) [${missing.join(", ")}]; ` +
        `expected [${columns.map((c) => c.name).join(", ")}], ` +
        `found [${found.join(", ")}]`,
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }
  return parsed.data.map((record, i) => {
    const out: Record<string, string | number> = {};
    for (const spec of columns) {
      const raw = record[spec.name];
      if (raw === undefined) {
        throw new SchemaError(`${source}: row ${i + 1}: column "${spec.name}" is absent`);
      }
      out[spec.name] = parseCell(raw, spec, source, i + 1);
    }
    return out;
  });
}

const REGRET_COLUMNS: ColumnSpec[] = [
  { name: "method", kind: "string" },
  { name: "replicate", kind: "int" },
  { name: "s", kind: "int" },
  { name: "t", kind: "int" },
  { name: "period_regret", kind: "float" },
  { name: "cum_regret", kind: "float" },
];

const SUMMARY_COLUMNS: ColumnSpec[] = [
  { name: "sweep_value", kind: "float" },
  { name: "method", kind: "string" },
  { name: "mean_final_cum_regret", kind: "float" },
  { name: "ci_half_width", kind: "float" },
];

const WEALTH_COLUMNS: ColumnSpec[] = [
  { name: "date", kind: "string" },
  { name: "method", kind: "string" },
  { name: "wealth", kind: "float" },
];

export function parseRegretCsv(text: string, source: string): RegretRow[] {
  return parseRows(text, source, REGRET_COLUMNS).map((r) => ({
    method: r["method"] as string,
    replicate: r["replicate"] as number,
    s: r["s"] as number,
    t: r["t"] as number,
    periodRegret: r["period_regret"] as number,
    cumRegret: r["cum_regret"] as number,
  }));
}

export function parseSummaryCsv(text: string, source: string): SummaryRow[] {
  return parseRows(text, source, SUMMARY_COLUMNS).map((r) => ({
    sweepValue: r["sweep_value"] as number,
    method: r["method"] as string,
    meanFinalCumRegret: r["mean_final_cum_regret"] as number,
    ciHalfWidth: r["ci_half_width"] as number,
  }));
}

export function parseWealthCsv(text: string, source: string): WealthRow[] {
  return parseRows(text, source, WEALTH_COLUMNS).map((r) => ({
    date: r["date"] as string,
    method: r["method"] as string,
    wealth: r["wealth"] as number,
  }));
}
