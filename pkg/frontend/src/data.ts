/**
 * Shaping parsed CSV rows into plottable series: per-replicate regret
 * trajectories with across-replicate means, sweep summaries keyed by
 * method, and wealth trajectories on a shared date axis.
 */

import { RegretRow, SchemaError, SummaryRow, WealthRow } from "./csv.js";

export interface Point {
  x: number;
  y: number;
}

export interface MethodCurves {
  method: string;
  /** One cumulative-regret trajectory per replicate, sorted by period. */
  replicates: Point[][];
  /** Across-replicate mean at each period. */
  mean: Point[];
}

/** 1-based global period index of a (switch, period) pair. */
function globalPeriod(s: number, t: number, periodsPerSwitch: number): number {
  return (s - 1) * periodsPerSwitch + t;
}

/**
 * Group regret rows into per-method mean curves with the underlying
 * replicate trajectories. Periods are flattened to a global index using
 * the largest within-switch period seen in the file. Every replicate of
 * a method must cover the same period grid, otherwise the mean would
 * silently average misaligned trajectories.
 */
export function regretCurves(rows: RegretRow[], source: string): MethodCurves[] {
  const periodsPerSwitch = Math.max(...rows.map((r) => r.t));
  const byMethod = new Map<string, Map<number, Map<number, number>>>();
  for (const row of rows) {
    if (row.s < 1 || row.t < 1 || row.t > periodsPerSwitch) {
      throw new SchemaError(`${source}: bad (s, t) pair (${row.s}, ${row.t})`);
    }
    const period = globalPeriod(row.s, row.t, periodsPerSwitch);
    const reps = byMethod.get(row.method) ?? new Map<number, Map<number, number>>();
    byMethod.set(row.method, reps);
    const curve = reps.get(row.replicate) ?? new Map<number, number>();
    reps.set(row.replicate, curve);
    if (curve.has(period)) {
      throw new SchemaError(
        `${source}: duplicate row for method ${row.method}, ` +
          `replicate ${row.replicate}, s=${row.s}, t=${row.t}`,
      );
    }
    curve.set(period, row.cumRegret);
  }

  const out: MethodCurves[] = [];
  for (const [method, reps] of byMethod) {
    const grids = [...reps.values()].map((c) => [...c.keys()].sort((a, b) => a - b));
    const grid = grids[0]!;
    for (const other of grids.slice(1)) {
      if (other.length !== grid.length || other.some((p, i) => p !== grid[i])) {
        throw new SchemaError(
          `${source}: replicates of method ${method} cover different period grids`,
        );
      }
    }
    const replicates = [...reps.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([, curve]) => grid.map((p) => ({ x: p, y: curve.get(p)! })));
    const mean = grid.map((p, i) => ({
      x: p,
      y: replicates.reduce((acc, c) => acc + c[i]!.y, 0) / replicates.length,
    }));
    out.push({ method, replicates, mean });
  }
  return out.sort((a, b) => a.method.localeCompare(b.method));
}

export interface SweepSeries {
  method: string;
  points: Point[];
  halfWidths: number[];
}

/** Group sweep summary rows by method, sorted by the swept value. */
export function sweepSeries(rows: SummaryRow[], source: string): SweepSeries[] {
  const byMethod = new Map<string, SummaryRow[]>();
  for (const row of rows) {
    const list = byMethod.get(row.method) ?? [];
    byMethod.set(row.method, list);
    if (list.some((r) => r.sweepValue === row.sweepValue)) {
      throw new SchemaError(
        `${source}: duplicate sweep_value ${row.sweepValue} for method ${row.method}`,
      );
    }
    list.push(row);
  }
  return [...byMethod.entries()]
    .sort((a, b) => a[0].localeCompare(b[0]))
    .map(([method, list]) => {
      const sorted = [...list].sort((a, b) => a.sweepValue - b.sweepValue);
      return {
        method,
        points: sorted.map((r) => ({ x: r.sweepValue, y: r.meanFinalCumRegret })),
        halfWidths: sorted.map((r) => r.ciHalfWidth),
      };
    });
}

export interface WealthSeries {
  /** Shared date axis, strictly increasing. */
  dates: string[];
  /** Wealth per method, aligned with `dates`. */
  series: { method: string; values: number[] }[];
}

/**
 * Group wealth rows by method on a shared strictly-increasing date axis.
 * Methods must agree on the axis; dates within a method must be unique.
 */
export function wealthSeries(rows: WealthRow[], source: string): WealthSeries {
  const byMethod = new Map<string, Map<string, number>>();
  for (const row of rows) {
    const curve = byMethod.get(row.method) ?? new Map<string, number>();
    byMethod.set(row.method, curve);
    if (curve.has(row.date)) {
      throw new SchemaError(`${source}: duplicate date ${row.date} for method ${row.method}`);
    }
    curve.set(row.date, row.wealth);
  }
  const dates = [...byMethod.values().next().value!.keys()].sort();
  for (const [method, curve] of byMethod) {
    const own = [...curve.keys()].sort();
    if (own.length !== dates.length || own.some((d, i) => d !== dates[i])) {
      throw new SchemaError(`${source}: method ${method} covers a different date axis`);
    }
  }
  return {
    dates,
    series: [...byMethod.entries()]
      .sort((a, b) => a[0].localeCompare(b[0]))
      .map(([method, curve]) => ({
        method,
        values: dates.map((d) => curve.get(d)!),
      })),
  };
}

const METHOD_COLORS = new Map<string, string>([
  ["TSEC", "#1f77b4"],
  ["B1", "#ff7f0e"],
  ["B2", "#2ca02c"],
  ["B3", "#d62728"],
  ["EquallyWeighted", "#ff7f0e"],
  ["ValueWeighted", "#2ca02c"],
  ["MeanVariance", "#d62728"],
  ["SoldAll", "#7f7f7f"],
]);

const FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22"];

/** Stable color per method: fixed for the known methods, rotating otherwise. */
export function methodColor(method: string, index: number): string {
  return METHOD_COLORS.get(method) ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length]!;
}

/** Dash patterns distinguishing overlaid inputs (e.g. budgets) in one panel. */
export const INPUT_DASHES = ["", "6,3", "2,2", "8,3,2,3"];
