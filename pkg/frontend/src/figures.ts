/**
 * The four figure kinds, built from the documented CSV schemas:
 *
 *   regret_curve  one regret.csv  — cumulative regret vs. period, mean line
 *                 per method over faint per-replicate trajectories
 *   n_sweep       one summary.csv — final regret vs. swept value, 95% CI bars
 *   k_sweep       regret.csv per budget — mean regret vs. period, color by
 *                 method, dash by input
 *   wealth_curve  one wealth.csv  — wealth vs. date, one line per method
 */

import { parseRegretCsv, parseSummaryCsv, parseWealthCsv, SchemaError } from "./csv.js";
import { INPUT_DASHES, methodColor, regretCurves, sweepSeries, wealthSeries } from "./data.js";
import { renderChart, Series } from "./svg.js";

export const FIGURE_KINDS = ["regret_curve", "n_sweep", "k_sweep", "wealth_curve"] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureInput {
  /** Raw CSV text. */
  text: string;
  /** Where the text came from, for diagnostics. */
  source: string;
  /** Display label, used when several inputs share one panel. */
  label: string;
}

function requireInputs(kind: FigureKind, inputs: FigureInput[], count: number | "many"): void {
  if (count === "many" ? inputs.length < 1 : inputs.length !== count) {
    const want = count === "many" ? "at least one input CSV" : `exactly ${count} input CSV`;
    throw new SchemaError(`${kind} needs ${want}, got ${inputs.length}`);
  }
}

function regretCurveFigure(input: FigureInput): string {
  const curves = regretCurves(parseRegretCsv(input.text, input.source), input.source);
  const series: Series[] = [];
  curves.forEach((curve, i) => {
    for (const replicate of curve.replicates) {
      series.push({
        label: curve.method,
        points: replicate,
        color: methodColor(curve.method, i),
        width: 1,
        opacity: 0.25,
        cssClass: "replicate-line",
        legend: false,
      });
    }
  });
  curves.forEach((curve, i) => {
    series.push({
      label: curve.method,
      points: curve.mean,
      color: methodColor(curve.method, i),
      width: 2.2,
      cssClass: "mean-line",
    });
  });
  return renderChart({
    title: "Cumulative regret by period",
    xLabel: "period",
    yLabel: "cumulative regret",
    series,
  });
}

function nSweepFigure(input: FigureInput): string {
  const groups = sweepSeries(parseSummaryCsv(input.text, input.source), input.source);
  const series: Series[] = groups.map((group, i) => ({
    label: group.method,
    points: group.points,
    color: methodColor(group.method, i),
    width: 1.8,
    markers: true,
    errorBars: group.halfWidths,
    cssClass: "sweep-line",
  }));
  const values = [...new Set(groups.flatMap((g) => g.points.map((p) => p.x)))].sort(
    (a, b) => a - b,
  );
  return renderChart({
    title: "Final cumulative regret across the sweep",
    xLabel: "swept value",
    yLabel: "final cumulative regret (mean and 95% CI)",
    series,
    xTicksAt: values,
  });
}

function kSweepFigure(inputs: FigureInput[]): string {
  const series: Series[] = [];
  inputs.forEach((input, inputIndex) => {
    const curves = regretCurves(parseRegretCsv(input.text, input.source), input.source);
    curves.forEach((curve, i) => {
      series.push({
        label: `${curve.method} (${input.label})`,
        points: curve.mean,
        color: methodColor(curve.method, i),
        width: 1.8,
        dash: INPUT_DASHES[inputIndex % INPUT_DASHES.length],
        cssClass: "mean-line",
      });
    });
  });
  return renderChart({
    title: "Cumulative regret by period, per budget",
    xLabel: "period",
    yLabel: "mean cumulative regret",
    series,
  });
}

function wealthCurveFigure(input: FigureInput): string {
  const wealth = wealthSeries(parseWealthCsv(input.text, input.source), input.source);
  const series: Series[] = wealth.series.map((entry, i) => ({
    label: entry.method,
    points: entry.values.map((value, index) => ({ x: index, y: value })),
    color: methodColor(entry.method, i),
    width: 1.8,
    cssClass: "wealth-line",
  }));
  const tickStep = Math.max(1, Math.ceil(wealth.dates.length / 8));
  const ticks = wealth.dates.map((_, i) => i).filter((i) => i % tickStep === 0);
  return renderChart({
    title: "Portfolio wealth by rebalance date",
    xLabel: "date",
    yLabel: "cumulative wealth (growth of 1)",
    series,
    xTicksAt: ticks,
    xTickLabel: (x) => wealth.dates[Math.round(x)] ?? "",
  });
}

/** Render one figure kind from its input CSV text(s) to an SVG string. */
export function buildFigure(kind: FigureKind, inputs: FigureInput[]): string {
  switch (kind) {
    case "regret_curve":
      requireInputs(kind, inputs, 1);
      return regretCurveFigure(inputs[0]!);
    case "n_sweep":
      requireInputs(kind, inputs, 1);
      return nSweepFigure(inputs[0]!);
    case "k_sweep":
      requireInputs(kind, inputs, "many");
      return kSweepFigure(inputs);
    case "wealth_curve":
      requireInputs(kind, inputs, 1);
      return wealthCurveFigure(inputs[0]!);
  }
}
