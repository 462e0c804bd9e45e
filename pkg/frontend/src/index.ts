export {
  parseRegretCsv,
  parseSummaryCsv,
  parseWealthCsv,
  SchemaError,
  type RegretRow,
  type SummaryRow,
  type WealthRow,
} from "./csv.js";
export {
  methodColor,
  regretCurves,
  sweepSeries,
  wealthSeries,
  type MethodCurves,
  type SweepSeries,
  type WealthSeries,
} from "./data.js";
export { buildFigure, FIGURE_KINDS, type FigureInput, type FigureKind } from "./figures.js";
export { renderChart, escapeXml, niceTicks, type ChartSpec, type Series } from "./svg.js";
export { runCli } from "./cli.js";
