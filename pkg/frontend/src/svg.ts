/**
 * Minimal SVG line-chart builder: scales, nice ticks, polyline series with
 * optional markers and vertical error bars, and a legend. Series carry CSS
 * classes and data-label attributes so tests (and downstream styling) can
 * address them structurally.
 */

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
  color: string;
  width?: number;
  opacity?: number;
  /** stroke-dasharray, empty for solid */
  dash?: string;
  cssClass?: string;
  markers?: boolean;
  /** Vertical error half-widths per point; drawn as bars with caps. */
  errorBars?: number[];
  /** Skip in the legend (e.g. per-replicate background curves). */
  legend?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  /** Tick positions on x; defaults to nice ticks over the data range. */
  xTicksAt?: number[];
  /** Formatter for x tick labels (e.g. date lookup). */
  xTickLabel?: (x: number) => string;
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function formatTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1000) return value.toExponential(1);
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(abs < 0.1 ? 3 : abs < 1 ? 2 : 1);
}

const WIDTH = 760;
const HEIGHT = 420;
const MARGIN = { left: 68, right: 24, top: 48, bottom: 58 };

export function renderChart(spec: ChartSpec): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const ysLow = spec.series.flatMap((s) =>
    s.points.map((p, i) => p.y - (s.errorBars?.[i] ?? 0)),
  );
  const ysHigh = spec.series.flatMap((s) =>
    s.points.map((p, i) => p.y + (s.errorBars?.[i] ?? 0)),
  );
  if (xs.length === 0) {
    throw new Error("chart has no points");
  }
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(0, ...ysLow);
  let yMax = Math.max(...ysHigh);
  if (yMax === yMin) {
    yMax = yMin + 1;
  }
  yMax += 0.05 * (yMax - yMin);

  const xOf = (x: number) => MARGIN.left + ((x - xMin) / (xMax - xMin || 1)) * plotW;
  const yOf = (y: number) => MARGIN.top + plotH - ((y - yMin) / (yMax - yMin)) * plotH;

  const lines: string[] = [];
  lines.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${MARGIN.left}" y="24" font-size="15" font-weight="600" fill="#222">` +
      `${escapeXml(spec.title)}</text>`,
  );

  const yTicks = niceTicks(yMin, yMax, 6);
  for (const v of yTicks) {
    const y = yOf(v);
    lines.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${MARGIN.left + plotW}" ` +
        `y2="${y.toFixed(1)}" stroke="#e5e5e5" stroke-width="0.6"/>`,
      `<text x="${MARGIN.left - 6}" y="${(y + 3.5).toFixed(1)}" font-size="10" ` +
        `fill="#555" text-anchor="end">${escapeXml(formatTick(v))}</text>`,
    );
  }

  const xTicks = spec.xTicksAt ?? niceTicks(xMin, xMax, 7);
  const xLabelOf = spec.xTickLabel ?? formatTick;
  for (const v of xTicks) {
    if (v < xMin - 1e-9 || v > xMax + 1e-9) continue;
    const x = xOf(v);
    lines.push(
      `<line x1="${x.toFixed(1)}" y1="${MARGIN.top + plotH}" x2="${x.toFixed(1)}" ` +
        `y2="${MARGIN.top + plotH + 4}" stroke="#555" stroke-width="0.8"/>`,
      `<text x="${x.toFixed(1)}" y="${MARGIN.top + plotH + 17}" font-size="10" ` +
        `fill="#555" text-anchor="middle">${escapeXml(xLabelOf(v))}</text>`,
    );
  }

  lines.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#333" stroke-width="1"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#333" stroke-width="1"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" font-size="12" fill="#333" ` +
      `text-anchor="middle">${escapeXml(spec.xLabel)}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" font-size="12" fill="#333" ` +
      `text-anchor="middle" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">` +
      `${escapeXml(spec.yLabel)}</text>`,
  );

  for (const series of spec.series) {
    const cls = series.cssClass ? ` class="${escapeXml(series.cssClass)}"` : "";
    const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
    const opacity = series.opacity !== undefined ? ` stroke-opacity="${series.opacity}"` : "";
    const width = series.width ?? 1.6;
    const label = escapeXml(series.label);

    if (series.errorBars) {
      for (let i = 0; i < series.points.length; i += 1) {
        const half = series.errorBars[i] ?? 0;
        if (half <= 0) continue;
        const p = series.points[i]!;
        const x = xOf(p.x);
        const yLow = yOf(p.y - half);
        const yHigh = yOf(p.y + half);
        lines.push(
          `<line class="ci-bar" data-label="${label}" x1="${x.toFixed(1)}" ` +
            `y1="${yLow.toFixed(1)}" x2="${x.toFixed(1)}" y2="${yHigh.toFixed(1)}" ` +
            `stroke="${series.color}" stroke-width="1.1"/>`,
          `<line class="ci-cap" data-label="${label}" x1="${(x - 4).toFixed(1)}" ` +
            `y1="${yLow.toFixed(1)}" x2="${(x + 4).toFixed(1)}" y2="${yLow.toFixed(1)}" ` +
            `stroke="${series.color}" stroke-width="1.1"/>`,
          `<line class="ci-cap" data-label="${label}" x1="${(x - 4).toFixed(1)}" ` +
            `y1="${yHigh.toFixed(1)}" x2="${(x + 4).toFixed(1)}" y2="${yHigh.toFixed(1)}" ` +
            `stroke="${series.color}" stroke-width="1.1"/>`,
        );
      }
    }

    const coords = series.points
      .map((p) => `${xOf(p.x).toFixed(1)},${yOf(p.y).toFixed(1)}`)
      .join(" ");
    lines.push(
      `<polyline${cls} data-label="${label}" points="${coords}" fill="none" ` +
        `stroke="${series.color}" stroke-width="${width}"${dash}${opacity}/>`,
    );

    if (series.markers) {
      for (const p of series.points) {
        lines.push(
          `<circle class="marker" data-label="${label}" cx="${xOf(p.x).toFixed(1)}" ` +
            `cy="${yOf(p.y).toFixed(1)}" r="2.6" fill="${series.color}"/>`,
        );
      }
    }
  }

  const legendEntries = spec.series.filter((s) => s.legend !== false);
  let legendY = MARGIN.top + 6;
  for (const series of legendEntries) {
    const x = MARGIN.left + plotW - 150;
    lines.push(
      `<line x1="${x}" y1="${legendY}" x2="${x + 22}" y2="${legendY}" ` +
        `stroke="${series.color}" stroke-width="${series.width ?? 1.6}"` +
        `${series.dash ? ` stroke-dasharray="${series.dash}"` : ""}/>`,
      `<text x="${x + 28}" y="${legendY + 3.5}" font-size="10.5" fill="#333">` +
        `${escapeXml(series.label)}</text>`,
    );
    legendY += 15;
  }

  lines.push("</svg>");
  return lines.join("\n");
}
