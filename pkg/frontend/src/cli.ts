/**
 * Figure rendering command line.
 *
 *   tsec-plot --kind regret_curve --in out/regret.csv --out regret.svg
 *   tsec-plot --kind k_sweep --in "K=8=out/k8/regret.csv" --in "K=16=out/k16/regret.csv" \
 *             --out k_sweep.svg
 *
 * --in may repeat; an input of the form LABEL=PATH (no slash in LABEL)
 * attaches a display label, otherwise the file stem is used. On any
 * parse or schema failure the tool prints the diagnostic to stderr,
 * exits nonzero, and writes nothing.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { SchemaError } from "./csv.js";
import { buildFigure, FIGURE_KINDS, FigureInput, FigureKind } from "./figures.js";

const USAGE =
  "usage: tsec-plot --kind {regret_curve|n_sweep|k_sweep|wealth_curve} " +
  "--in CSV [--in CSV ...] --out SVG";

function splitLabel(arg: string): { label: string; path: string } {
  // LABEL=PATH, splitting at the last "=" so labels like "K=8" work;
  // a path that itself contains "=" therefore needs an explicit label.
  const eq = arg.lastIndexOf("=");
  if (eq > 0 && eq < arg.length - 1 && !arg.slice(0, eq).includes("/")) {
    return { label: arg.slice(0, eq), path: arg.slice(eq + 1) };
  }
  return { label: basename(arg).replace(/\.csv$/i, ""), path: arg };
}

function loadInput(arg: string): FigureInput {
  const { label, path } = splitLabel(arg);
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (error) {
    throw new SchemaError(`cannot read ${path}: ${(error as Error).message}`);
  }
  return { text, source: path, label };
}

/** Run the tool; returns the process exit code instead of exiting. */
export function runCli(argv: string[], stderr: (line: string) => void = console.error): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string", multiple: true },
        out: { type: "string" },
      },
      allowPositionals: false,
    });
  } catch (error) {
    stderr((error as Error).message);
    stderr(USAGE);
    return 2;
  }
  const { kind, in: inputs, out } = parsed.values;
  if (!kind || !inputs || inputs.length === 0 || !out) {
    stderr(USAGE);
    return 2;
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    stderr(`unknown figure kind "${kind}"; expected one of ${FIGURE_KINDS.join(", ")}`);
    return 2;
  }

  let svg: string;
  try {
    svg = buildFigure(kind as FigureKind, inputs.map(loadInput));
  } catch (error) {
    if (error instanceof SchemaError) {
      stderr(error.message);
      return 1;
    }
    throw error;
  }
  writeFileSync(out, svg);
  return 0;
}

const isMain =
  typeof process.argv[1] === "string" &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (isMain) {
  process.exit(runCli(process.argv.slice(2)));
}
