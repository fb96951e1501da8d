#!/usr/bin/env node
/**
 * render_fig: render a thirdq figure dataset (CSV) to SVG.
 *
 * Usage:
 *   render_fig --id fig1|fig2|fig3 --in data.csv --out figure.svg
 *
 * Exit codes: 0 success, 1 usage/IO error, 2 schema mismatch (the message
 * carries the column diff).
 */

import { readFileSync, writeFileSync } from "fs";
import { SchemaError } from "./csv.js";
import { FigureId, renderFigure, SCHEMAS } from "./figures.js";

interface Args {
  id: FigureId;
  input: string;
  output: string;
}

function parseArgs(argv: string[]): Args {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key?.startsWith("--") || value === undefined) {
      throw new Error(`cannot parse arguments near "${key ?? ""}"`);
    }
    opts.set(key.slice(2), value);
  }
  const id = opts.get("id");
  const input = opts.get("in");
  const output = opts.get("out");
  if (!id || !input || !output) {
    throw new Error("required: --id fig1|fig2|fig3 --in data.csv --out figure.svg");
  }
  if (!(id in SCHEMAS)) {
    throw new Error(`unknown figure id "${id}"; choose fig1, fig2 or fig3`);
  }
  return { id: id as FigureId, input, output };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`render_fig: ${(err as Error).message}`);
    return 1;
  }
  try {
    const text = readFileSync(args.input, "utf-8");
    const svg = renderFigure(args.id, text);
    writeFileSync(args.output, svg);
  } catch (err) {
    const code = err instanceof SchemaError ? 2 : 1;
    console.error(`render_fig: ${(err as Error).message}`);
    return code;
  }
  return 0;
}

if (process.argv[1] && /render_fig\.(js|ts)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
