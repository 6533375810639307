#!/usr/bin/env node
/**
 * plot error  --in a.csv b.csv ... --out fig.svg
 * plot timing --in a.csv b.csv ... --out table.txt
 */

import * as fs from "node:fs";

import { parseTrace, TraceFile } from "./trace.js";
import { renderErrorSvg } from "./svgplot.js";
import { renderTimingTable } from "./table.js";

interface Args {
  command: string;
  inputs: string[];
  out: string | null;
}

export function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  if (command !== "error" && command !== "timing") {
    throw new Error(`usage: plot <error|timing> --in <csv...> --out <file> (got ${command})`);
  }
  const inputs: string[] = [];
  let out: string | null = null;
  let mode: "in" | "out" | null = null;
  for (const tok of rest) {
    if (tok === "--in") mode = "in";
    else if (tok === "--out") mode = "out";
    else if (mode === "in") inputs.push(tok);
    else if (mode === "out") {
      out = tok;
      mode = null;
    } else throw new Error(`unexpected argument ${tok}`);
  }
  if (inputs.length === 0) throw new Error("no input traces (--in)");
  if (!out) throw new Error("no output path (--out)");
  return { command, inputs, out };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const traces: TraceFile[] = args.inputs.map(parseTrace);
    const content =
      args.command === "error" ? renderErrorSvg(traces) : renderTimingTable(traces);
    fs.writeFileSync(args.out!, content);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && /cli\.(js|ts)$/.test(process.argv[1])) {
  process.exit(run(process.argv.slice(2)));
}
