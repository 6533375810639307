/**
 * Trace-file reader for the simulator's CSV schema:
 *   t,u_0..u_{m-1},unom_0..unom_{m-1},err_inf,step_ms
 *
 * The error column is recomputed from the u columns on load; the file
 * is rejected on any header mismatch or non-monotone time column.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface TraceFile {
  path: string;
  label: string;
  t: number[];
  u: number[][];
  uNom: number[][];
  errInf: number[];
  stepMs: number[];
}

export function expectedHeader(m: number): string[] {
  const head = ["t"];
  for (let i = 0; i < m; i++) head.push(`u_${i}`);
  for (let i = 0; i < m; i++) head.push(`unom_${i}`);
  head.push("err_inf", "step_ms");
  return head;
}

export function parseTrace(filePath: string): TraceFile {
  const text = fs.readFileSync(filePath, "utf8");
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${filePath}: empty trace file`);
  }
  const header = lines[0].split(",");
  const m = header.filter((h) => h.startsWith("u_")).length;
  const want = expectedHeader(m);
  if (m === 0 || header.length !== want.length || header.some((h, i) => h !== want[i])) {
    throw new Error(`${filePath}: trace schema mismatch (got: ${lines[0]})`);
  }
  if (lines.length === 1) {
    throw new Error(`${filePath}: trace has no data rows`);
  }
  const t: number[] = [];
  const u: number[][] = [];
  const uNom: number[][] = [];
  const errInf: number[] = [];
  const stepMs: number[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== want.length) {
      throw new Error(`${filePath}: row with ${cells.length} cells, expected ${want.length}`);
    }
    t.push(Number(cells[0]));
    const ui = cells.slice(1, 1 + m).map(Number);
    const ni = cells.slice(1 + m, 1 + 2 * m).map(Number);
    u.push(ui);
    uNom.push(ni);
    // Recompute the sup-norm gap rather than trusting the file.
    errInf.push(Math.max(...ui.map((v, k) => Math.abs(v - ni[k]))));
    stepMs.push(Number(cells[2 + 2 * m]));
  }
  for (let i = 1; i < t.length; i++) {
    if (!(t[i] > t[i - 1])) {
      throw new Error(`${filePath}: time column is not strictly increasing at row ${i}`);
    }
  }
  return { path: filePath, label: path.basename(filePath, ".csv"), t, u, uNom, errInf, stepMs };
}
