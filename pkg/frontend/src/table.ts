/**
 * Per-trace timing summary formatted as a fixed-width text table
 * (mean / max / min / std of the per-step milliseconds).
 */

import { TraceFile } from "./trace.js";
import { summarize, Summary } from "./stats.js";

export function formatMs(v: number): string {
  return v.toFixed(2);
}

export function timingRows(traces: TraceFile[]): Array<{ label: string; s: Summary }> {
  return traces.map((tr) => ({ label: tr.label, s: summarize(tr.stepMs) }));
}

export function renderTimingTable(traces: TraceFile[]): string {
  const rows = timingRows(traces);
  const labelWidth = Math.max(6, ...rows.map((r) => r.label.length));
  const pad = (s: string, w: number) => s.padStart(w);
  const header =
    "trace".padEnd(labelWidth) +
    pad("mean (ms)", 12) +
    pad("max (ms)", 12) +
    pad("min (ms)", 12) +
    pad("std", 10);
  const sep = "-".repeat(header.length);
  const lines = [header, sep];
  for (const { label, s } of rows) {
    lines.push(
      label.padEnd(labelWidth) +
        pad(formatMs(s.mean), 12) +
        pad(formatMs(s.max), 12) +
        pad(formatMs(s.min), 12) +
        pad(formatMs(s.std), 10)
    );
  }
  return lines.join("\n") + "\n";
}
