/** Plain summary statistics; the renderer does no other numerics. */

export interface Summary {
  mean: number;
  max: number;
  min: number;
  std: number;
}

export function summarize(values: number[]): Summary {
  if (values.length === 0) {
    throw new Error("cannot summarize an empty series");
  }
  const mean = values.reduce((a, b) => a + b, 0) / values.length;
  const max = Math.max(...values);
  const min = Math.min(...values);
  const variance = values.reduce((a, b) => a + (b - mean) * (b - mean), 0) / values.length;
  return { mean, max, min, std: Math.sqrt(variance) };
}
