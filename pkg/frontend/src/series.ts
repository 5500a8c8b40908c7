/** Pure series math shared by the figures. Kept free of any I/O so the
 * tests can pit these against plain-loop recomputations. */

/** Running mean: out[n] = mean(values[0..n]). */
export function cumulativeMean(values: number[]): number[] {
  const out = new Array<number>(values.length);
  let sum = 0;
  for (let i = 0; i < values.length; i++) {
    sum += values[i];
    out[i] = sum / (i + 1);
  }
  return out;
}

/** Trailing moving average with partial windows at the start: out[n] is the
 * mean of the last `window` values ending at n (fewer while n+1 < window).
 * Each window is summed afresh in ascending order, so results are exactly
 * reproducible by any straightforward reimplementation (no sliding-sum
 * rounding drift). */
export function movingAverage(values: number[], window: number): number[] {
  if (window < 1) throw new Error(`window must be >= 1, got ${window}`);
  const out = new Array<number>(values.length);
  for (let n = 0; n < values.length; n++) {
    const lo = Math.max(0, n - window + 1);
    let sum = 0;
    for (let i = lo; i <= n; i++) sum += values[i];
    out[n] = sum / (n - lo + 1);
  }
  return out;
}

/** Display conversion for sensing SINR axes; stored data stay linear. */
export function toDb(linear: number): number {
  if (linear <= 0) throw new Error(`cannot convert non-positive value ${linear} to dB`);
  return 10 * Math.log10(linear);
}

/** A CDF table is valid when both coordinates are non-decreasing and the
 * probabilities end at 1. */
export function checkCdf(values: number[], cdf: number[]): void {
  if (values.length === 0) throw new Error("empty CDF table");
  if (values.length !== cdf.length) throw new Error("CDF column length mismatch");
  for (let i = 1; i < values.length; i++) {
    if (values[i] < values[i - 1]) throw new Error(`CDF values decrease at row ${i}`);
    if (cdf[i] < cdf[i - 1]) throw new Error(`CDF probabilities decrease at row ${i}`);
  }
  if (cdf[0] <= 0 || Math.abs(cdf[cdf.length - 1] - 1) > 1e-12) {
    throw new Error("CDF probabilities must start above 0 and end at 1");
  }
}
