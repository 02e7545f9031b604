/** Pure chart geometry for the signal plots.
 *
 * Everything here maps API payloads to SVG coordinates; nothing recomputes
 * detection results. Anomaly shading comes only from the `flagged_days` lists
 * the server delivered, and missing observations (nulls) break the line into
 * gaps rather than being interpolated.
 */

export interface Scale {
  (value: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (value: number) => r0 + ((value - d0) / span) * (r1 - r0);
}

/** Extent of the finite values across several series (nulls skipped). */
export function valueExtent(series: (number | null)[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const values of series) {
    for (const v of values) {
      if (v === null || !isFinite(v)) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo > hi) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

/** SVG path for a day-indexed line; null values produce gaps, never segments. */
export function linePath(values: (number | null)[], sx: Scale, sy: Scale): string {
  const parts: string[] = [];
  let pen = false;
  values.forEach((v, i) => {
    if (v === null || !isFinite(v)) {
      pen = false;
      return;
    }
    parts.push(`${pen ? 'L' : 'M'}${sx(i).toFixed(2)},${sy(v).toFixed(2)}`);
    pen = true;
  });
  return parts.join(' ');
}

/** Closed band polygon(s) between lower and upper, one per contiguous run. */
export function bandPath(
  lower: (number | null)[],
  upper: (number | null)[],
  sx: Scale,
  sy: Scale,
): string {
  const paths: string[] = [];
  let run: number[] = [];
  const flush = () => {
    if (run.length < 2) {
      run = [];
      return;
    }
    const top = run.map((i) => `${sx(i).toFixed(2)},${sy(upper[i] as number).toFixed(2)}`);
    const bottom = [...run]
      .reverse()
      .map((i) => `${sx(i).toFixed(2)},${sy(lower[i] as number).toFixed(2)}`);
    paths.push(`M${top.join(' L')} L${bottom.join(' L')} Z`);
    run = [];
  };
  lower.forEach((lo, i) => {
    const hi = upper[i];
    if (lo === null || hi === null || !isFinite(lo) || !isFinite(hi)) flush();
    else run.push(i);
  });
  flush();
  return paths.join(' ');
}

export interface ShadingInterval {
  /** inclusive date-index run */
  fromIndex: number;
  toIndex: number;
  fromDate: string;
  toDate: string;
}

/** Contiguous runs of server-flagged days, resolved against the date axis.
 * The result covers exactly the delivered `flaggedDays` — nothing more. */
export function flaggedIntervals(dates: string[], flaggedDays: string[]): ShadingInterval[] {
  const indexOf = new Map(dates.map((d, i) => [d, i]));
  const indices = flaggedDays
    .map((d) => indexOf.get(d))
    .filter((i): i is number => i !== undefined)
    .sort((a, b) => a - b);
  const intervals: ShadingInterval[] = [];
  for (const i of indices) {
    const last = intervals[intervals.length - 1];
    if (last && i === last.toIndex + 1) {
      last.toIndex = i;
      last.toDate = dates[i];
    } else {
      intervals.push({ fromIndex: i, toIndex: i, fromDate: dates[i], toDate: dates[i] });
    }
  }
  return intervals;
}

/** Dates covered by a set of shading intervals (for round-trip checks). */
export function intervalDays(dates: string[], intervals: ShadingInterval[]): string[] {
  const out: string[] = [];
  for (const interval of intervals) {
    for (let i = interval.fromIndex; i <= interval.toIndex; i++) out.push(dates[i]);
  }
  return out;
}

export interface Rect {
  x: number;
  width: number;
}

/** Pixel rectangle for a day-index interval; each day owns a full cell. */
export function intervalRect(interval: ShadingInterval, sx: Scale): Rect {
  const left = sx(interval.fromIndex - 0.5);
  const right = sx(interval.toIndex + 0.5);
  return { x: left, width: right - left };
}

/** Nearest day index for a pointer x position (hover lookups). */
export function nearestIndex(px: number, nDays: number, sx: Scale): number {
  let best = 0;
  let bestDist = Infinity;
  for (let i = 0; i < nDays; i++) {
    const dist = Math.abs(sx(i) - px);
    if (dist < bestDist) {
      bestDist = dist;
      best = i;
    }
  }
  return best;
}
