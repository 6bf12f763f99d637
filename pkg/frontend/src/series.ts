// API responses -> chart series. Pure reshaping: every number in a series
// is copied from a response field (the percentile lines are evaluated from
// the server's slope/intercept pairs for plotting only). The contract tests
// pin these mappings against recorded API fixtures.

import type {
  AnomaliesResponse,
  Bucket,
  CompareResponse,
  ForecastResponse,
  PercentileLines,
  ProfileResponse,
  SegmentsResponse,
} from "./types.js";

export interface XYSeries {
  label: string;
  x: (number | string)[];
  y: (number | null)[];
}

export interface BarSeries {
  label: string;
  labels: string[];
  values: number[];
}

export interface ScatterPoint {
  x: number;
  y: number;
  cluster: number;
  id: string;
}

export function bucketSeries(label: string, buckets: Bucket[]): XYSeries {
  return {
    label,
    x: buckets.map((b) => b.start),
    y: buckets.map((b) => b.value),
  };
}

export function consumptionSeries(compare: CompareResponse): XYSeries[] {
  return [
    bucketSeries(`${compare.meter_id} (${compare.granularity})`, compare.self),
    bucketSeries("neighborhood avg", compare.neighborhood_avg),
  ];
}

export function histogramBars(profile: ProfileResponse): BarSeries {
  const { lo, hi, counts, bucket_count } = profile.histogram;
  const width = hi > lo ? (hi - lo) / bucket_count : 1;
  const labels = counts.map((_, i) => `${(lo + i * width).toFixed(2)}+`);
  return { label: "hourly kWh distribution", labels, values: counts.slice() };
}

export function dailyProfileSeries(profile: ProfileResponse): XYSeries[] {
  const hours = Array.from({ length: 24 }, (_, h) => h);
  const out: XYSeries[] = [];
  const { weekday, weekend } = profile.daily_profile;
  if (weekday) out.push({ label: "weekday", x: hours, y: weekday.slice() });
  if (weekend) out.push({ label: "weekend", x: hours, y: weekend.slice() });
  return out;
}

export function disaggregationSeries(profile: ProfileResponse): XYSeries[] {
  const disagg = profile.disaggregation;
  if (!disagg) return [];
  const hours = disagg.total.map((_, i) => i);
  return [
    { label: "total", x: hours, y: disagg.total.slice() },
    { label: "activity load", x: hours, y: disagg.temp_independent.slice() },
    { label: "temperature load", x: hours, y: disagg.temp_dependent.slice() },
  ];
}

// Evaluate the server's fitted percentile pieces over their temperature
// ranges so the thermal view can draw them.
export function thermalLines(profile: ProfileResponse): XYSeries[] {
  const { p90, p10, temp_lo, temp_hi } = profile.three_line;
  return [
    ...familyLines("p90", p90, temp_lo, temp_hi),
    ...familyLines("p10", p10, temp_lo, temp_hi),
  ];
}

function familyLines(
  name: string,
  family: PercentileLines,
  lo: number,
  hi: number,
): XYSeries[] {
  const ranges: [string, keyof PercentileLines, number, number][] = [
    ["low", "low", lo, Math.min(16, hi)],
    ["mid", "mid", Math.max(16, lo), Math.min(20, hi)],
    ["high", "high", Math.max(20, lo), hi],
  ];
  const out: XYSeries[] = [];
  for (const [label, key, a, b] of ranges) {
    const piece = family[key];
    if (!piece || a > b) continue;
    out.push({
      label: `${name} ${label}`,
      x: [a, b],
      y: [piece.slope * a + piece.intercept, piece.slope * b + piece.intercept],
    });
  }
  return out;
}

export function forecastSeries(forecast: ForecastResponse): XYSeries {
  return {
    label: `${forecast.method} forecast`,
    x: forecast.values.map((_, i) => i),
    y: forecast.values.slice(),
  };
}

export function segmentScatter(
  segments: SegmentsResponse,
  xFeature: string,
  yFeature: string,
  featuresByMeter: Record<string, Record<string, number>>,
): ScatterPoint[] {
  const points: ScatterPoint[] = [];
  for (const [meterId, cluster] of Object.entries(segments.assignments)) {
    const features = featuresByMeter[meterId];
    if (!features) continue;
    points.push({ id: meterId, cluster, x: features[xFeature], y: features[yFeature] });
  }
  return points;
}

export function centroidScatter(
  segments: SegmentsResponse,
  xFeature: string,
  yFeature: string,
): ScatterPoint[] {
  return segments.clusters.map((c) => ({
    id: `centroid-${c.index}`,
    cluster: c.index,
    x: c.centroid[xFeature],
    y: c.centroid[yFeature],
  }));
}

export function anomalyFeedRows(feed: AnomaliesResponse): {
  day: string;
  distance: number;
  density: number | null;
  flagged: boolean;
  epsilon: number;
}[] {
  return feed.reports
    .slice()
    .sort((a, b) => (a.day < b.day ? 1 : -1))
    .map((r) => ({
      day: r.day,
      distance: r.distance,
      density: r.density,
      flagged: r.flagged,
      epsilon: r.epsilon,
    }));
}

export function flaggedDays(feed: AnomaliesResponse): string[] {
  return feed.reports.filter((r) => r.flagged).map((r) => r.day);
}
