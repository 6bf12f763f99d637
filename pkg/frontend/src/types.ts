// Response shapes of the analytics API. The dashboard renders these fields
// verbatim; it never derives numbers of its own.

export interface Bucket {
  start: string;
  value: number;
}

export interface ConsumptionResponse {
  meter_id: string;
  granularity: string;
  fn: string;
  buckets: Bucket[];
}

export interface CompareResponse {
  meter_id: string;
  granularity: string;
  self: Bucket[];
  neighborhood_avg: Bucket[];
}

export interface LinePiece {
  slope: number;
  intercept: number;
}

export interface PercentileLines {
  low: LinePiece | null;
  mid: LinePiece | null;
  high: LinePiece | null;
}

export interface ProfileResponse {
  meter_id: string;
  daily_profile: {
    weekday: number[] | null;
    weekend: number[] | null;
    n_weekdays: number;
    n_weekend_days: number;
  };
  three_line: {
    cooling_gradient: number | null;
    heating_gradient: number | null;
    base_load: number | null;
    p90: PercentileLines;
    p10: PercentileLines;
    temp_lo: number;
    temp_hi: number;
  };
  histogram: {
    bucket_count: number;
    lo: number;
    hi: number;
    counts: number[];
  };
  disaggregation: {
    start: string;
    total: number[];
    temp_independent: (number | null)[];
    temp_dependent: (number | null)[];
  } | null;
}

export interface ForecastResponse {
  meter_id: string;
  method: string;
  granularity: string;
  start: string;
  values: number[];
  warnings: string[];
}

export interface ClusterSummary {
  index: number;
  members: string[];
  centroid: Record<string, number>;
}

export interface SegmentsResponse {
  k: number;
  feature_names: string[];
  clusters: ClusterSummary[];
  assignments: Record<string, number>;
}

export interface AnomalyReport {
  meter_id: string;
  day: string;
  distance: number;
  density: number | null;
  flagged: boolean;
  epsilon: number;
  partial: boolean;
  degenerate: boolean;
}

export interface AnomaliesResponse {
  meter_id: string;
  reports: AnomalyReport[];
}

export interface ThresholdResponse {
  meter_id: string;
  epsilon: number;
  updated_at: string | null;
}

export interface MetersResponse {
  meters: string[];
}

export interface ApiError {
  code: number;
  message: string;
}
