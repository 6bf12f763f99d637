"""Equi-width histograms and nearest-rank percentiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

DEFAULT_BUCKETS = 10


@dataclass(frozen=True)
class Histogram:
    bucket_count: int
    lo: float
    hi: float
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.counts.setflags(write=False)

    @property
    def width(self) -> float:
        if self.hi == self.lo:
            return 1.0  # degenerate range: everything lives in bucket 0
        return (self.hi - self.lo) / self.bucket_count

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def equi_width_histogram(values, bucket_count: int = DEFAULT_BUCKETS) -> Histogram:
    """Histogram over [min, max] with equal-width buckets.

    Value v lands in bucket floor((v - lo) / width); v = hi goes to the last
    bucket. A degenerate range (all values equal) puts everything in bucket 0.
    """
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        raise ValidationError("cannot build a histogram from no values")
    if bucket_count < 1:
        raise ValidationError("bucket_count must be >= 1")
    lo = float(data.min())
    hi = float(data.max())
    counts = np.zeros(bucket_count, dtype=np.int64)
    if hi == lo:
        counts[0] = data.size
        return Histogram(bucket_count, lo, hi, counts)
    width = (hi - lo) / bucket_count
    idx = np.floor((data - lo) / width).astype(np.int64)
    np.clip(idx, 0, bucket_count - 1, out=idx)
    np.add.at(counts, idx, 1)
    return Histogram(bucket_count, lo, hi, counts)


def percentile(values, q: float) -> float:
    """Nearest-rank percentile: the ceil(q/100 * n)-th smallest value."""
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        raise ValidationError("cannot take a percentile of no values")
    if not 0 <= q <= 100:
        raise ValidationError(f"percentile q must be in [0, 100], got {q}")
    ordered = np.sort(data)
    rank = int(np.ceil(q / 100.0 * data.size))
    rank = max(rank, 1)
    return float(ordered[rank - 1])
