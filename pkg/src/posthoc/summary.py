"""Sufficient statistics (n, mean, ssd) and the self-normalized sums built from them.

Fields may hold numpy arrays instead of scalars; every formula broadcasts, which
is how the Monte Carlo code evaluates thousands of trials at once.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import DataParseError, DomainError, EmptySummaryError


@dataclass(frozen=True)
class SampleSummary:
    """Count, mean and sum of squared deviations of a sample."""

    n: int
    mean: float = 0.0
    ssd: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.n) < 0):
            raise DomainError("n must be nonnegative")
        if np.any(np.asarray(self.ssd) < 0):
            raise DomainError("ssd must be nonnegative")

    @classmethod
    def empty(cls) -> "SampleSummary":
        return cls(0, 0.0, 0.0)

    @property
    def biased_var(self):
        """ŝ² = ssd / n."""
        return self.ssd / self.n

    @property
    def unbiased_var(self):
        """σ̂² = ssd / (n - 1)."""
        return self.ssd / (self.n - 1)

    @property
    def s_hat(self):
        return np.sqrt(self.biased_var) if np.ndim(self.ssd) else math.sqrt(self.biased_var)

    @property
    def sigma_hat(self):
        return np.sqrt(self.unbiased_var) if np.ndim(self.ssd) else math.sqrt(self.unbiased_var)


@dataclass(frozen=True)
class ThetaStats:
    """S_n(θ) = Σ(X_i - θ), V_n(θ) = sqrt(Σ(X_i - θ)²) and Δ = X̄ - θ."""

    s: float
    v: float
    delta: float


def summarize(samples, axis: int = -1) -> SampleSummary:
    """Two-pass summary of ``samples``; a 2-D array gives one summary per row."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    n = x.shape[axis]
    if n == 0:
        if x.ndim == 1:
            return SampleSummary.empty()
        shape = np.delete(np.array(x.shape), axis)
        return SampleSummary(0, np.zeros(shape), np.zeros(shape))
    mean = x.mean(axis=axis)
    dev = x - np.expand_dims(mean, axis)
    ssd = np.einsum("...i,...i->...", np.moveaxis(dev, axis, -1), np.moveaxis(dev, axis, -1))
    if x.ndim == 1:
        return SampleSummary(int(n), float(mean), float(ssd))
    return SampleSummary(int(n), mean, ssd)


def update(summary: SampleSummary, x: float) -> SampleSummary:
    """Add one observation (Welford's recurrence)."""
    n = summary.n + 1
    d = x - summary.mean
    mean = summary.mean + d / n
    ssd = summary.ssd + d * (x - mean)
    return SampleSummary(n, mean, max(ssd, 0.0) if np.ndim(ssd) == 0 else np.maximum(ssd, 0.0))


def update_many(summary: SampleSummary, xs: Iterable[float]) -> SampleSummary:
    for x in xs:
        summary = update(summary, x)
    return summary


def theta_stats(summary: SampleSummary, theta) -> ThetaStats:
    if np.any(np.asarray(summary.n) == 0):
        raise EmptySummaryError("theta statistics need at least one observation")
    delta = summary.mean - theta
    s = summary.n * delta
    v2 = summary.ssd + summary.n * delta * delta
    v = np.sqrt(v2)
    if np.ndim(v) == 0:
        return ThetaStats(float(s), float(v), float(delta))
    return ThetaStats(s, v, delta)


def read_values(source: str | Path | TextIO, column: str | int | None = None) -> np.ndarray:
    """Parse newline-delimited floats, or one column of a CSV file.

    ``column`` selects a CSV column by header name or 0-based index; when it
    is None the input is read as one number per line. Blank lines and lines
    starting with ``#`` are skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_values(fh, column)
    text = source.read()
    if column is None:
        return _parse_lines(text)
    return _parse_csv_column(text, column)


def _parse_lines(text: str) -> np.ndarray:
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        values.append(_to_float(line, lineno))
    return np.asarray(values, dtype=float)


def _parse_csv_column(text: str, column: str | int) -> np.ndarray:
    rows = csv.reader(io.StringIO(text))
    idx = None
    if isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
        idx = int(column)
    values = []
    header_seen = idx is not None
    for lineno, row in enumerate(rows, start=1):
        if not row or (len(row) == 1 and not row[0].strip()) or row[0].lstrip().startswith("#"):
            continue
        if not header_seen:
            names = [c.strip() for c in row]
            if column not in names:
                raise DataParseError(f"column {column!r} not in header {names}", lineno)
            idx = names.index(column)
            header_seen = True
            continue
        if idx >= len(row):
            raise DataParseError(f"row has {len(row)} fields, column index {idx} missing", lineno)
        values.append(_to_float(row[idx].strip(), lineno))
    return np.asarray(values, dtype=float)


def _to_float(token: str, lineno: int) -> float:
    try:
        val = float(token)
    except ValueError:
        raise DataParseError(f"not a number: {token!r}", lineno) from None
    if not math.isfinite(val):
        raise DataParseError(f"non-finite value: {token!r}", lineno)
    return val
