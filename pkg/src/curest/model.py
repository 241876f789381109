"""Data model for current-status cure samples.

The event time of a subject is never observed directly.  Each record carries
an inspection time ``y`` and the indicator ``delta`` of whether the event had
already happened by ``y``.  A cured subject never experiences the event, so
its indicator is 0 at every inspection time; the cure fraction ``p`` is the
quantity the rest of the package estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class CsvFormatError(ValueError):
    """Raised when a dataset file does not match the expected layout."""


@dataclass(frozen=True)
class Exponential:
    """Exponential distribution with the given rate on [0, inf)."""

    rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"rate must be positive and finite, got {self.rate!r}")

    @property
    def tau(self) -> float:
        """Right endpoint of the support."""
        return math.inf

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        out = -np.expm1(-self.rate * np.maximum(t, 0.0))
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)):
            raise ValueError("quantile argument must lie in [0, 1]")
        with np.errstate(divide="ignore"):
            out = -np.log1p(-u) / self.rate
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TabulatedQuantile:
    """Distribution given by a piecewise-linear quantile table.

    ``probs`` must rise from 0 to 1 and ``values`` must be finite and
    nondecreasing.  A flat run of values encodes a point mass; the cdf is the
    right-continuous generalized inverse of the table, so a point mass maps
    to the top of its probability interval.
    """

    probs: tuple
    values: tuple

    def __post_init__(self) -> None:
        probs = tuple(float(u) for u in self.probs)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "values", values)
        if len(probs) != len(values) or len(probs) < 2:
            raise ValueError("probs and values must have equal length >= 2")
        if probs[0] != 0.0 or probs[-1] != 1.0:
            raise ValueError("probs must start at 0 and end at 1")
        if any(a > b for a, b in zip(probs, probs[1:])):
            raise ValueError("probs must be nondecreasing")
        if any(not math.isfinite(v) for v in values):
            raise ValueError("values must be finite")
        if any(a > b for a, b in zip(values, values[1:])):
            raise ValueError("values must be nondecreasing")

    @classmethod
    def point_mass(cls, value: float) -> "TabulatedQuantile":
        """Degenerate distribution putting all mass at ``value``."""
        return cls((0.0, 1.0), (value, value))

    @property
    def tau(self) -> float:
        return self.values[-1]

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)):
            raise ValueError("quantile argument must lie in [0, 1]")
        out = np.interp(u, np.asarray(self.probs), np.asarray(self.values))
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        v = np.asarray(self.values)
        q = np.asarray(self.probs)
        # searchsorted(right) puts t after any flat run of equal values, so a
        # point mass jumps to the top of its probability interval.
        j = np.searchsorted(v, t, side="right")
        out = np.where(j == 0, 0.0, 1.0)
        mid = (j > 0) & (j < v.size)
        jm = j[mid]
        lo_v, hi_v = v[jm - 1], v[jm]
        lo_q, hi_q = q[jm - 1], q[jm]
        span = hi_v - lo_v
        frac = np.where(span > 0, (t[mid] - lo_v) / np.where(span > 0, span, 1.0), 0.0)
        out[mid] = lo_q + frac * (hi_q - lo_q)
        return float(out[0]) if scalar else out


DistSpec = Union[Exponential, TabulatedQuantile]


@dataclass(frozen=True)
class MixtureSpec:
    """Sampling design: cure fraction plus event and inspection laws.

    With probability ``p`` a subject is cured (event time +inf); otherwise
    the event time follows ``event``.  Inspection times follow
    ``inspection`` independently.  ``kg_alpha`` optionally asserts the
    proportional-tails relation 1 - F(t) = (1 - G(t))**alpha between the two
    laws; it is validated metadata, not a sampling input.
    """

    p: float
    event: DistSpec
    inspection: DistSpec
    kg_alpha: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and 0.0 <= self.p <= 1.0):
            raise ValueError(f"cure fraction p must lie in [0, 1], got {self.p!r}")
        if self.kg_alpha is not None:
            a = self.kg_alpha
            if not (math.isfinite(a) and a > 0):
                raise ValueError("kg_alpha must be positive and finite")
            u = np.linspace(0.05, 0.95, 19)
            t = np.asarray(self.inspection.quantile(u), dtype=float)
            lhs = 1.0 - np.asarray(self.event.cdf(t), dtype=float)
            rhs = (1.0 - np.asarray(self.inspection.cdf(t), dtype=float)) ** a
            if float(np.max(np.abs(lhs - rhs))) > 1e-10:
                raise ValueError(
                    "kg_alpha does not satisfy 1 - F = (1 - G)**alpha on the check grid"
                )


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CurrentStatusSample:
    """Observed records: delta[i] = 1 when the event preceded inspection y[i]."""

    delta: np.ndarray
    y: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        delta = np.array(self.delta, dtype=np.int8, copy=True)
        y = np.array(self.y, dtype=float, copy=True)
        if delta.ndim != 1 or y.shape != delta.shape:
            raise ValueError("delta and y must be 1-d arrays of equal length")
        if delta.size == 0:
            raise ValueError("empty sample")
        if not np.all((delta == 0) | (delta == 1)):
            raise ValueError("delta entries must be 0 or 1")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ValueError("inspection times must be finite and nonnegative")
        object.__setattr__(self, "delta", _freeze(delta))
        object.__setattr__(self, "y", _freeze(y))

    @property
    def n(self) -> int:
        return self.delta.size


@dataclass(frozen=True)
class SortedSample:
    """Sample sorted by inspection time, indicators carried along.

    ``group_start`` holds the 0-based position opening each run of tied
    inspection times.  Downstream statistics are evaluated once per distinct
    threshold, so tied observations always land on the same side of any
    cut-off.
    """

    y: np.ndarray
    delta: np.ndarray
    group_start: np.ndarray

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=float, copy=True)
        delta = np.array(self.delta, dtype=np.int8, copy=True)
        gs = np.array(self.group_start, dtype=np.int64, copy=True)
        if y.ndim != 1 or delta.shape != y.shape or y.size == 0:
            raise ValueError("y and delta must be 1-d arrays of equal nonzero length")
        if np.any(np.diff(y) < 0):
            raise ValueError("y must be sorted ascending")
        if gs.size == 0 or gs[0] != 0 or np.any(np.diff(gs) <= 0) or gs[-1] >= y.size:
            raise ValueError("group_start must begin at 0 and increase within range")
        object.__setattr__(self, "y", _freeze(y))
        object.__setattr__(self, "delta", _freeze(delta))
        object.__setattr__(self, "group_start", _freeze(gs))

    @property
    def n(self) -> int:
        return self.y.size


def simulate(spec: MixtureSpec, n: int, seed: int) -> CurrentStatusSample:
    """Draw ``n`` current-status records.

    The generator consumes three blocks of ``n`` uniforms in a fixed order
    (cure mark, event time, inspection time), so the stream layout is
    documented and a seed reproduces the sample exactly.  The event-time
    uniform is consumed even for cured subjects to keep the layout fixed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    u_cure = rng.random(n)
    u_event = rng.random(n)
    u_inspect = rng.random(n)
    event_time = np.asarray(spec.event.quantile(u_event), dtype=float)
    event_time = np.where(u_cure < spec.p, np.inf, event_time)
    y = np.asarray(spec.inspection.quantile(u_inspect), dtype=float)
    delta = (event_time <= y).astype(np.int8)
    return CurrentStatusSample(delta=delta, y=y, seed=seed)


def sort_with_concomitants(sample: CurrentStatusSample) -> SortedSample:
    """Stable sort by inspection time, keeping each indicator with its y."""
    order = np.argsort(sample.y, kind="stable")
    y = sample.y[order]
    delta = sample.delta[order]
    new_group = np.empty(y.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = y[1:] != y[:-1]
    return SortedSample(y=y, delta=delta, group_start=np.flatnonzero(new_group))


def write_csv(sample: CurrentStatusSample, path) -> None:
    """Write ``delta,y`` rows; y carries 17 significant digits so the file
    round-trips float64 exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("delta,y\n")
        for d, t in zip(sample.delta, sample.y):
            fh.write(f"{int(d)},{t:.17g}\n")


def read_csv(path) -> CurrentStatusSample:
    """Parse a ``delta,y`` file, reporting the line number of any bad row."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or [c.strip() for c in lines[0].split(",")] != ["delta", "y"]:
        raise CsvFormatError(f"{path}: line 1: expected header 'delta,y'")
    deltas: list[int] = []
    ys: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise CsvFormatError(f"{path}: line {lineno}: expected two comma-separated fields")
        d_raw, y_raw = parts[0].strip(), parts[1].strip()
        if d_raw not in ("0", "1"):
            raise CsvFormatError(f"{path}: line {lineno}: delta must be 0 or 1, got {d_raw!r}")
        try:
            t = float(y_raw)
        except ValueError:
            raise CsvFormatError(
                f"{path}: line {lineno}: bad inspection time {y_raw!r}"
            ) from None
        if not math.isfinite(t) or t < 0:
            raise CsvFormatError(
                f"{path}: line {lineno}: inspection time must be finite and nonnegative"
            )
        deltas.append(int(d_raw))
        ys.append(t)
    if not deltas:
        raise CsvFormatError(f"{path}: empty sample")
    return CurrentStatusSample(delta=np.asarray(deltas, dtype=np.int8), y=np.asarray(ys))
