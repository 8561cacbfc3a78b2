"""Derive usage labels from historical usage series.

Magnitude comes from mean (or peak) usage as a fraction of capacity. Pattern
is a heuristic of our own: a low coefficient of variation means "always", a
steep least-squares trend means "gradual", anything else is a "spike".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Mapping, Sequence, Union

from .model import Magnitude, ModelError, Pattern, ResourceKind, UsageLabel

Timestamp = Union[float, int, datetime]


class LabelerError(ModelError):
    pass


class InsufficientDataError(LabelerError):
    pass


class UnclassifiableError(LabelerError):
    pass


def _seconds(ts: Timestamp) -> float:
    if isinstance(ts, datetime):
        return ts.timestamp()
    return float(ts)


@dataclass(frozen=True)
class UsageSeries:
    resource: ResourceKind
    samples: tuple  # ((timestamp, value), ...)
    capacity: float

    def __post_init__(self):
        object.__setattr__(self, "resource", ResourceKind(self.resource))
        samples = tuple((ts, float(v)) for ts, v in self.samples)
        object.__setattr__(self, "samples", samples)
        if not (self.capacity > 0) or not math.isfinite(self.capacity):
            raise LabelerError(f"{self.resource.value}: capacity must be positive")
        prev = None
        for ts, value in samples:
            if not (value >= 0) or not math.isfinite(value):
                raise LabelerError(f"{self.resource.value}: usage values must be non-negative")
            t = _seconds(ts)
            if prev is not None and t < prev:
                raise LabelerError(f"{self.resource.value}: timestamps must be non-decreasing")
            prev = t

    @classmethod
    def uniform(cls, resource, values: Sequence[float], capacity: float, step: float = 60.0):
        """Series sampled every ``step`` seconds starting at t=0."""
        return cls(resource, tuple((i * step, v) for i, v in enumerate(values)), capacity)

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.samples]

    @property
    def times(self) -> list[float]:
        return [_seconds(ts) for ts, _ in self.samples]


@dataclass(frozen=True)
class LabelerConfig:
    magnitude_mode: str = "mean"
    low_cutoff: float = 0.33
    high_cutoff: float = 0.66
    cv_always_max: float = 0.15
    slope_gradual_min: float = 0.30

    def __post_init__(self):
        if self.magnitude_mode not in ("mean", "peak"):
            raise LabelerError(f"magnitude_mode must be 'mean' or 'peak', not {self.magnitude_mode!r}")
        if not (0 < self.low_cutoff < 1 and 0 < self.high_cutoff < 1):
            raise LabelerError("cutoffs must lie in (0, 1)")
        if not self.low_cutoff < self.high_cutoff:
            raise LabelerError("low_cutoff must be below high_cutoff")
        if self.cv_always_max < 0 or self.slope_gradual_min < 0:
            raise LabelerError("cv_always_max and slope_gradual_min must be non-negative")


def _require(series: UsageSeries) -> None:
    if len(series.samples) < 2:
        raise InsufficientDataError(
            f"{series.resource.value}: need at least 2 samples, got {len(series.samples)}"
        )


def utilisation(series: UsageSeries, mode: str = "mean") -> float:
    values = series.values
    level = math.fsum(values) / len(values) if mode == "mean" else max(values)
    return level / series.capacity


def classify_magnitude(series: UsageSeries, config: LabelerConfig = LabelerConfig()) -> Magnitude:
    _require(series)
    u = utilisation(series, config.magnitude_mode)
    if u < config.low_cutoff:
        return Magnitude.LOW
    if u < config.high_cutoff:
        return Magnitude.MEDIUM
    return Magnitude.HIGH


def coefficient_of_variation(values: Sequence[float]) -> float:
    """Population standard deviation over mean."""
    n = len(values)
    mean = math.fsum(values) / n
    if mean <= 0:
        raise UnclassifiableError("all-zero series has no coefficient of variation")
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return math.sqrt(var) / mean


def normalised_slope(series: UsageSeries) -> float:
    """Least-squares slope of value/capacity against time rescaled to [0, 1].

    Real timestamp spacing is honoured; if every sample shares one timestamp
    the sample positions are used instead.
    """
    times = series.times
    span = times[-1] - times[0]
    n = len(times)
    if span > 0:
        xs = [(t - times[0]) / span for t in times]
    else:
        xs = [i / (n - 1) for i in range(n)]
    ys = [v / series.capacity for v in series.values]
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


def classify_pattern(series: UsageSeries, config: LabelerConfig = LabelerConfig()) -> Pattern:
    _require(series)
    cv = coefficient_of_variation(series.values)
    if cv <= config.cv_always_max:
        return Pattern.ALWAYS
    if abs(normalised_slope(series)) >= config.slope_gradual_min:
        return Pattern.GRADUAL
    return Pattern.SPIKE


def derive_labels(
    usage: Mapping[ResourceKind, UsageSeries], config: LabelerConfig = LabelerConfig()
) -> frozenset:
    labels = set()
    for resource, series in usage.items():
        resource = ResourceKind(resource)
        try:
            magnitude = classify_magnitude(series, config)
            pattern = classify_pattern(series, config)
        except LabelerError as exc:
            err = type(exc)(f"[{resource.value}] {exc}")
            err.resource = resource
            raise err from exc
        labels.add(UsageLabel(resource, magnitude, pattern))
    return frozenset(labels)
