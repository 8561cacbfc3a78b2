"""Per-node label counts and the variance-based distributedness factor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .model import ClusterState, ModelError, ScopedLabel


class VarianceConvention(str, Enum):
    POPULATION = "population"  # divide by n
    SAMPLE = "sample"  # divide by n - 1

    def __str__(self) -> str:
        return self.value


DEFAULT_CONVENTION = VarianceConvention.SAMPLE


def variance(values: Sequence[float], convention=DEFAULT_CONVENTION) -> float:
    """Variance of ``values`` under the given divisor convention.

    The sum of squared deviations is evaluated exactly (integers, or
    ``Fraction`` for non-integer input) and rounded once, so the result is the
    float closest to the true variance. Equal inputs give exactly 0.0.
    """
    convention = VarianceConvention(convention)
    n = len(values)
    if n == 0:
        raise ModelError("variance of an empty list is undefined")
    if convention is VarianceConvention.SAMPLE and n < 2:
        raise ModelError("sample variance needs at least two values")
    divisor = n - 1 if convention is VarianceConvention.SAMPLE else n

    if all(isinstance(v, int) for v in values):
        total = sum(values)
        # n * sum((x - mean)^2) == n * sum(x^2) - (sum x)^2
        scaled = n * sum(v * v for v in values) - total * total
        return scaled / (n * divisor)

    if any(not math.isfinite(v) for v in values):
        raise ModelError("variance requires finite values")
    exact = [Fraction(v) for v in values]
    mean = sum(exact) / n
    ss = sum((x - mean) ** 2 for x in exact)
    return float(ss / divisor)


@dataclass(frozen=True)
class LabelCountVector:
    scoped_label: ScopedLabel
    counts: tuple

    @property
    def total(self) -> int:
        return sum(self.counts)


def label_counts(state: ClusterState) -> dict[str, list[int]]:
    """Count vectors for every scoped label carried by an assigned pod.

    Keys are rendered scoped labels, sorted. Matching is on the rendered string.
    """
    index = state.node_index
    n = len(index)
    out: dict[str, list[int]] = {}
    for pod_id, node_id in state.assignment.items():
        pod = state.pods[pod_id]
        for scoped in pod.scoped_labels():
            key = scoped.render()
            if key not in out:
                out[key] = [0] * n
            out[key][index[node_id]] += 1
    return dict(sorted(out.items()))


def count_vector(state: ClusterState, scoped: ScopedLabel) -> LabelCountVector:
    key = scoped.render()
    counts = [0] * len(state.nodes)
    index = state.node_index
    for pod_id, node_id in state.assignment.items():
        pod = state.pods[pod_id]
        if any(s.render() == key for s in pod.scoped_labels()):
            counts[index[node_id]] += 1
    return LabelCountVector(scoped, tuple(counts))


def distributedness_factor(
    state: ClusterState, scoped: ScopedLabel, convention=DEFAULT_CONVENTION
) -> float:
    if not state.nodes:
        raise ModelError("distributedness needs at least one node")
    return variance(list(count_vector(state, scoped).counts), convention)


@dataclass(frozen=True)
class ReportEntry:
    counts: LabelCountVector
    factor: float


@dataclass(frozen=True)
class DistributednessReport:
    convention: VarianceConvention
    node_ids: tuple
    entries: dict  # rendered label -> ReportEntry, lexicographic order

    @property
    def total(self) -> float:
        return math.fsum(e.factor for e in self.entries.values())

    def factors(self) -> dict[str, float]:
        return {k: e.factor for k, e in self.entries.items()}

    def to_dict(self) -> dict:
        return {
            "convention": self.convention.value,
            "labels": {
                k: {"counts": list(e.counts.counts), "factor": e.factor}
                for k, e in self.entries.items()
            },
        }

    def to_table(self) -> str:
        if not self.entries:
            return f"(no labelled pods assigned; convention={self.convention.value})"
        width = max(len("label"), *(len(k) for k in self.entries))
        lines = [
            f"{'label':<{width}}  {'factor':>12}  counts ({', '.join(self.node_ids)})",
            f"{'-' * width}  {'-' * 12}  {'-' * 6}",
        ]
        for key, entry in self.entries.items():
            counts = " ".join(str(c) for c in entry.counts.counts)
            lines.append(f"{key:<{width}}  {entry.factor:>12.6g}  {counts}")
        lines.append(f"{'total':<{width}}  {self.total:>12.6g}")
        lines.append(f"convention: {self.convention.value}")
        return "\n".join(lines)


def _scoped_by_render(state: ClusterState) -> dict[str, ScopedLabel]:
    found: dict[str, ScopedLabel] = {}
    for pod in state.assigned_pods():
        for scoped in pod.scoped_labels():
            found.setdefault(scoped.render(), scoped)
    return found


def cluster_report(state: ClusterState, convention=DEFAULT_CONVENTION) -> DistributednessReport:
    convention = VarianceConvention(convention)
    scoped = _scoped_by_render(state)
    entries = {}
    for key, counts in label_counts(state).items():
        entries[key] = ReportEntry(
            LabelCountVector(scoped[key], tuple(counts)),
            variance(counts, convention),
        )
    return DistributednessReport(convention, state.node_ids, entries)


def total_from_counts(counts: dict[str, list[int]], convention=DEFAULT_CONVENTION) -> float:
    """Sum of per-label variances, iterated in sorted label order."""
    return math.fsum(variance(counts[k], convention) for k in sorted(counts))
