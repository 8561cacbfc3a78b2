"""Variance-minimising placement of a single new pod.

The pod is tried on every node in turn; the node whose hypothetical state has
the lowest summed distributedness over the pod's scoped labels wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .distributedness import DEFAULT_CONVENTION, VarianceConvention, count_vector, variance
from .model import ClusterState, ModelError, PodSpec, pod_to_dict


class SchedulingError(ModelError):
    pass


class UnschedulableError(SchedulingError):
    def __init__(self, pod_id: str, reasons: dict[str, str]):
        detail = "; ".join(f"{node}: {why}" for node, why in reasons.items()) or "no nodes"
        super().__init__(f"pod {pod_id!r} is unschedulable ({detail})")
        self.pod_id = pod_id
        self.reasons = reasons


class ConflictError(SchedulingError):
    """A decision no longer matches the state it is being applied to."""


@dataclass(frozen=True)
class NodeScore:
    node_id: str
    feasible: bool
    aggregate: Optional[float] = None
    per_label: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        doc = {"node": self.node_id, "feasible": self.feasible}
        if self.feasible:
            doc["aggregate"] = self.aggregate
            doc["per_label"] = dict(self.per_label)
        else:
            doc["reason"] = self.reason
        return doc


@dataclass(frozen=True)
class PlacementDecision:
    pod: PodSpec
    chosen_node: str
    scores: tuple
    state_fingerprint: str

    @property
    def pod_id(self) -> str:
        return self.pod.id

    def to_dict(self) -> dict:
        return {
            "pod": self.pod.id,
            "chosen_node": self.chosen_node,
            "state_fingerprint": self.state_fingerprint,
            "scores": [s.to_dict() for s in self.scores],
        }

    def explain(self) -> str:
        lines = [f"pod {self.pod.id} -> {self.chosen_node}"]
        width = max(len(s.node_id) for s in self.scores)
        for s in self.scores:
            mark = "*" if s.node_id == self.chosen_node else " "
            if s.feasible:
                detail = ", ".join(f"{k}={v:.6g}" for k, v in s.per_label.items())
                lines.append(f" {mark} {s.node_id:<{width}}  {s.aggregate:>12.6g}  {detail}")
            else:
                lines.append(f" {mark} {s.node_id:<{width}}  {'infeasible':>12}  {s.reason}")
        return "\n".join(lines)


def _check_pod(state: ClusterState, pod: PodSpec) -> None:
    if pod.id in state.assignment:
        raise SchedulingError(f"pod {pod.id!r} is already assigned to {state.assignment[pod.id]}")
    if not pod.labels:
        raise SchedulingError(f"pod {pod.id!r} carries no usage labels")


def score_node(
    state: ClusterState, pod: PodSpec, node_id: str, convention=DEFAULT_CONVENTION
) -> NodeScore:
    convention = VarianceConvention(convention)
    _check_pod(state, pod)
    node = state.node(node_id)
    if not state.has_room(node_id):
        return NodeScore(
            node_id, False, reason=f"at capacity ({state.pod_count(node_id)}/{node.capacity})"
        )
    idx = state.node_index[node_id]
    per_label = {}
    for scoped in pod.scoped_labels():
        counts = list(count_vector(state, scoped).counts)
        counts[idx] += 1
        per_label[scoped.render()] = variance(counts, convention)
    return NodeScore(node_id, True, math.fsum(per_label.values()), per_label)


def _rank(state: ClusterState, score: NodeScore):
    return (score.aggregate, state.pod_count(score.node_id), score.node_id)


def place(state: ClusterState, pod: PodSpec, convention=DEFAULT_CONVENTION) -> PlacementDecision:
    """Score every node and pick the feasible one with the lowest aggregate.

    Ties go to the node with fewer assigned pods, then the smaller node id.
    Raises :class:`UnschedulableError` if no node has room.
    """
    _check_pod(state, pod)
    scores = tuple(score_node(state, pod, nid, convention) for nid in state.node_ids)
    feasible = [s for s in scores if s.feasible]
    if not feasible:
        raise UnschedulableError(pod.id, {s.node_id: s.reason for s in scores})
    best = min(feasible, key=lambda s: _rank(state, s))
    return PlacementDecision(pod, best.node_id, scores, state.fingerprint)


def apply(state: ClusterState, decision: PlacementDecision) -> ClusterState:
    if decision.pod.id in state.assignment:
        raise ConflictError(f"pod {decision.pod.id!r} is already assigned")
    if decision.state_fingerprint != state.fingerprint:
        raise ConflictError(
            f"decision for pod {decision.pod.id!r} was computed against a different state"
        )
    known = state.pods.get(decision.pod.id)
    if known is not None and pod_to_dict(known) != pod_to_dict(decision.pod):
        raise ConflictError(f"pod {decision.pod.id!r} differs from the one in the cluster")
    return state.assign(decision.pod, decision.chosen_node)
