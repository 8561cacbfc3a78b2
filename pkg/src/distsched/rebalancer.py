"""Greedy single-pod relocation that lowers total distributedness.

Plans are dry runs; :func:`apply_plan` turns one into a new state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .distributedness import (
    DEFAULT_CONVENTION,
    VarianceConvention,
    label_counts,
    total_from_counts,
)
from .model import ClusterState, ModelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RebalanceConfig:
    max_moves: int = 1000
    max_passes: int = 100
    min_improvement: float = 1e-9

    def __post_init__(self):
        if self.max_moves < 1:
            raise ModelError("max_moves must be positive")
        if self.max_passes < 1:
            raise ModelError("max_passes must be positive")
        if self.min_improvement < 0:
            raise ModelError("min_improvement must be non-negative")


@dataclass(frozen=True)
class Move:
    pod_id: str
    from_node: str
    to_node: str
    total_before: float
    total_after: float

    def to_dict(self) -> dict:
        return {
            "pod": self.pod_id,
            "from": self.from_node,
            "to": self.to_node,
            "total_before": self.total_before,
            "total_after": self.total_after,
        }


@dataclass(frozen=True)
class RebalancePlan:
    moves: tuple
    initial_total: float
    final_total: float
    passes: int = 0
    # "converged", "max_moves" or "max_passes"
    stopped: str = "converged"
    state_fingerprint: Optional[str] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "initial_total": self.initial_total,
            "final_total": self.final_total,
            "moves": [m.to_dict() for m in self.moves],
        }

    def to_table(self) -> str:
        lines = [f"initial total {self.initial_total:.6g}, final total {self.final_total:.6g}"]
        for i, m in enumerate(self.moves, 1):
            lines.append(
                f"{i:>4}. {m.pod_id}: {m.from_node} -> {m.to_node}  "
                f"({m.total_before:.6g} -> {m.total_after:.6g})"
            )
        if not self.moves:
            lines.append("no moves")
        return "\n".join(lines)


def total_distributedness(state: ClusterState, convention=DEFAULT_CONVENTION) -> float:
    """Sum of the distributedness factor over every scoped label in use."""
    return total_from_counts(label_counts(state), VarianceConvention(convention))


class _Tracker:
    """Mutable count vectors and loads for fast what-if evaluation."""

    def __init__(self, state: ClusterState, convention: VarianceConvention):
        self.state = state
        self.convention = convention
        self.index = state.node_index
        self.counts = label_counts(state)
        self.where = dict(state.assignment)
        self.load = {nid: state.pod_count(nid) for nid in state.node_ids}
        self.keys = {p.id: [s.render() for s in p.scoped_labels()] for p in state.pods.values()}

    def total(self) -> float:
        return total_from_counts(self.counts, self.convention)

    def move(self, pod_id: str, to_node: str) -> None:
        src = self.where[pod_id]
        for key in self.keys[pod_id]:
            vec = self.counts[key]
            vec[self.index[src]] -= 1
            vec[self.index[to_node]] += 1
        self.load[src] -= 1
        self.load[to_node] += 1
        self.where[pod_id] = to_node

    def fits(self, pod_id: str, node_id: str) -> bool:
        if self.where[pod_id] == node_id:
            return True
        cap = self.state.node(node_id).capacity
        return cap is None or self.load[node_id] < cap

    def contribution(self, pod_id: str) -> float:
        # How far above the per-label mean the pod's current node sits.
        i = self.index[self.where[pod_id]]
        n = len(self.index)
        return sum(
            self.counts[key][i] - sum(self.counts[key]) / n for key in self.keys[pod_id]
        )


def rebalance(
    state: ClusterState,
    config: RebalanceConfig = RebalanceConfig(),
    convention=DEFAULT_CONVENTION,
) -> RebalancePlan:
    """Hill-climb by relocating one pod at a time.

    Each pass visits movable assigned pods, highest contribution first (ties by
    pod id). A visited pod is tried on every feasible node, its current one
    included, and the best relocation is kept if it lowers the total by more
    than ``config.min_improvement``. Stops after a pass with no accepted move
    or when a limit is reached.
    """
    convention = VarianceConvention(convention)
    tracker = _Tracker(state, convention)
    initial = current = tracker.total()
    moves: list[Move] = []
    passes = 0
    stopped = "converged"

    while True:
        if passes >= config.max_passes:
            stopped = "max_passes"
            break
        passes += 1
        order = sorted(
            (p for p in tracker.where if state.pods[p].movable),
            key=lambda p: (-tracker.contribution(p), p),
        )
        accepted = 0
        for pod_id in order:
            if len(moves) >= config.max_moves:
                break
            src = tracker.where[pod_id]
            best_node, best_total = src, current
            for node_id in state.node_ids:
                if node_id == src or not tracker.fits(pod_id, node_id):
                    continue
                tracker.move(pod_id, node_id)
                candidate = tracker.total()
                tracker.move(pod_id, src)
                if candidate < best_total or (
                    candidate == best_total
                    and best_node != src
                    and (tracker.load[node_id], node_id) < (tracker.load[best_node], best_node)
                ):
                    best_node, best_total = node_id, candidate
            if best_node != src and best_total < current - config.min_improvement:
                tracker.move(pod_id, best_node)
                moves.append(Move(pod_id, src, best_node, current, best_total))
                logger.debug("move %s %s -> %s (%.6g -> %.6g)", pod_id, src, best_node, current, best_total)
                current = best_total
                accepted += 1
        if len(moves) >= config.max_moves:
            stopped = "max_moves"
            break
        if accepted == 0:
            break

    return RebalancePlan(tuple(moves), initial, current, passes, stopped, state.fingerprint)


def apply_plan(state: ClusterState, plan: RebalancePlan) -> ClusterState:
    """Replay ``plan`` move by move, checking each recorded source node."""
    assignment = dict(state.assignment)
    for move in plan.moves:
        actual = assignment.get(move.pod_id)
        if actual != move.from_node:
            raise ModelError(
                f"plan moves {move.pod_id!r} from {move.from_node}, but it is on {actual}"
            )
        assignment[move.pod_id] = move.to_node
    return ClusterState(state.nodes, state.pods, assignment)
