"""Label taxonomy, pods, nodes and the cluster snapshot.

Every other module reads a :class:`ClusterState`; nothing mutates one in place.
"Changing" a state (assigning, unassigning, removing a pod) returns a new
snapshot that has already been re-validated.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Optional


class ModelError(ValueError):
    """Base class for invalid domain objects."""


class LabelParseError(ModelError):
    def __init__(self, text: str, token: str, kind: str):
        super().__init__(f"cannot parse label {text!r}: unknown {kind} {token!r}")
        self.text = text
        self.token = token
        self.kind = kind


class ValidationError(ModelError):
    """A cluster invariant is violated; ``entity`` names the offender."""

    def __init__(self, message: str, entity: Optional[str] = None):
        super().__init__(message)
        self.entity = entity


class ResourceKind(str, Enum):
    CPU = "cpu"
    MEMORY = "memory"
    NETWORK = "network"
    STORAGE = "storage"

    def __str__(self) -> str:
        return self.value


class Magnitude(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return _MAGNITUDE_RANK[self]

    def __lt__(self, other):
        if not isinstance(other, Magnitude):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, Magnitude):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other):
        if not isinstance(other, Magnitude):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other):
        if not isinstance(other, Magnitude):
            return NotImplemented
        return self.rank >= other.rank

    def __str__(self) -> str:
        return self.value


_MAGNITUDE_RANK = {Magnitude.LOW: 0, Magnitude.MEDIUM: 1, Magnitude.HIGH: 2}


class Pattern(str, Enum):
    ALWAYS = "always"
    SPIKE = "spike"
    GRADUAL = "gradual"

    def __str__(self) -> str:
        return self.value


class ScopeLevel(str, Enum):
    CLUSTER = "cluster"
    NAMESPACE = "namespace"
    APPLICATION = "application"

    def __str__(self) -> str:
        return self.value


# Kubernetes DNS-label style: lowercase alphanumerics, hyphens only inside.
_NAME_RE = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?$")


def check_name(value: str, what: str) -> str:
    if not isinstance(value, str) or not _NAME_RE.match(value):
        raise ModelError(
            f"invalid {what} {value!r}: use lowercase alphanumerics and internal hyphens"
        )
    return value


@dataclass(frozen=True, order=True)
class UsageLabel:
    resource: ResourceKind
    magnitude: Magnitude
    pattern: Pattern

    def __str__(self) -> str:
        return f"{self.resource.value}-{self.magnitude.value}-{self.pattern.value}"

    @classmethod
    def parse(cls, text: str) -> "UsageLabel":
        return parse_label(text)


def parse_label(text: str) -> UsageLabel:
    """Parse ``"<resource>-<magnitude>-<pattern>"`` into a :class:`UsageLabel`."""
    if not text:
        raise ModelError("label text is empty")
    parts = text.split("-")
    if len(parts) != 3:
        raise ModelError(
            f"cannot parse label {text!r}: expected <resource>-<magnitude>-<pattern>"
        )
    resource, magnitude, pattern = parts
    try:
        r = ResourceKind(resource)
    except ValueError:
        raise LabelParseError(text, resource, "resource") from None
    try:
        m = Magnitude(magnitude)
    except ValueError:
        raise LabelParseError(text, magnitude, "magnitude") from None
    try:
        p = Pattern(pattern)
    except ValueError:
        raise LabelParseError(text, pattern, "pattern") from None
    return UsageLabel(r, m, p)


def all_labels() -> list[UsageLabel]:
    """The full 4 x 3 x 3 taxonomy."""
    return [
        UsageLabel(r, m, p)
        for r in ResourceKind
        for p in Pattern
        for m in (Magnitude.HIGH, Magnitude.MEDIUM, Magnitude.LOW)
    ]


@dataclass(frozen=True)
class ScopedLabel:
    base: UsageLabel
    namespace: Optional[str] = None
    application: Optional[str] = None

    def __post_init__(self):
        if self.application is not None and self.namespace is None:
            raise ModelError("application-scoped label requires a namespace")
        if self.namespace is not None:
            check_name(self.namespace, "namespace")
        if self.application is not None:
            check_name(self.application, "application")

    @property
    def scope(self) -> ScopeLevel:
        if self.application is not None:
            return ScopeLevel.APPLICATION
        if self.namespace is not None:
            return ScopeLevel.NAMESPACE
        return ScopeLevel.CLUSTER

    def render(self) -> str:
        parts = [str(self.base)]
        if self.namespace is not None:
            parts.append(self.namespace)
        if self.application is not None:
            parts.append(self.application)
        return "-".join(parts)

    __str__ = render


@dataclass(frozen=True)
class PodSpec:
    id: str
    namespace: str = "default"
    application: str = "app"
    labels: frozenset = field(default_factory=frozenset)
    scope: ScopeLevel = ScopeLevel.CLUSTER
    # Pods pinned with movable=False are never relocated by the rebalancer.
    movable: bool = True

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ModelError("pod id must be a non-empty string")
        check_name(self.namespace, "namespace")
        check_name(self.application, "application")
        labels = frozenset(self.labels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "scope", ScopeLevel(self.scope))
        seen = {}
        for label in labels:
            if not isinstance(label, UsageLabel):
                raise ModelError(f"pod {self.id}: label {label!r} is not a UsageLabel")
            if label.resource in seen:
                raise ModelError(
                    f"pod {self.id}: two labels for resource {label.resource.value} "
                    f"({seen[label.resource]} and {label})"
                )
            seen[label.resource] = label

    @property
    def sorted_labels(self) -> list[UsageLabel]:
        return sorted(self.labels, key=str)

    def scoped_labels(self) -> list[ScopedLabel]:
        return [scoped_label(self, base) for base in self.sorted_labels]


def scoped_label(pod: PodSpec, base: UsageLabel) -> ScopedLabel:
    """Attach the scope suffix the pod asks for to one of its labels."""
    if base not in pod.labels:
        raise ModelError(f"label {base} is not carried by pod {pod.id}")
    if pod.scope is ScopeLevel.CLUSTER:
        return ScopedLabel(base)
    if pod.scope is ScopeLevel.NAMESPACE:
        return ScopedLabel(base, pod.namespace)
    return ScopedLabel(base, pod.namespace, pod.application)


@dataclass(frozen=True)
class Node:
    id: str
    capacity: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ModelError("node id must be a non-empty string")
        if self.capacity is not None:
            if isinstance(self.capacity, bool) or not isinstance(self.capacity, int):
                raise ModelError(f"node {self.id}: capacity must be an integer")
            if self.capacity < 0:
                raise ModelError(f"node {self.id}: capacity must be non-negative")


@dataclass(frozen=True, eq=False)
class ClusterState:
    """Nodes, known pods and the pod -> node assignment.

    ``nodes`` is always kept in canonical (lexicographic id) order. Pods may be
    present but unassigned. Construction validates every invariant and raises
    :class:`ValidationError` naming the offending node or pod.
    """

    nodes: tuple
    pods: Mapping[str, PodSpec]
    assignment: Mapping[str, str]

    def __init__(
        self,
        nodes: Iterable[Node] = (),
        pods: Iterable[PodSpec] | Mapping[str, PodSpec] = (),
        assignment: Optional[Mapping[str, str]] = None,
    ):
        node_list = list(nodes)
        seen = set()
        for node in node_list:
            if node.id in seen:
                raise ValidationError(f"duplicate node id {node.id!r}", node.id)
            seen.add(node.id)
        node_list.sort(key=lambda n: n.id)

        pod_values = pods.values() if isinstance(pods, Mapping) else pods
        pod_map: dict[str, PodSpec] = {}
        for pod in pod_values:
            if pod.id in pod_map:
                raise ValidationError(f"duplicate pod id {pod.id!r}", pod.id)
            pod_map[pod.id] = pod

        assign = dict(assignment or {})
        load: dict[str, int] = {}
        for pod_id, node_id in assign.items():
            if pod_id not in pod_map:
                raise ValidationError(f"assignment of unknown pod {pod_id!r}", pod_id)
            if node_id not in seen:
                raise ValidationError(
                    f"pod {pod_id!r} assigned to unknown node {node_id!r}", node_id
                )
            load[node_id] = load.get(node_id, 0) + 1
        for node in node_list:
            if node.capacity is not None and load.get(node.id, 0) > node.capacity:
                raise ValidationError(
                    f"node {node.id!r} holds {load[node.id]} pods, capacity {node.capacity}",
                    node.id,
                )

        object.__setattr__(self, "nodes", tuple(node_list))
        object.__setattr__(self, "pods", dict(sorted(pod_map.items())))
        object.__setattr__(self, "assignment", dict(sorted(assign.items())))

    def __eq__(self, other):
        if not isinstance(other, ClusterState):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.pods == other.pods
            and self.assignment == other.assignment
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"ClusterState(nodes={len(self.nodes)}, pods={len(self.pods)}, "
            f"assigned={len(self.assignment)})"
        )

    @cached_property
    def node_ids(self) -> tuple:
        return tuple(n.id for n in self.nodes)

    @cached_property
    def node_index(self) -> dict:
        return {nid: i for i, nid in enumerate(self.node_ids)}

    @cached_property
    def _node_by_id(self) -> dict:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> Node:
        try:
            return self._node_by_id[node_id]
        except KeyError:
            raise ModelError(f"unknown node {node_id!r}") from None

    @cached_property
    def _loads(self) -> dict:
        load = {nid: 0 for nid in self.node_ids}
        for node_id in self.assignment.values():
            load[node_id] += 1
        return load

    def pod_count(self, node_id: str) -> int:
        """Number of pods currently assigned to ``node_id``."""
        return self._loads[node_id]

    def has_room(self, node_id: str) -> bool:
        node = self.node(node_id)
        return node.capacity is None or self.pod_count(node_id) < node.capacity

    def pods_on(self, node_id: str) -> list[PodSpec]:
        return [self.pods[p] for p, n in self.assignment.items() if n == node_id]

    def assigned_pods(self) -> list[PodSpec]:
        return [self.pods[p] for p in self.assignment]

    def assign(self, pod: PodSpec, node_id: str) -> "ClusterState":
        """New state with ``pod`` (added if unknown) placed on ``node_id``."""
        pods = dict(self.pods)
        pods[pod.id] = pod
        assignment = dict(self.assignment)
        assignment[pod.id] = node_id
        return ClusterState(self.nodes, pods, assignment)

    def unassign(self, pod_id: str) -> "ClusterState":
        if pod_id not in self.assignment:
            raise ModelError(f"pod {pod_id!r} is not assigned")
        assignment = dict(self.assignment)
        del assignment[pod_id]
        return ClusterState(self.nodes, self.pods, assignment)

    def remove_pod(self, pod_id: str) -> "ClusterState":
        if pod_id not in self.pods:
            raise ModelError(f"unknown pod {pod_id!r}")
        pods = dict(self.pods)
        del pods[pod_id]
        assignment = dict(self.assignment)
        assignment.pop(pod_id, None)
        return ClusterState(self.nodes, pods, assignment)

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "capacity": n.capacity} for n in self.nodes
            ],
            "pods": [pod_to_dict(p) for p in self.pods.values()],
            "assignment": dict(self.assignment),
        }

    @cached_property
    def fingerprint(self) -> str:
        """Content hash; two states compare equal iff their fingerprints do."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def pod_to_dict(pod: PodSpec) -> dict:
    doc = {
        "id": pod.id,
        "namespace": pod.namespace,
        "application": pod.application,
        "scope": pod.scope.value,
        "labels": [str(label) for label in pod.sorted_labels],
    }
    if not pod.movable:
        doc["movable"] = False
    return doc
