from __future__ import annotations

import random

from distsched.model import (
    ClusterState,
    Magnitude,
    Node,
    Pattern,
    PodSpec,
    ResourceKind,
    ScopeLevel,
    UsageLabel,
    parse_label,
)

CPU_HIGH = parse_label("cpu-high-always")


def pod(pid, *labels, ns="default", app="web", scope=ScopeLevel.CLUSTER, movable=True):
    labels = labels or ("cpu-high-always",)
    return PodSpec(pid, ns, app, frozenset(parse_label(l) for l in labels), scope, movable)


def cluster_from_counts(counts, label="cpu-high-always", node_ids=None, capacity=None, prefix="p"):
    """One cluster-scope single-label pod per unit of count."""
    node_ids = node_ids or [f"n{i}" for i in range(len(counts))]
    nodes = [Node(nid, capacity) for nid in node_ids]
    pods, assignment = [], {}
    k = 0
    for nid, c in zip(node_ids, counts):
        for _ in range(c):
            pid = f"{prefix}{k:03d}"
            pods.append(pod(pid, label))
            assignment[pid] = nid
            k += 1
    return ClusterState(nodes, pods, assignment)


def random_label(rng: random.Random, resource=None) -> UsageLabel:
    return UsageLabel(
        resource or rng.choice(list(ResourceKind)),
        rng.choice(list(Magnitude)),
        rng.choice(list(Pattern)),
    )


def random_cluster(
    rng: random.Random,
    n_nodes=(2, 8),
    n_pods=(0, 30),
    label_pool=3,
    multi_label=False,
    capacities=False,
    pinned=False,
    scopes=False,
) -> ClusterState:
    n = rng.randint(*n_nodes)
    nodes = [
        Node(f"node-{i:02d}", rng.choice([None, rng.randint(1, 8)]) if capacities else None)
        for i in rng.sample(range(100), n)
    ]
    pool = [random_label(rng) for _ in range(label_pool)]
    pods, assignment = [], {}
    load = {nd.id: 0 for nd in nodes}
    for k in range(rng.randint(*n_pods)):
        if multi_label:
            chosen = {}
            for lab in rng.sample(pool, rng.randint(1, len(pool))):
                chosen.setdefault(lab.resource, lab)
            labels = frozenset(chosen.values())
        else:
            labels = frozenset([rng.choice(pool)])
        scope = rng.choice(list(ScopeLevel)) if scopes else ScopeLevel.CLUSTER
        p = PodSpec(
            f"pod-{k:03d}",
            rng.choice(["ns-a", "ns-b"]),
            rng.choice(["api", "db"]),
            labels,
            scope,
            movable=not (pinned and rng.random() < 0.2),
        )
        room = [nd.id for nd in nodes if nd.capacity is None or load[nd.id] < nd.capacity]
        if not room:
            break
        target = rng.choice(room)
        load[target] += 1
        pods.append(p)
        assignment[p.id] = target
    return ClusterState(nodes, pods, assignment)
