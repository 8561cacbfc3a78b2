"""JSON/CSV readers and writers for cluster snapshots, pods and usage data."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .labeler import LabelerConfig, UsageSeries
from .model import (
    ClusterState,
    ModelError,
    Node,
    PodSpec,
    ResourceKind,
    ScopeLevel,
    ValidationError,
    parse_label,
)
from .rebalancer import Move, RebalancePlan


class FileFormatError(ModelError):
    """Input file is malformed; the message carries file/line/field context."""


_NODE_FIELDS = {"id", "capacity"}
_POD_FIELDS = {"id", "namespace", "application", "scope", "labels", "movable"}
_CLUSTER_FIELDS = {"nodes", "pods", "assignment"}


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def write_json(path, doc: Any) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _expect(obj, kind, where: str):
    if not isinstance(obj, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise FileFormatError(f"{where}: expected {name}, got {type(obj).__name__}")
    return obj


def _no_extra(obj: dict, allowed: set, where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise FileFormatError(f"{where}: unknown field(s) {', '.join(extra)}")


def node_from_dict(doc, where="node") -> Node:
    _expect(doc, dict, where)
    _no_extra(doc, _NODE_FIELDS, where)
    if "id" not in doc:
        raise FileFormatError(f"{where}: missing 'id'")
    try:
        return Node(doc["id"], doc.get("capacity"))
    except ModelError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def pod_from_dict(doc, where="pod") -> PodSpec:
    _expect(doc, dict, where)
    _no_extra(doc, _POD_FIELDS, where)
    for key in ("id", "namespace", "application", "scope", "labels"):
        if key not in doc:
            raise FileFormatError(f"{where}: missing {key!r}")
    labels = _expect(doc["labels"], list, f"{where}.labels")
    movable = doc.get("movable", True)
    if not isinstance(movable, bool):
        raise FileFormatError(f"{where}.movable: expected a boolean")
    try:
        scope = ScopeLevel(doc["scope"])
    except ValueError:
        raise FileFormatError(f"{where}.scope: unknown scope {doc['scope']!r}") from None
    try:
        parsed = [parse_label(_expect(t, str, f"{where}.labels")) for t in labels]
        if len(set(parsed)) != len(parsed):
            raise ModelError("duplicate label")
        return PodSpec(doc["id"], doc["namespace"], doc["application"], frozenset(parsed), scope, movable)
    except ModelError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def cluster_from_dict(doc, source: str = "cluster") -> ClusterState:
    _expect(doc, dict, source)
    _no_extra(doc, _CLUSTER_FIELDS, source)
    nodes = [
        node_from_dict(n, f"{source}: nodes[{i}]")
        for i, n in enumerate(_expect(doc.get("nodes", []), list, f"{source}: nodes"))
    ]
    pods = [
        pod_from_dict(p, f"{source}: pods[{i}]")
        for i, p in enumerate(_expect(doc.get("pods", []), list, f"{source}: pods"))
    ]
    assignment = _expect(doc.get("assignment", {}), dict, f"{source}: assignment")
    for pod_id, node_id in assignment.items():
        _expect(node_id, str, f"{source}: assignment[{pod_id}]")
    try:
        return ClusterState(nodes, pods, assignment)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}", exc.entity) from exc


def load_cluster(path) -> ClusterState:
    return cluster_from_dict(read_json(path), str(path))


def save_cluster(state: ClusterState, path) -> None:
    write_json(path, state.to_dict())


def load_pod(path) -> PodSpec:
    return pod_from_dict(read_json(path), str(path))


def plan_from_dict(doc, where="plan") -> RebalancePlan:
    _expect(doc, dict, where)
    try:
        moves = tuple(
            Move(m["pod"], m["from"], m["to"], float(m["total_before"]), float(m["total_after"]))
            for m in doc["moves"]
        )
        return RebalancePlan(moves, float(doc["initial_total"]), float(doc["final_total"]))
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{where}: malformed plan ({exc})") from exc


def labeler_config_from_dict(doc, where="config") -> LabelerConfig:
    _expect(doc, dict, where)
    _no_extra(doc, set(LabelerConfig.__dataclass_fields__), where)
    try:
        return LabelerConfig(**doc)
    except (ModelError, TypeError) as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def parse_timestamp(text: str) -> datetime:
    ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _resource(name, where) -> ResourceKind:
    try:
        return ResourceKind(name)
    except ValueError:
        raise FileFormatError(f"{where}: unknown resource {name!r}") from None


def usage_from_dict(doc, where="usage") -> dict[str, dict[ResourceKind, UsageSeries]]:
    """``{pod_id: {resource: {"capacity": c, "samples": [[iso, v], ...]}}}``."""
    _expect(doc, dict, where)
    out = {}
    for pod_id, per_resource in doc.items():
        _expect(per_resource, dict, f"{where}[{pod_id}]")
        series = {}
        for name, body in per_resource.items():
            here = f"{where}[{pod_id}][{name}]"
            _expect(body, dict, here)
            _no_extra(body, {"capacity", "samples"}, here)
            resource = _resource(name, here)
            try:
                samples = tuple(
                    (parse_timestamp(ts), float(v)) for ts, v in body["samples"]
                )
                series[resource] = UsageSeries(resource, samples, float(body["capacity"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise FileFormatError(f"{here}: {exc}") from exc
        out[pod_id] = series
    return out


def usage_from_csv(path) -> dict[str, dict[ResourceKind, UsageSeries]]:
    """Rows of ``pod_id,resource,timestamp,value,capacity`` in sample order."""
    rows: dict[tuple[str, str], list] = {}
    caps: dict[tuple[str, str], float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"pod_id", "resource", "timestamp", "value", "capacity"} - set(reader.fieldnames or ())
        if missing:
            raise FileFormatError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
        for row in reader:
            where = f"{path}:{reader.line_num}"
            key = (row["pod_id"], row["resource"])
            try:
                cap = float(row["capacity"])
                sample = (parse_timestamp(row["timestamp"]), float(row["value"]))
            except ValueError as exc:
                raise FileFormatError(f"{where}: {exc}") from exc
            if caps.setdefault(key, cap) != cap:
                raise FileFormatError(f"{where}: capacity changes within {key[0]}/{key[1]}")
            rows.setdefault(key, []).append(sample)
    out: dict[str, dict[ResourceKind, UsageSeries]] = {}
    for (pod_id, name), samples in rows.items():
        resource = _resource(name, f"{path}: {pod_id}")
        try:
            out.setdefault(pod_id, {})[resource] = UsageSeries(resource, tuple(samples), caps[(pod_id, name)])
        except ModelError as exc:
            raise FileFormatError(f"{path}: {pod_id}: {exc}") from exc
    return out


def load_usage(path) -> dict[str, dict[ResourceKind, UsageSeries]]:
    if str(path).lower().endswith(".csv"):
        return usage_from_csv(path)
    return usage_from_dict(read_json(path), str(path))
