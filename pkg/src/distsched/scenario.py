"""Replay a sequence of arrivals, departures and rebalances against a cluster."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .distributedness import DEFAULT_CONVENTION, VarianceConvention, cluster_report
from .io import FileFormatError, cluster_from_dict, pod_from_dict, read_json
from .model import ClusterState, ModelError, PodSpec, pod_to_dict
from .rebalancer import RebalanceConfig, apply_plan, rebalance
from .scheduler import UnschedulableError, apply, place


class ScenarioError(ModelError):
    pass


class UnlabeledPodError(ScenarioError):
    pass


@dataclass(frozen=True)
class Arrive:
    pod: PodSpec

    def to_dict(self):
        return {"type": "arrive", "pod": pod_to_dict(self.pod)}


@dataclass(frozen=True)
class Depart:
    pod_id: str

    def to_dict(self):
        return {"type": "depart", "pod": self.pod_id}


@dataclass(frozen=True)
class Rebalance:
    config: RebalanceConfig = RebalanceConfig()

    def to_dict(self):
        return {
            "type": "rebalance",
            "max_moves": self.config.max_moves,
            "max_passes": self.config.max_passes,
            "min_improvement": self.config.min_improvement,
        }


Event = Union[Arrive, Depart, Rebalance]


@dataclass(frozen=True)
class Scenario:
    initial: ClusterState
    events: tuple = ()


@dataclass
class RunTranscript:
    records: list = field(default_factory=list)
    final_state: ClusterState | None = None

    def __len__(self):
        return len(self.records)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


def run_scenario(
    scenario: Scenario, convention=DEFAULT_CONVENTION, strict: bool = False
) -> RunTranscript:
    """Process events in order and record one transcript entry per event.

    Unschedulable arrivals are recorded as failed and skipped, unless
    ``strict`` is set, in which case the error propagates.
    """
    convention = VarianceConvention(convention)
    state = scenario.initial
    transcript = RunTranscript(final_state=state)
    for i, event in enumerate(scenario.events):
        record = {"index": i, "event": event.to_dict(), "pre_state": state.fingerprint, "status": "ok"}
        if isinstance(event, Arrive):
            if not event.pod.labels:
                raise UnlabeledPodError(
                    f"event {i}: pod {event.pod.id!r} arrived without usage labels; "
                    "labels must be applied before scheduling"
                )
            if event.pod.id in state.pods:
                raise ScenarioError(f"event {i}: pod {event.pod.id!r} already exists")
            try:
                decision = place(state, event.pod, convention)
            except UnschedulableError as exc:
                if strict:
                    raise
                record["status"] = "failed"
                record["error"] = str(exc)
            else:
                state = apply(state, decision)
                record["decision"] = decision.to_dict()
        elif isinstance(event, Depart):
            if event.pod_id not in state.assignment:
                raise ScenarioError(f"event {i}: pod {event.pod_id!r} is not assigned")
            record["node"] = state.assignment[event.pod_id]
            state = state.remove_pod(event.pod_id)
        elif isinstance(event, Rebalance):
            plan = rebalance(state, event.config, convention)
            state = apply_plan(state, plan)
            record["plan"] = plan.to_dict()
        else:
            raise ScenarioError(f"event {i}: unknown event {event!r}")
        record["factors"] = cluster_report(state, convention).factors()
        transcript.records.append(record)
    transcript.final_state = state
    return transcript


def event_from_dict(doc, where="event") -> Event:
    if not isinstance(doc, dict) or "type" not in doc:
        raise FileFormatError(f"{where}: expected an object with a 'type'")
    kind = doc["type"]
    if kind == "arrive":
        return Arrive(pod_from_dict(doc.get("pod"), f"{where}.pod"))
    if kind == "depart":
        if not isinstance(doc.get("pod"), str):
            raise FileFormatError(f"{where}.pod: expected a pod id")
        return Depart(doc["pod"])
    if kind == "rebalance":
        extra = set(doc) - {"type", "max_moves", "max_passes", "min_improvement"}
        if extra:
            raise FileFormatError(f"{where}: unknown field(s) {', '.join(sorted(extra))}")
        kwargs = {k: doc[k] for k in ("max_moves", "max_passes", "min_improvement") if k in doc}
        try:
            return Rebalance(RebalanceConfig(**kwargs))
        except ModelError as exc:
            raise FileFormatError(f"{where}: {exc}") from exc
    raise FileFormatError(f"{where}: unknown event type {kind!r}")


def scenario_from_dict(doc, source="scenario", base_dir=None) -> Scenario:
    """``initial`` is an inline cluster document or a path to a cluster file."""
    if not isinstance(doc, dict):
        raise FileFormatError(f"{source}: expected an object")
    extra = set(doc) - {"initial", "events"}
    if extra:
        raise FileFormatError(f"{source}: unknown field(s) {', '.join(sorted(extra))}")
    initial = doc.get("initial", {})
    if isinstance(initial, str):
        path = Path(base_dir or ".") / initial
        initial = cluster_from_dict(read_json(path), str(path))
    else:
        initial = cluster_from_dict(initial, f"{source}: initial")
    events = tuple(
        event_from_dict(e, f"{source}: events[{i}]") for i, e in enumerate(doc.get("events", []))
    )
    return Scenario(initial, events)


def load_scenario(path) -> Scenario:
    return scenario_from_dict(read_json(path), str(path), Path(path).parent)
