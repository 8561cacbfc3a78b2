"""``distsched`` command line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .distributedness import VarianceConvention, cluster_report
from .io import (
    labeler_config_from_dict,
    load_cluster,
    load_pod,
    load_usage,
    read_json,
    save_cluster,
    write_json,
)
from .labeler import LabelerConfig, derive_labels
from .model import ModelError, PodSpec, ScopeLevel, pod_to_dict
from .rebalancer import RebalanceConfig, apply_plan, rebalance
from .scenario import load_scenario, run_scenario
from .scheduler import UnschedulableError, apply, place

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSCHEDULABLE = 2

log = logging.getLogger("distsched")


def resolve_convention(flag: str | None) -> VarianceConvention:
    """Flag beats ``DISTSCHED_CONVENTION``, which beats the sample default."""
    value = flag or os.environ.get("DISTSCHED_CONVENTION") or VarianceConvention.SAMPLE.value
    try:
        return VarianceConvention(value)
    except ValueError:
        raise ModelError(f"unknown variance convention {value!r}") from None


def _emit(args, doc, table: str) -> None:
    if args.format == "table":
        print(table)
    else:
        print(json.dumps(doc, indent=2))


def cmd_report(args) -> int:
    state = load_cluster(args.cluster)
    report = cluster_report(state, args.convention)
    _emit(args, report.to_dict(), report.to_table())
    return EXIT_OK


def cmd_schedule(args) -> int:
    state = load_cluster(args.cluster)
    pod = load_pod(args.pod)
    try:
        decision = place(state, pod, args.convention)
    except UnschedulableError as exc:
        print(f"unschedulable: {exc}", file=sys.stderr)
        return EXIT_UNSCHEDULABLE
    if args.explain:
        print(decision.explain())
    else:
        _emit(args, decision.to_dict(), f"{decision.pod_id} -> {decision.chosen_node}")
    if args.apply:
        save_cluster(apply(state, decision), args.out)
    return EXIT_OK


def cmd_rebalance(args) -> int:
    state = load_cluster(args.cluster)
    config = RebalanceConfig(args.max_moves, args.max_passes, args.min_improvement)
    plan = rebalance(state, config, args.convention)
    _emit(args, plan.to_dict(), plan.to_table())
    if args.plan_out:
        write_json(args.plan_out, plan.to_dict())
    if args.apply:
        save_cluster(apply_plan(state, plan), args.out)
    return EXIT_OK


def cmd_label(args) -> int:
    usage = load_usage(args.usage)
    config = LabelerConfig()
    if args.config:
        config = labeler_config_from_dict(read_json(args.config), args.config)
    pods = []
    for pod_id, series in sorted(usage.items()):
        labels = derive_labels(series, config)
        pod = PodSpec(pod_id, args.namespace, args.application or pod_id, labels, args.scope)
        pods.append(pod_to_dict(pod))
    write_json(args.out, {"pods": pods})
    if args.format == "table":
        for pod in pods:
            print(f"{pod['id']}: {', '.join(pod['labels'])}")
    else:
        print(json.dumps({"pods": pods}, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    transcript = run_scenario(scenario, args.convention, strict=args.strict)
    if args.transcript:
        with open(args.transcript, "w") as fh:
            fh.write(transcript.to_jsonl())
    final = cluster_report(transcript.final_state, args.convention)
    failed = sum(1 for r in transcript.records if r["status"] != "ok")
    summary = {"events": len(transcript), "failed": failed, "final": final.to_dict()}
    _emit(args, summary, f"{len(transcript)} events, {failed} failed\n{final.to_table()}")
    return EXIT_OK


def _global_options(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument(
        "--convention",
        choices=[c.value for c in VarianceConvention],
        default=default,
        help="variance divisor: sample (n-1) or population (n)",
    )
    parser.add_argument("--format", choices=["json", "table"], default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distsched", description="Spread pods with similar usage labels across nodes."
    )
    _global_options(parser, None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="per-label distributedness of a cluster snapshot")
    p.add_argument("--cluster", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("schedule", help="place one pod")
    p.add_argument("--cluster", required=True)
    p.add_argument("--pod", required=True)
    p.add_argument("--apply", action="store_true")
    p.add_argument("--out")
    p.add_argument("--explain", action="store_true", help="print the per-node score table")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("rebalance", help="plan pod moves that lower total distributedness")
    p.add_argument("--cluster", required=True)
    p.add_argument("--max-moves", type=int, default=RebalanceConfig.max_moves)
    p.add_argument("--max-passes", type=int, default=RebalanceConfig.max_passes)
    p.add_argument("--min-improvement", type=float, default=RebalanceConfig.min_improvement)
    p.add_argument("--plan-out")
    p.add_argument("--apply", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rebalance)

    p = sub.add_parser("label", help="derive usage labels from usage series")
    p.add_argument("--usage", required=True, help="JSON or CSV usage file")
    p.add_argument("--config", help="JSON labeler config")
    p.add_argument("--out", required=True)
    p.add_argument("--namespace", default="default")
    p.add_argument("--application", help="defaults to the pod id")
    p.add_argument("--scope", choices=[s.value for s in ScopeLevel], default="cluster")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("simulate", help="replay a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--transcript", help="write a JSON-lines transcript here")
    p.add_argument("--strict", action="store_true", help="abort on the first unschedulable arrival")
    p.set_defaults(func=cmd_simulate)

    for name, p in sub.choices.items():
        _global_options(p, argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "apply", False) and not args.out:
        parser.error("--apply requires --out")
    try:
        args.convention = resolve_convention(args.convention)
        args.format = args.format or "json"
        return args.func(args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
