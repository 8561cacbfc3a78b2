"""Reference computations that share no code with the package under test."""

from __future__ import annotations

import itertools
import statistics
from fractions import Fraction

import numpy as np


def variance_oracle(values, sample=True):
    """Textbook two-pass variance in exact rationals."""
    xs = [Fraction(v) for v in values]
    mean = sum(xs) / len(xs)
    ss = sum((x - mean) ** 2 for x in xs)
    return ss / (len(xs) - 1 if sample else len(xs))


def stdlib_variance(values, sample=True):
    return statistics.variance(values) if sample else statistics.pvariance(values)


def lstsq_slope(xs, ys):
    slope, _ = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope)


def cv_oracle(values):
    arr = np.asarray(values, float)
    return float(arr.std() / arr.mean())


def per_node_scores(counts, sample=True):
    """Variance of counts after adding one pod to each node in turn."""
    out = []
    for i in range(len(counts)):
        trial = list(counts)
        trial[i] += 1
        out.append(variance_oracle(trial, sample))
    return out


def exhaustive_optimum(node_ids, capacities, pods, fixed, sample=True):
    """Lowest total label variance over every assignment of the movable pods.

    ``pods`` maps movable pod id -> list of label keys; ``fixed`` maps pinned
    pod id -> (node id, list of label keys). Returns the optimum as a float,
    or None when no assignment respects capacities.
    """
    n = len(node_ids)
    pos = {nid: i for i, nid in enumerate(node_ids)}
    keys = sorted({k for ks in pods.values() for k in ks} | {k for _, ks in fixed.values() for k in ks})
    kidx = {k: j for j, k in enumerate(keys)}
    base = np.zeros((len(keys), n), dtype=np.int64)
    base_load = np.zeros(n, dtype=np.int64)
    for node, ks in fixed.values():
        base_load[pos[node]] += 1
        for k in ks:
            base[kidx[k], pos[node]] += 1
    movable = list(pods)
    if not keys:
        return 0.0
    combos = np.array(list(itertools.product(range(n), repeat=len(movable))), dtype=np.int64)
    combos = combos.reshape(len(combos), len(movable))
    counts = np.broadcast_to(base, (len(combos),) + base.shape).copy()
    load = np.broadcast_to(base_load, (len(combos), n)).copy()
    rows = np.arange(len(combos))
    for col, pid in enumerate(movable):
        np.add.at(load, (rows, combos[:, col]), 1)
        for k in pods[pid]:
            np.add.at(counts, (rows, kidx[k], combos[:, col]), 1)
    ok = np.ones(len(combos), dtype=bool)
    for i, cap in enumerate(capacities):
        if cap is not None:
            ok &= load[:, i] <= cap
    if not ok.any():
        return None
    var = counts.var(axis=2, ddof=1 if sample else 0).sum(axis=1)
    return float(var[ok].min())
