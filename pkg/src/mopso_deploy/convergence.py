# -*- coding: utf-8 -*-

"""
Interval distance between Pareto-front snapshots and the adaptive
stopping rule built on it.

For each point of the newer front we take the minimum Euclidean
objective-space distance to the older-front points it dominates (zero
when it dominates none); the interval distance aggregates these
per-point relative distances as a max, min, or zero-excluded average.
The run stops once two consecutive aggregates differ by at most a
threshold.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

MODES = ("max", "min", "avg")
CADENCES = ("every_h", "every_iteration")


@dataclass(frozen=True)
class FrontSnapshot:
    """Objective-space image of the archive at one iteration."""

    iteration: int
    values: np.ndarray  # (K, M)

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if vals.shape[0] < 1:
            raise ValueError("a front snapshot needs at least one point")
        object.__setattr__(self, "values", vals)

    @property
    def size(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class ConvergenceConfig:
    step: int = 5  # iteration spacing h between compared fronts
    threshold: float = 0.25e-3
    mode: str = "avg"
    cadence: str = "every_h"
    # Divide objectives by the current front's per-objective range before
    # distance computation, making the threshold scale-free.
    normalized: bool = False
    # When set, the effective threshold is this factor times the first
    # computed aggregate (overrides `threshold`).
    relative_threshold: float | None = None

    def __post_init__(self):
        if self.step < 1:
            raise ValueError("step h must be >= 1")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.cadence not in CADENCES:
            raise ValueError(f"cadence must be one of {CADENCES}")
        if self.relative_threshold is not None and self.relative_threshold < 0:
            raise ValueError("relative_threshold must be non-negative")


def dominated_set(k, front_t, front_prev):
    """Members of the older front dominated by point k of the newer one."""
    v = front_t.values[k]
    prev = front_prev.values
    mask = (prev <= v).all(axis=1) & (prev < v).any(axis=1)
    return prev[mask]


def relative_distance(k, front_t, front_prev):
    """Minimum distance from point k to the old points it dominates; 0 if none."""
    dominated = dominated_set(k, front_t, front_prev)
    if dominated.shape[0] == 0:
        return 0.0
    diffs = dominated - front_t.values[k]
    return float(np.sqrt((diffs * diffs).sum(axis=1)).min())


def relative_distances(front_t, front_prev):
    """Vectorized relative_distance for every point of the newer front."""
    new = front_t.values
    old = front_prev.values
    dom = (old[None, :, :] <= new[:, None, :]).all(axis=2) & (
        old[None, :, :] < new[:, None, :]
    ).any(axis=2)
    diffs = new[:, None, :] - old[None, :, :]
    dist = np.sqrt((diffs * diffs).sum(axis=2))
    dist = np.where(dom, dist, np.inf)
    out = dist.min(axis=1)
    out[~dom.any(axis=1)] = 0.0
    return out


def interval_distance(front_t, front_prev, mode="avg"):
    """Aggregate the relative distances of the newer front; returns (dist, z).

    Zero relative distances are excluded from the aggregation; z counts
    them. When every relative distance is zero (an unmoved front), the
    aggregate is defined as 0 for all modes.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    dis = relative_distances(front_t, front_prev)
    z = int(np.count_nonzero(dis == 0.0))
    nonzero = dis[dis != 0.0]
    if nonzero.size == 0:
        return 0.0, z
    if mode == "max":
        return float(nonzero.max()), z
    if mode == "min":
        return float(nonzero.min()), z
    return float(nonzero.sum() / (dis.size - z)), z


@dataclass
class TraceRecord:
    iteration: int
    n_points: int  # K at iteration t
    z: int  # points with zero relative distance
    dist: dict  # mode -> aggregate on the values the monitor compares
    dist_raw: dict | None = None  # mode -> aggregate on raw objectives
    # (equals `dist` unless the monitor normalizes)


@dataclass
class DistanceTrace:
    records: list = field(default_factory=list)

    def append(self, record):
        self.records.append(record)

    def by_iteration(self):
        return {r.iteration: r for r in self.records}

    def __len__(self):
        return len(self.records)


def should_stop(trace, cfg):
    """Threshold test on the two most recent comparable aggregates.

    True iff aggregates exist at both t and t-h and their absolute
    difference is within the threshold. ``cfg.relative_threshold`` is
    resolved by the monitor; here ``cfg.threshold`` is used as given.
    """
    if len(trace) == 0:
        return False
    by_iter = trace.by_iteration()
    t = trace.records[-1].iteration
    prev = by_iter.get(t - cfg.step)
    if prev is None:
        return False
    cur = by_iter[t]
    return abs(cur.dist[cfg.mode] - prev.dist[cfg.mode]) <= cfg.threshold


class ConvergenceMonitor:
    """Sequential stopping-rule state machine fed by one optimizer run.

    Feed ``observe(t, front_values)`` once per iteration (and once with
    t=0 for the initial archive). Keeps only the snapshots needed for
    pending front comparisons; the full aggregate trace is retained for
    export.
    """

    CONTINUE = "continue"
    STOP = "stop"

    def __init__(self, cfg, max_iterations=None):
        self.cfg = cfg
        self.max_iterations = max_iterations
        self.trace = DistanceTrace()
        self._snapshots = OrderedDict()  # iteration -> FrontSnapshot
        self._resolved_threshold = (
            None if cfg.relative_threshold is not None else cfg.threshold
        )

    @property
    def effective_threshold(self):
        return self._resolved_threshold

    def _is_evaluation_point(self, t):
        h = self.cfg.step
        if t < h:
            return False
        if self.cfg.cadence == "every_h":
            return t % h == 0
        return True

    def _normalize(self, front_t, front_prev):
        span = front_t.values.max(axis=0) - front_t.values.min(axis=0)
        span = np.where(span > 0, span, 1.0)
        return (
            FrontSnapshot(front_t.iteration, front_t.values / span),
            FrontSnapshot(front_prev.iteration, front_prev.values / span),
        )

    def observe(self, t, front_values):
        """Record the archive image at iteration t; returns CONTINUE or STOP."""
        snap = FrontSnapshot(t, np.asarray(front_values, dtype=float))
        self._snapshots[t] = snap
        h = self.cfg.step
        decision = self.CONTINUE
        if self._is_evaluation_point(t):
            prev = self._snapshots.get(t - h)
            if prev is not None:
                def aggregates(cur, old):
                    dis = relative_distances(cur, old)
                    nz = dis[dis != 0.0]
                    n_zero = dis.size - nz.size
                    if nz.size == 0:
                        return {m: 0.0 for m in MODES}, n_zero
                    return {
                        "max": float(nz.max()),
                        "min": float(nz.min()),
                        "avg": float(nz.sum() / nz.size),
                    }, n_zero

                dist_raw, z = aggregates(snap, prev)
                if self.cfg.normalized:
                    dist, _ = aggregates(*self._normalize(snap, prev))
                else:
                    dist = dist_raw
                self.trace.append(
                    TraceRecord(
                        iteration=t,
                        n_points=snap.size,
                        z=z,
                        dist=dist,
                        dist_raw=dist_raw,
                    )
                )
                if self._resolved_threshold is None:
                    self._resolved_threshold = (
                        self.cfg.relative_threshold * dist[self.cfg.mode]
                    )
                by_iter = self.trace.by_iteration()
                ref = by_iter.get(t - h)
                if ref is not None:
                    diff = abs(dist[self.cfg.mode] - ref.dist[self.cfg.mode])
                    if diff <= self._resolved_threshold:
                        decision = self.STOP
        # drop snapshots too old to be compared against again
        stale = [it for it in self._snapshots if it < t - h + 1]
        for it in stale:
            del self._snapshots[it]
        if self.max_iterations is not None and t >= self.max_iterations:
            decision = self.STOP
        return decision
