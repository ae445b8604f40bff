# -*- coding: utf-8 -*-

"""
Experiment orchestration: load configs, run single or Monte Carlo
optimizations, and export fronts, distance traces, and c-ratio tables
as CSV/JSON.

All outputs are a pure function of (config, seed): re-running an
experiment reproduces the output tree byte for byte (wall-clock timings
are only written on request for that reason).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .convergence import ConvergenceConfig, ConvergenceMonitor, MODES
from .mopso import MopsoConfig, init_swarm, pareto_filter, step
from .scenario import Scenario, ScenarioError, load_scenario, make_objective


class ConfigError(ValueError):
    """Invalid experiment configuration file."""


DEFAULT_SNAPSHOTS = (10, 50, 100, 400, 1000)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario_path: str
    scenario: Scenario
    mopso: MopsoConfig
    convergence: ConvergenceConfig
    trials: int = 1
    base_seed: int = 0
    snapshot_iterations: tuple = DEFAULT_SNAPSHOTS
    output_dir: str = "out"
    anchors: tuple | None = None  # objective-1 anchor values; None = percentiles
    halt_on_stop: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        snaps = tuple(sorted(set(int(s) for s in self.snapshot_iterations)))
        if snaps and snaps[-1] > self.mopso.max_iterations:
            raise ConfigError(
                "snapshot_iterations exceed mopso.max_iterations "
                f"({snaps[-1]} > {self.mopso.max_iterations})"
            )
        if any(s < 1 for s in snaps):
            raise ConfigError("snapshot_iterations must be >= 1")
        object.__setattr__(self, "snapshot_iterations", snaps)


@dataclass
class FrontRecord:
    """Archive image at one iteration: objective values and positions."""

    iteration: int
    values: np.ndarray  # (K, M)
    positions: np.ndarray  # (K, 2J)


@dataclass
class RunResult:
    seed: int
    stop_iteration: int
    iterations_run: int
    final_front: FrontRecord
    snapshots: dict  # iteration -> FrontRecord
    stop_front: FrontRecord | None
    trace: list  # of convergence.TraceRecord
    effective_threshold: float
    wall_time: float
    all_fronts: list | None = None  # per-iteration FrontRecord when requested


def _section(doc, key, cls=dict):
    if key not in doc:
        raise ConfigError(f"experiment config is missing key '{key}'")
    value = doc[key]
    if not isinstance(value, cls):
        raise ConfigError(f"'{key}' has the wrong type (expected {cls.__name__})")
    return value


def _build(cls, obj, context, error=ConfigError):
    try:
        return cls(**obj)
    except TypeError:
        import inspect

        allowed = set(inspect.signature(cls).parameters)
        unknown = set(obj) - allowed
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in '{context}'") from None
    except ValueError as exc:
        raise error(f"invalid '{context}': {exc}") from None


def experiment_from_dict(doc, base_dir="."):
    """Build and validate an ExperimentConfig from a parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    known = {
        "scenario",
        "mopso",
        "convergence",
        "trials",
        "base_seed",
        "snapshot_iterations",
        "output_dir",
        "anchors",
        "halt_on_stop",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in experiment config")

    scenario_path = _section(doc, "scenario", str)
    if not os.path.isabs(scenario_path):
        scenario_path = os.path.join(base_dir, scenario_path)
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as exc:
        raise ConfigError(f"invalid 'scenario': {exc}") from None

    mopso_cfg = _build(MopsoConfig, _section(doc, "mopso"), "mopso")
    conv_cfg = _build(ConvergenceConfig, _section(doc, "convergence"), "convergence")

    anchors = doc.get("anchors")
    if anchors is not None:
        if not isinstance(anchors, list) or not all(
            isinstance(a, (int, float)) for a in anchors
        ):
            raise ConfigError("'anchors' must be a list of numbers")
        anchors = tuple(float(a) for a in anchors)

    return ExperimentConfig(
        scenario_path=scenario_path,
        scenario=scenario,
        mopso=mopso_cfg,
        convergence=conv_cfg,
        trials=int(doc.get("trials", 1)),
        base_seed=int(doc.get("base_seed", 0)),
        snapshot_iterations=tuple(
            doc.get("snapshot_iterations", [s for s in DEFAULT_SNAPSHOTS
                                            if s <= mopso_cfg.max_iterations])
        ),
        output_dir=str(doc.get("output_dir", "out")),
        anchors=anchors,
        halt_on_stop=bool(doc.get("halt_on_stop", True)),
    )


def load_experiment(path):
    """Load and validate an experiment JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"experiment config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"experiment config {path} is not valid JSON: {exc}") from None
    return experiment_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def _front_record(iteration, archive):
    return FrontRecord(
        iteration=iteration, values=archive.values(), positions=archive.positions()
    )


def run_single(cfg, seed, keep_all_fronts=False):
    """One seeded optimization run with the adaptive stopping monitor.

    With ``cfg.halt_on_stop`` false the run continues to the iteration
    cap but still records the first iteration at which the criterion
    held, together with the archive front at that point.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    scenario = cfg.scenario
    box = scenario.deployment_region
    n_ant = scenario.n_antennas
    lower = np.tile([box.x_min, box.y_min], n_ant)
    upper = np.tile([box.x_max, box.y_max], n_ant)
    objective = make_objective(scenario)

    particles, archive = init_swarm(objective, lower, upper, cfg.mopso, rng)
    monitor = ConvergenceMonitor(
        cfg.convergence, max_iterations=cfg.mopso.max_iterations
    )
    monitor.observe(0, archive.values())

    snapshots = {}
    all_fronts = [] if keep_all_fronts else None
    stop_iteration = None
    stop_front = None
    t = 0
    for t in range(1, cfg.mopso.max_iterations + 1):
        step(particles, archive, objective, lower, upper, cfg.mopso, rng)
        if t in cfg.snapshot_iterations:
            snapshots[t] = _front_record(t, archive)
        if keep_all_fronts:
            all_fronts.append(_front_record(t, archive))
        decision = monitor.observe(t, archive.values())
        if decision == ConvergenceMonitor.STOP and stop_iteration is None:
            stop_iteration = t
            stop_front = _front_record(t, archive)
            if cfg.halt_on_stop:
                break
    if stop_iteration is None:
        stop_iteration = t
        stop_front = _front_record(t, archive)

    return RunResult(
        seed=seed,
        stop_iteration=stop_iteration,
        iterations_run=t,
        final_front=_front_record(t, archive),
        snapshots=snapshots,
        stop_front=stop_front,
        trace=monitor.trace.records,
        effective_threshold=float(monitor.effective_threshold),
        wall_time=time.perf_counter() - t0,
        all_fronts=all_fronts,
    )


def _run_trial(args):
    cfg, seed = args
    return run_single(cfg, seed)


def run_monte_carlo(cfg, jobs=1):
    """Independent seeded trials (seeds base_seed + i); returns the results.

    Trials are fully independent; with jobs > 1 they run in separate
    processes, results keyed by trial index either way.
    """
    seeds = [cfg.base_seed + i for i in range(cfg.trials)]
    if jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, [(cfg, s) for s in seeds]))
    else:
        results = [run_single(cfg, s) for s in seeds]
    return results


# ---------------------------------------------------------------------------
# c-ratio report
# ---------------------------------------------------------------------------


def interpolate_front(values, anchor):
    """Objective-2 of a bi-objective maximization front at objective-1=anchor.

    Piecewise-linear along the front sorted by objective 1; NaN when the
    anchor lies outside the front's objective-1 range.
    """
    vals = np.unique(np.asarray(values, dtype=float), axis=0)
    order = np.argsort(vals[:, 0])
    f1 = vals[order, 0]
    f2 = vals[order, 1]
    if anchor < f1[0] or anchor > f1[-1]:
        return float("nan")
    return float(np.interp(anchor, f1, f2))


@dataclass
class CRatioRow:
    anchor: float
    iteration: int
    value: float  # interpolated objective-2 (NaN when unavailable)
    c_percent: float


@dataclass
class CRatioReport:
    anchors: tuple
    rows: list


def default_anchors(final_values, quantiles=(0.25, 0.5, 0.75)):
    """Anchor objective-1 values at the given quantiles of the final front."""
    f1 = np.asarray(final_values, dtype=float)[:, 0]
    return tuple(float(np.quantile(f1, q)) for q in quantiles)


def c_ratio_report(snapshots, anchors=None):
    """Per-anchor interpolated objective-2 and its ratio to the final front.

    ``snapshots`` maps iteration -> (K, 2) objective arrays; the largest
    iteration is the reference, where c = 100 by construction.
    """
    iters = sorted(snapshots)
    if not iters:
        raise ValueError("c_ratio_report needs at least one snapshot")
    sample = np.atleast_2d(np.asarray(snapshots[iters[0]], dtype=float))
    if sample.shape[1] != 2:
        raise ValueError("c-ratio report is defined for bi-objective fronts only")
    final = np.asarray(snapshots[iters[-1]], dtype=float)
    if anchors is None:
        anchors = default_anchors(final)
    rows = []
    for anchor in anchors:
        ref = interpolate_front(final, anchor)
        for it in iters:
            val = interpolate_front(snapshots[it], anchor)
            if it == iters[-1]:
                c = 100.0
            elif np.isnan(val) or np.isnan(ref) or ref == 0:
                c = float("nan")
            else:
                c = 100.0 * val / ref
            rows.append(CRatioRow(anchor=anchor, iteration=it, value=val, c_percent=c))
    return CRatioReport(anchors=tuple(anchors), rows=rows)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def _fmt(x):
    """17-significant-digit decimal, round-trip stable for float64."""
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def write_front_csv(path, front):
    """front_t{iter}.csv: objective values then the flat decision vector."""
    values = np.atleast_2d(front.values)
    positions = np.atleast_2d(front.positions)
    m = values.shape[1]
    d = positions.shape[1]
    header = [f"f{q + 1}" for q in range(m)] + [
        f"{axis}{j + 1}" for j in range(d // 2) for axis in ("x", "y")
    ]
    rows = (
        [_fmt(v) for v in values[k]] + [_fmt(p) for p in positions[k]]
        for k in range(values.shape[0])
    )
    _write_csv(path, header, rows)


def read_front_csv(path):
    """Inverse of write_front_csv; returns (values, positions)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        m = sum(1 for name in header if name.startswith("f"))
        data = np.array(
            [[float(tok) for tok in line.rstrip("\n").split(",")] for line in fh]
        )
    return data[:, :m], data[:, m:]


def write_trace_csv(path, trace):
    rows = (
        [str(rec.iteration), mode, _fmt(rec.dist[mode]), str(rec.z), str(rec.n_points)]
        for rec in trace
        for mode in MODES
    )
    _write_csv(path, ["t", "mode", "dist", "z", "K"], rows)


def write_c_ratio_csv(path, report):
    rows = (
        [_fmt(r.anchor), str(r.iteration), _fmt(r.value), _fmt(r.c_percent)]
        for r in report.rows
    )
    _write_csv(path, ["anchor_f1", "iteration", "f2", "c_percent"], rows)


def _config_echo(cfg):
    return {
        "scenario": cfg.scenario_path,
        "mopso": {
            "swarm_size": cfg.mopso.swarm_size,
            "inertia": cfg.mopso.inertia,
            "c1": cfg.mopso.c1,
            "c2": cfg.mopso.c2,
            "v_max": cfg.mopso.v_max,
            "archive_capacity": cfg.mopso.archive_capacity,
            "max_iterations": cfg.mopso.max_iterations,
            "r_per_dimension": cfg.mopso.r_per_dimension,
            "leader_selection": cfg.mopso.leader_selection,
        },
        "convergence": {
            "step": cfg.convergence.step,
            "threshold": cfg.convergence.threshold,
            "mode": cfg.convergence.mode,
            "cadence": cfg.convergence.cadence,
            "normalized": cfg.convergence.normalized,
            "relative_threshold": cfg.convergence.relative_threshold,
        },
        "trials": cfg.trials,
        "base_seed": cfg.base_seed,
        "snapshot_iterations": list(cfg.snapshot_iterations),
        "halt_on_stop": cfg.halt_on_stop,
    }


def export_run(result, cfg, directory, include_timings=False):
    """Write one run's fronts, trace, summary, and c-ratio table.

    Timings vary between executions, so they are only written when
    requested; everything else is byte-stable for a fixed (config, seed).
    """
    os.makedirs(directory, exist_ok=True)
    fronts = dict(result.snapshots)
    fronts[result.iterations_run] = result.final_front
    for it, front in sorted(fronts.items()):
        if not _front_is_clean(front.values):
            raise RuntimeError(f"exported front at iteration {it} is not a Pareto set")
        write_front_csv(os.path.join(directory, f"front_t{it}.csv"), front)
    write_trace_csv(os.path.join(directory, "trace.csv"), result.trace)

    report = None
    if result.final_front.values.shape[1] == 2:
        report = c_ratio_report(
            {it: f.values for it, f in fronts.items()}, anchors=cfg.anchors
        )
        write_c_ratio_csv(os.path.join(directory, "c_ratio.csv"), report)

    summary = {
        "seed": result.seed,
        "stop_iteration": result.stop_iteration,
        "iterations_run": result.iterations_run,
        "effective_threshold": result.effective_threshold,
        "front_sizes": {str(it): int(f.values.shape[0]) for it, f in sorted(fronts.items())},
        "config": _config_echo(cfg),
    }
    if include_timings:
        summary["wall_time_s"] = result.wall_time
    _write_json(os.path.join(directory, "summary.json"), summary)
    return report


def _front_is_clean(values):
    vals = np.unique(np.atleast_2d(values), axis=0)
    return len(pareto_filter(vals)) == vals.shape[0]


def _write_json(path, obj):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def export_monte_carlo(results, cfg, directory, include_timings=False):
    """Per-trial exports plus seed-pooled aggregates."""
    os.makedirs(directory, exist_ok=True)
    for i, result in enumerate(results):
        export_run(
            result,
            cfg,
            os.path.join(directory, f"trial_{i:04d}"),
            include_timings=include_timings,
        )

    stops = np.array([r.stop_iteration for r in results], dtype=float)
    summary = {
        "trials": cfg.trials,
        "seeds": [r.seed for r in results],
        "stop_iteration": {
            "median": float(np.median(stops)),
            "q25": float(np.quantile(stops, 0.25)),
            "q75": float(np.quantile(stops, 0.75)),
            "min": int(stops.min()),
            "max": int(stops.max()),
        },
        "config": _config_echo(cfg),
    }
    if include_timings:
        summary["wall_time_s"] = sum(r.wall_time for r in results)
    _write_json(os.path.join(directory, "summary.json"), summary)

    # mean distance trace per evaluation iteration, per mode
    acc = {}
    for r in results:
        for rec in r.trace:
            for mode in MODES:
                acc.setdefault((rec.iteration, mode), []).append(rec.dist[mode])
    rows = (
        [str(t), mode, _fmt(float(np.mean(vals))), str(len(vals))]
        for (t, mode), vals in sorted(acc.items())
    )
    _write_csv(
        os.path.join(directory, "mean_trace.csv"), ["t", "mode", "mean_dist", "n"], rows
    )

    # pooled fronts per snapshot iteration, with the trial index leading
    for it in cfg.snapshot_iterations:
        pooled = []
        for i, r in enumerate(results):
            front = r.snapshots.get(it)
            if front is None:
                continue
            for k in range(front.values.shape[0]):
                pooled.append(
                    [str(i)]
                    + [_fmt(v) for v in front.values[k]]
                    + [_fmt(p) for p in front.positions[k]]
                )
        if pooled:
            m = results[0].final_front.values.shape[1]
            d = results[0].final_front.positions.shape[1]
            header = (
                ["trial"]
                + [f"f{q + 1}" for q in range(m)]
                + [f"{axis}{j + 1}" for j in range(d // 2) for axis in ("x", "y")]
            )
            _write_csv(
                os.path.join(directory, f"pooled_front_t{it}.csv"), header, pooled
            )
    return summary
