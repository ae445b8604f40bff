# -*- coding: utf-8 -*-

"""
Multi-objective particle swarm optimizer over a boxed decision space.

Maximization convention throughout: vector a dominates b when a >= b in
every objective and a > b in at least one. Non-dominated candidates are
kept in an external archive; the swarm leader is drawn from the archive
by a crowding-distance tournament.

Determinism contract: every stochastic draw flows from the single
``numpy.random.Generator`` passed in, so identical (seed, config,
objective) reproduces the full trajectory bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MopsoConfig:
    swarm_size: int = 30
    inertia: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    v_max: float = 1.0
    archive_capacity: int | None = None  # None = unbounded
    max_iterations: int = 1000
    rng_seed: int = 0
    # Eq.-style scalar r1/r2 per particle per iteration by default;
    # per-dimension draws available as an option.
    r_per_dimension: bool = False
    leader_selection: str = "tournament"  # or "roulette"

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.inertia < 0 or self.c1 < 0 or self.c2 < 0:
            raise ValueError("inertia, c1, c2 must be non-negative")
        if not self.v_max > 0:
            raise ValueError("v_max must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.archive_capacity is not None and self.archive_capacity < 1:
            raise ValueError("archive_capacity must be >= 1 or None")
        if self.leader_selection not in ("tournament", "roulette"):
            raise ValueError("leader_selection must be 'tournament' or 'roulette'")


def dominates(a, b):
    """True iff a >= b everywhere and a > b somewhere (maximization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"objective length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def pareto_filter(values):
    """Indices of the non-dominated members of ``values``.

    Duplicates of a surviving value all survive. Incremental sweep; the
    test suite checks it against an all-pairs oracle.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2 or vals.shape[0] == 0:
        raise ValueError("pareto_filter needs a non-empty list of vectors")
    n = vals.shape[0]
    keep: list[int] = []  # indices of the current non-dominated set
    for i in range(n):
        v = vals[i]
        if keep:
            kept = vals[keep]
            ge = kept >= v
            gt = kept > v
            if np.any(ge.all(axis=1) & gt.any(axis=1)):
                continue  # dominated by a kept member
            beaten = (~gt).all(axis=1) & (~ge).any(axis=1)  # kept <= v and < somewhere
            if beaten.any():
                keep = [j for j, b in zip(keep, beaten) if not b]
        keep.append(i)
    return sorted(keep)


def crowding_distances(values):
    """Sum over objectives of normalized sorted-neighbor gaps.

    Extremes in any objective get +inf; an objective with zero range
    contributes nothing.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2 or vals.shape[0] == 0:
        raise ValueError("crowding_distances needs a non-empty list of vectors")
    n, m = vals.shape
    out = np.zeros(n)
    for q in range(m):
        col = vals[:, q]
        order = np.argsort(col, kind="stable")
        out[order[0]] = np.inf
        out[order[-1]] = np.inf
        span = col[order[-1]] - col[order[0]]
        if span > 0 and n > 2:
            gaps = (col[order[2:]] - col[order[:-2]]) / span
            out[order[1:-1]] += gaps
    return out


@dataclass
class Particle:
    position: np.ndarray  # flat decision vector (D,)
    velocity: np.ndarray
    best_position: np.ndarray
    best_value: np.ndarray


@dataclass
class ArchiveEntry:
    position: np.ndarray
    value: np.ndarray
    crowding: float = np.inf


class ParetoArchive:
    """External archive of mutually non-dominated (position, value) pairs.

    Crowding distances are recomputed after every mutation; when a
    bounded archive overflows, the entry with the smallest crowding is
    evicted (ties broken uniformly at random).
    """

    def __init__(self, capacity=None):
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be >= 1 or None")
        self.capacity = capacity
        self.entries: list[ArchiveEntry] = []
        self._values = np.empty((0, 0))

    def __len__(self):
        return len(self.entries)

    def values(self):
        """(K, M) array of the archive's objective vectors."""
        return self._values.copy()

    def positions(self):
        return np.array([e.position for e in self.entries])

    def _refresh(self):
        if self.entries:
            self._values = np.array([e.value for e in self.entries])
            crowd = crowding_distances(self._values)
            for e, c in zip(self.entries, crowd):
                e.crowding = float(c)
        else:
            self._values = np.empty((0, 0))

    def insert(self, position, value, rng=None):
        """Insert a candidate; returns True if it entered the archive."""
        value = np.asarray(value, dtype=float)
        if self.entries:
            vals = self._values
            if vals.shape[1] != value.size:
                raise ValueError("candidate objective length mismatch")
            ge = vals >= value
            gt = vals > value
            if np.any(ge.all(axis=1) & gt.any(axis=1)):
                return False  # dominated by an existing entry
            le = vals <= value
            lt = vals < value
            dominated_mask = le.all(axis=1) & lt.any(axis=1)
            if dominated_mask.any():
                self.entries = [
                    e for e, d in zip(self.entries, dominated_mask) if not d
                ]
        self.entries.append(
            ArchiveEntry(
                position=np.array(position, dtype=float, copy=True), value=value
            )
        )
        self._refresh()
        if self.capacity is not None and len(self.entries) > self.capacity:
            crowd = np.array([e.crowding for e in self.entries])
            minimal = np.flatnonzero(crowd == crowd.min())
            if minimal.size > 1:
                if rng is None:
                    rng = np.random.default_rng()
                evict = int(rng.choice(minimal))
            else:
                evict = int(minimal[0])
            del self.entries[evict]
            self._refresh()
        return True


def select_leader(archive, rng, method="tournament"):
    """Pick the swarm leader from the archive.

    Binary tournament on crowding distance: two uniform draws (with
    replacement), the larger crowding wins, ties broken uniformly.
    """
    n = len(archive)
    if n == 0:
        raise RuntimeError("cannot select a leader from an empty archive")
    if n == 1:
        return archive.entries[0].position.copy()
    if method == "tournament":
        i, j = rng.integers(0, n, size=2)
        a, b = archive.entries[int(i)], archive.entries[int(j)]
        if a.crowding > b.crowding:
            return a.position.copy()
        if b.crowding > a.crowding:
            return b.position.copy()
        return (a if rng.random() < 0.5 else b).position.copy()
    if method == "roulette":
        crowd = np.array([e.crowding for e in archive.entries])
        finite = crowd[np.isfinite(crowd)]
        cap = 2.0 * finite.max() if finite.size and finite.max() > 0 else 1.0
        weights = np.where(np.isfinite(crowd), crowd, cap)
        total = weights.sum()
        probs = np.full(n, 1.0 / n) if total <= 0 else weights / total
        return archive.entries[int(rng.choice(n, p=probs))].position.copy()
    raise ValueError(f"unknown leader selection method {method!r}")


def update_velocity(particle, leader, cfg, rng):
    """Inertia + cognitive + social velocity update, clamped to v_max."""
    if cfg.r_per_dimension:
        r1 = rng.random(particle.position.size)
        r2 = rng.random(particle.position.size)
    else:
        r1 = rng.random()
        r2 = rng.random()
    v = (
        cfg.inertia * particle.velocity
        + cfg.c1 * r1 * (particle.best_position - particle.position)
        + cfg.c2 * r2 * (leader - particle.position)
    )
    return np.clip(v, -cfg.v_max, cfg.v_max)


def update_position(particle, lower, upper):
    """Move by the current velocity, clamp into the box.

    A clamped coordinate has its velocity component zeroed so particles
    do not stick to the boundary.
    """
    raw = particle.position + particle.velocity
    clamped = np.clip(raw, lower, upper)
    hit = clamped != raw
    if hit.any():
        particle.velocity = np.where(hit, 0.0, particle.velocity)
    particle.position = clamped
    return clamped


def update_personal_best(particle, new_value):
    """Replace the personal best iff the new objective dominates it."""
    new_value = np.asarray(new_value, dtype=float)
    if dominates(new_value, particle.best_value):
        particle.best_position = particle.position.copy()
        particle.best_value = new_value
        return True
    return False


def init_swarm(objective, lower, upper, cfg, rng):
    """Uniform random swarm plus the archive seeded with its non-dominated set.

    Positions are uniform over the box, velocities uniform in
    [-v_max, v_max], and each personal best starts at the initial
    position with its objective value.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    particles = []
    values = []
    for _ in range(cfg.swarm_size):
        pos = rng.uniform(lower, upper)
        vel = rng.uniform(-cfg.v_max, cfg.v_max, size=dim)
        val = np.asarray(objective(pos), dtype=float)
        particles.append(
            Particle(
                position=pos,
                velocity=vel,
                best_position=pos.copy(),
                best_value=val,
            )
        )
        values.append(val)
    archive = ParetoArchive(capacity=cfg.archive_capacity)
    for i in pareto_filter(np.array(values)):
        archive.insert(particles[i].position, values[i], rng=rng)
    return particles, archive


def step(particles, archive, objective, lower, upper, cfg, rng):
    """One MOPSO iteration over every particle, in index order.

    Per particle: select leader, update velocity then position, evaluate
    the objective, update the personal best, offer the new point to the
    archive. Mutates ``particles`` and ``archive`` in place and returns
    them for convenience.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    for particle in particles:
        leader = select_leader(archive, rng, cfg.leader_selection)
        particle.velocity = update_velocity(particle, leader, cfg, rng)
        update_position(particle, lower, upper)
        value = np.asarray(objective(particle.position), dtype=float)
        update_personal_best(particle, value)
        archive.insert(particle.position, value, rng=rng)
    return particles, archive
