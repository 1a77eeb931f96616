"""Estimators and replica drivers.

Replica ``k`` of an experiment draws from ``RngStream(seed, k)`` (or a
child of it, keyed by the experiment parameter when one seed drives
several parameter values), so results never depend on thread scheduling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np

from .dynamics import ABSORBED, RING, MajorityRule, Observer, Trajectory, UpdateRule, VoterRule, run
from .lattice import Configuration, LatticeGeometry
from .rng import RngStream

T = TypeVar("T")


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def map_replicas(fn: Callable[[int], T], replicas: int, threads: int | None = None) -> list[T]:
    """``[fn(0), ..., fn(replicas - 1)]``, computed on up to ``threads`` threads."""
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or replicas < 2:
        return [fn(k) for k in range(replicas)]
    with ThreadPoolExecutor(max_workers=min(threads, replicas)) as pool:
        return list(pool.map(fn, range(replicas)))


@dataclass
class Estimate:
    mean: float
    std_err: float
    replicas: int
    values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Estimate":
        v = np.asarray(values, dtype=float)
        n = len(v)
        if n == 0:
            return cls(math.nan, math.nan, 0, v)
        se = float(v.std(ddof=1) / math.sqrt(n)) if n >= 2 else math.nan
        return cls(float(v.mean()), se, n, v)

    def above(self, other: "Estimate", k: float = 2.0) -> bool:
        """True when this mean exceeds ``other``'s by more than k combined standard errors."""
        return self.mean - other.mean > k * math.hypot(self.std_err, other.std_err)


def density(config: Configuration) -> float:
    return config.count() / config.geometry.size


def occupation_time(traj: Trajectory, vertex) -> float:
    """Fraction of [0, horizon] that ``vertex`` spends in state 1."""
    T = traj.horizon
    if T <= 0:
        return float(traj.configs[0][vertex])
    total = 0.0
    for k, (t, cfg) in enumerate(traj):
        end = traj.times[k + 1] if k + 1 < len(traj) else T
        total += cfg[vertex] * (min(end, T) - t)
    return total / T


def make_rule(model: str, n: int | None) -> UpdateRule:
    if model == "majority":
        if n is None:
            raise ValueError("the majority model needs n")
        return MajorityRule(n)
    if model == "voter":
        return VoterRule()
    raise ValueError(f"unknown model {model!r}")


def _pair_disagreement(dist: int, axis: int = 0):
    """Fraction of vertices z with state(z) != state(z + dist * e_axis) on a torus."""

    def fn(config: Configuration) -> float:
        b = config.bits
        return float(np.mean(b != np.roll(b, -dist, axis=axis)))

    return fn


def disagreement_probability(
    model: str,
    d: int,
    n: int | None,
    dist: int,
    times: Sequence[float],
    replicas: int,
    seed: int,
    side: int | None = None,
    threads: int | None = None,
    p: float = 0.5,
) -> list[Estimate]:
    """P(state(x) != state(x + dist e_1)) at each requested time, from a Bernoulli(p) start.

    Each replica contributes the fraction of disagreeing pairs over all
    translates of the pair, which has the same mean by translation
    invariance of the torus.  The torus side defaults to
    ``max(20 * dist, 200)`` and may not be smaller than ``20 * dist``.
    """
    rule = make_rule(model, n)
    if side is None:
        side = max(20 * dist, 200)
    if side < 20 * dist:
        raise ValueError(f"torus side {side} is below 20 x pair distance")
    times = [float(t) for t in times]
    if dist == 0:
        return [Estimate(0.0, 0.0, replicas, np.zeros(replicas)) for _ in times]
    geo = LatticeGeometry.torus(side, d)
    horizon = max(times)

    def one(k: int) -> list[float]:
        rng = RngStream(seed, k).child(dist)
        c0 = Configuration.bernoulli(geo, rng, p)
        ob = Observer(times, _pair_disagreement(dist))
        run(c0, rule, horizon, rng, [ob])
        return [v for _, v, _ in ob.records]

    rows = map_replicas(one, replicas, threads)
    return [Estimate.from_values([r[i] for r in rows]) for i in range(len(times))]


def final_densities(model: str, d: int, n: int | None, side: int, horizon: float,
                    replicas: int, seed: int, threads: int | None = None, p: float = 0.5) -> np.ndarray:
    """Density at ``horizon`` of independent torus runs from a Bernoulli(p) start."""
    rule = make_rule(model, n)
    geo = LatticeGeometry.torus(side, d)

    def one(k: int) -> float:
        rng = RngStream(seed, k)
        c0 = Configuration.bernoulli(geo, rng, p)
        return density(run(c0, rule, horizon, rng, stop_when_absorbed=True).final)

    return np.array(map_replicas(one, replicas, threads))


@dataclass
class ExtinctionRecord:
    m: int
    replica: int
    time: float  # extinction time, or nan when flagged
    flag: str  # "ok", "boundary" or "cap"


@dataclass
class ExtinctionResult:
    m: int
    estimate: Estimate  # over unflagged replicas
    records: list[ExtinctionRecord]

    @property
    def flagged(self) -> int:
        return sum(r.flag != "ok" for r in self.records)

    @property
    def flagged_fraction(self) -> float:
        return self.flagged / len(self.records) if self.records else 0.0


def extinction_replica(m: int, n: int, margin: int, cap: float, rng: RngStream) -> tuple[float, str]:
    side = m + 2 * margin
    geo = LatticeGeometry.window((side, side))
    c0 = Configuration(geo)
    c0.bits[margin : margin + m, margin : margin + m] = 1
    res = run(c0, MajorityRule(n), cap, rng, stop_when_absorbed=True, ring=n - 1)
    if res.status == RING:
        return math.nan, "boundary"
    if res.status == ABSORBED and res.final.count() == 0:
        return res.t_last, "ok"
    return math.nan, "cap"


def extinction_time(m: int, replicas: int, seed: int, n: int = 3, margin: int | None = None,
                    cap: float = 1000.0, threads: int | None = None) -> ExtinctionResult:
    """Time for an m x m square of 1s to die out on a zero-padded window.

    The window has side ``m + 2 * margin`` (margin defaults to 2m).  Replicas
    in which a 1 is written within n - 1 cells of the window edge are
    flagged ``boundary`` and excluded, as are replicas still alive at
    ``cap`` (flag ``cap``).  Replica k uses ``RngStream(seed, k).child(m)``.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    margin = 2 * m if margin is None else margin
    if margin < n - 1:
        raise ValueError(f"margin must be at least n - 1 = {n - 1}")

    def one(k: int) -> ExtinctionRecord:
        t, flag = extinction_replica(m, n, margin, cap, RngStream(seed, k).child(m))
        return ExtinctionRecord(m, k, t, flag)

    recs = map_replicas(one, replicas, threads)
    est = Estimate.from_values([r.time for r in recs if r.flag == "ok"])
    return ExtinctionResult(m, est, recs)
