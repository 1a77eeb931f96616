"""The three-row slice process of the n = 2 planar model and its interface walk.

State: the fronts ``(X(-1), X(0), X(1))``; row r is exactly ``{x1 <= X(r)}``
and rows |r| >= 2 are empty.  The state-changing 2x2 updates are:

* removal: a block holding a single 1 (a row front next to a shorter or
  empty neighbouring row) clears it, so that front moves back by one;
* gain: a block inside the three rows, with both rows filled up to its left
  column and at least two 1s, fills both rows up to its right column.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _backend, _pykernels
from .rng import RngStream


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class SliceState:
    xm: int  # X(-1)
    x0: int  # X(0)
    xp: int  # X(1)

    @property
    def reachable(self) -> bool:
        """False when the middle front is strictly behind both outer ones.

        Such triples never occur along the dynamics started from a reachable
        state, but the update catalog and the functionals are still defined
        on them.
        """
        return not (self.x0 < self.xm and self.x0 < self.xp)

    @classmethod
    def from_interface(cls, a: int, b: int, offset: int = 0) -> "SliceState":
        """Representative with X(0) = offset, X(1) - X(0) = a, X(-1) - X(0) = b."""
        return cls(offset + b, offset, offset + a)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.xm, self.x0, self.xp)

    def front(self, row: int) -> int | None:
        return {-1: self.xm, 0: self.x0, 1: self.xp}.get(row)


@dataclass(frozen=True)
class SliceUpdate:
    anchor: tuple[int, int]  # lower-left cell (column, row) of the 2x2 block
    rate: int
    successor: SliceState
    d_sigma: int
    d_gap: int


def sigma(s: SliceState) -> int:
    return s.xm + s.x0 + s.xp


def gap(s: SliceState) -> int:
    return abs(s.xp - s.x0) + abs(s.xm - s.x0)


def interface(s: SliceState) -> tuple[int, int]:
    """``(X(1) - X(0), X(-1) - X(0))`` with the two entries sorted."""
    a, b = s.xp - s.x0, s.xm - s.x0
    return (a, b) if a <= b else (b, a)


def good_count(s: SliceState) -> int:
    """How many of the two outer fronts are not exactly one step from the middle one."""
    return int(abs(s.xp - s.x0) != 1) + int(abs(s.xm - s.x0) != 1)


def active_updates(s: SliceState) -> list[SliceUpdate]:
    """Every 2x2 update that changes ``s``, sorted by anchor (column, then row)."""
    out = []
    for col, row, xm, x0, xp in _pykernels.slice_moves(s.xm, s.x0, s.xp):
        nxt = SliceState(xm, x0, xp)
        out.append(SliceUpdate((col, row), 1, nxt, sigma(nxt) - sigma(s), gap(nxt) - gap(s)))
    return out


def drift_sigma(s: SliceState) -> Fraction:
    return Fraction(sum(u.rate * u.d_sigma for u in active_updates(s)))


def drift_gap(s: SliceState) -> Fraction:
    if gap(s) < 2:
        raise PreconditionError(f"gap drift is only bounded for G >= 2, got G = {gap(s)} at {s.as_tuple()}")
    return Fraction(sum(u.rate * u.d_gap for u in active_updates(s)))


def valid_states(radius: int) -> list[SliceState]:
    """All reachable states with X(0) = 0 and |X(1)|, |X(-1)| <= radius."""
    out = []
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            s = SliceState.from_interface(a, b)
            if s.reachable:
                out.append(s)
    return out


@dataclass
class SliceTrajectory:
    times: np.ndarray  # change points, times[0] = 0
    states: np.ndarray  # (k, 3) int64 rows (X(-1), X(0), X(1))
    horizon: float

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> SliceState:
        return SliceState(*map(int, self.states[-1]))

    def at(self, t: float) -> SliceState:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return SliceState(*map(int, self.states[max(k, 0)]))

    def sigma(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def gap(self) -> np.ndarray:
        x = self.states
        return np.abs(x[:, 2] - x[:, 1]) + np.abs(x[:, 0] - x[:, 1])


def simulate_slice(horizon: float, rng: RngStream, start: SliceState = SliceState(0, 0, 0)) -> SliceTrajectory:
    """Jump chain at total rate ``len(active_updates)``, one uniformly chosen update per jump."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    X = np.array(start.as_tuple(), dtype=np.int64)
    cap = max(64, int(8 * horizon) + 16)
    out_t = np.empty(cap + 1)
    out_x = np.empty((cap + 1, 3), dtype=np.int64)
    out_t[0] = 0.0
    out_x[0] = X
    k = 1
    t_next = -1.0
    while True:
        t_next, k, status = _backend.kernels.slice_advance(X, rng, t_next, float(horizon), out_t, out_x, k)
        if status != _backend.kernels.FULL:
            break
        out_t = np.concatenate([out_t, np.empty(len(out_t))])
        out_x = np.concatenate([out_x, np.empty_like(out_x)])
    return SliceTrajectory(out_t[:k].copy(), out_x[:k].copy(), float(horizon))


def canonical(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def interface_rates(iface: tuple[int, int], offset: int = 0) -> list[tuple[tuple[int, int], int]]:
    """Transition rates of the interface walk out of ``iface``, sorted by successor.

    Computed from the slice catalog of the representative state at
    horizontal ``offset``; the result does not depend on the offset.
    """
    a, b = canonical(*iface)
    rates: dict[tuple[int, int], int] = defaultdict(int)
    for u in active_updates(SliceState.from_interface(a, b, offset)):
        rates[interface(u.successor)] += u.rate
    return sorted(rates.items())


@lru_cache(maxsize=None)
def classify(iface: tuple[int, int]) -> str:
    """'good' (sum drift +2), 'bad' (-2) or 'neutral' (0)."""
    d = drift_sigma(SliceState.from_interface(*canonical(*iface)))
    return {2: "good", -2: "bad"}.get(int(d), "neutral")


@lru_cache(maxsize=None)
def _jump_table(iface: tuple[int, int]):
    rates = interface_rates(iface)
    succ = [s for s, _ in rates]
    cum = np.cumsum([r for _, r in rates]).tolist()
    return succ, cum


def good_time_replica(iface: tuple[int, int], rng: RngStream, cap: float) -> tuple[float, bool]:
    """Time spent on good interfaces before the first bad one, and whether ``cap`` was hit."""
    cur = canonical(*iface)
    t = 0.0
    acc = 0.0
    while classify(cur) != "bad":  # interfaces are canonical here, so the cache hits
        succ, cum = _jump_table(cur)
        dt = rng.exponential(cum[-1])
        if t + dt > cap:
            if classify(cur) == "good":
                acc += cap - t
            return acc, True
        t += dt
        if classify(cur) == "good":
            acc += dt
        r = rng.below(cum[-1])
        cur = succ[next(i for i, c in enumerate(cum) if r < c)]
    return acc, False


@dataclass
class GoodTimeEstimate:
    iface: tuple[int, int]
    mean: float
    std_err: float
    replicas: int
    cap_hits: int
    values: np.ndarray


def estimate_good_time(iface: tuple[int, int], replicas: int, seed: int, cap: float = 1000.0) -> GoodTimeEstimate:
    """Monte Carlo estimate of the expected good time started from a non-bad interface.

    Replica k uses ``RngStream(seed, k)``.  Capped replicas keep their
    truncated value and are counted in ``cap_hits``.
    """
    iface = canonical(*iface)
    if classify(iface) == "bad":
        raise PreconditionError(f"interface {iface} is bad; the good time is defined for non-bad starts")
    if replicas < 2:
        raise ValueError("need at least two replicas for a standard error")
    vals = np.empty(replicas)
    hits = 0
    for k in range(replicas):
        vals[k], hit = good_time_replica(iface, RngStream(seed, k), cap)
        hits += hit
    se = float(vals.std(ddof=1) / np.sqrt(replicas))
    return GoodTimeEstimate(iface, float(vals.mean()), se, replicas, hits, vals)


def drift_table(radius: int = 6) -> list[dict]:
    """Rows ``a, b, drift_sigma, drift_gap, catalog_size`` over all states of the given radius.

    ``drift_gap`` is None where G < 2.
    """
    rows = []
    for s in valid_states(radius):
        a, b = s.xp - s.x0, s.xm - s.x0
        dg = drift_gap(s) if gap(s) >= 2 else None
        rows.append(dict(a=a, b=b, drift_sigma=drift_sigma(s), drift_gap=dg,
                         catalog_size=len(active_updates(s))))
    return rows
