"""Exact continuous-time spin dynamics on block hypergraphs.

Events are scheduled by superposition: one exponential clock of rate M
(the number of hyperedges, or of vertices for the voter baseline) plus a
uniformly chosen hyperedge.  This is equal in law to independent rate-1
Poisson clocks on every hyperedge.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from . import _backend
from .lattice import Configuration, Coord, HyperedgeFamily, LatticeGeometry, count_ones
from .rng import RngStream

REACHED, ABSORBED, RING = 0, 1, 2


class UpdateRule:
    """Replacement of a hyperedge's contents when its clock rings.

    Subclasses provide :meth:`family` (the hyperedges, or sites) and
    :meth:`apply`, which mutates ``config`` in place and returns True if the
    configuration changed.
    """

    name = "abstract"

    def family(self, geometry: LatticeGeometry):
        raise NotImplementedError

    def apply(self, config: Configuration, anchor: Coord, rng: RngStream | None = None) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class MajorityRule(UpdateRule):
    """Block becomes all 1 if at least half its vertices are 1, else all 0."""

    n: int
    name = "majority"

    def family(self, geometry: LatticeGeometry) -> HyperedgeFamily:
        return HyperedgeFamily(self.n, geometry)

    def apply(self, config, anchor, rng=None) -> bool:
        fam = self.family(config.geometry)
        idx = fam.block_index(anchor)
        block = config.bits[idx]
        k = int(block.sum())
        v = 1 if 2 * k >= fam.block_size else 0
        if (v == 1 and k == fam.block_size) or (v == 0 and k == 0):
            return False
        config.bits[idx] = v
        return True


@dataclass(frozen=True)
class VoterRule(UpdateRule):
    """A vertex copies a uniformly chosen nearest neighbour (torus only)."""

    name = "voter"

    def family(self, geometry: LatticeGeometry):
        if not geometry.periodic:
            raise ValueError("the voter baseline runs on a torus")
        return geometry

    def apply(self, config, anchor, rng=None) -> bool:
        if rng is None:
            raise ValueError("voter updates need a random stream")
        g = config.geometry
        k = rng.below(2 * g.d)
        axis, sign = divmod(k, 2)
        nb = list(anchor)
        nb[axis] += -1 if sign else 1
        new = config[nb]
        changed = config[anchor] != new
        config[anchor] = new
        return changed


def majority_update(config: Configuration, anchor: Sequence[int], family: HyperedgeFamily) -> Configuration:
    """Copy of ``config`` after a majority update of the block at ``anchor``; ties go to 1."""
    out = config.copy()
    k = count_ones(config, anchor, family)
    out.bits[family.block_index(anchor)] = 1 if 2 * k >= family.block_size else 0
    return out


def voter_update(config: Configuration, vertex: Sequence[int], rng: RngStream) -> Configuration:
    out = config.copy()
    VoterRule().apply(out, tuple(vertex), rng)
    return out


@dataclass
class EventLog:
    """Time-ordered Poisson events ``(time, anchor index)`` on (0, horizon]."""

    times: np.ndarray
    anchors: np.ndarray
    horizon: float
    family: HyperedgeFamily | None = None

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[tuple[float, Coord | int]]:
        for t, a in zip(self.times, self.anchors):
            yield float(t), (self.family.anchor_at(a) if self.family is not None else int(a))

    def to_csv(self) -> str:
        """Debug dump with header ``time,anchor_x[,anchor_y]``; times in round-trip precision."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.family.geometry.d if self.family is not None else 1
        w.writerow(["time", "anchor_x", "anchor_y"][: d + 1])
        for t, a in self:
            coords = a if isinstance(a, tuple) else (a,)
            w.writerow([repr(t), *coords])
        return buf.getvalue()


def generate_event_log(hyperedge_count: int | HyperedgeFamily, horizon: float, rng: RngStream) -> EventLog:
    """Superposition of rate-1 Poisson processes on each hyperedge over (0, horizon]."""
    family = None
    M = hyperedge_count
    if isinstance(hyperedge_count, HyperedgeFamily):
        family = hyperedge_count
        M = len(family)
    if M < 1:
        raise ValueError("need at least one hyperedge")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    times, anchors = _backend.kernels.generate_log(int(M), float(horizon), rng)
    return EventLog(times, anchors, float(horizon), family)


def _kernel_shape(config: Configuration, family: HyperedgeFamily):
    g = config.geometry
    if g.d == 1:
        return g.shape[0], 1, family.n, 1
    return g.shape[0], g.shape[1], family.n, family.n


@dataclass
class Trajectory:
    """Change points ``(time, configuration)`` of a path on [0, horizon]."""

    times: list[float]
    configs: list[Configuration]
    horizon: float

    def __iter__(self):
        return iter(zip(self.times, self.configs))

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, k):
        return self.times[k], self.configs[k]

    def at(self, t: float) -> Configuration:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.configs[max(k, 0)]

    @property
    def final(self) -> Configuration:
        return self.configs[-1]


def replay_forward(config0: Configuration, log: EventLog, rule: UpdateRule) -> Trajectory:
    """Apply ``rule`` at every logged event; keeps only the change points."""
    family = rule.family(config0.geometry)
    if log.family is not None and log.family != family:
        raise ValueError("log and configuration have different hyperedge families")
    times: list[float] = [0.0]
    configs: list[Configuration] = [config0.copy()]
    if isinstance(rule, MajorityRule):
        state = config0.copy()
        W, H, n1, n2 = _kernel_shape(state, family)
        flat = state.bits.reshape(-1)
        changed = np.zeros(len(log), dtype=np.uint8)
        anchors = np.ascontiguousarray(log.anchors, dtype=np.int64)
        # replay once to find change points, then rebuild snapshots only there
        _backend.kernels.replay_majority(flat, W, H, n1, n2, family.geometry.periodic, anchors, changed)
        cur = config0.copy()
        cur_flat = cur.bits.reshape(-1)
        start = 0
        for e in np.flatnonzero(changed):
            _backend.kernels.replay_majority(
                cur_flat, W, H, n1, n2, family.geometry.periodic, anchors[start : e + 1]
            )
            start = e + 1
            times.append(float(log.times[e]))
            configs.append(cur.copy())
        return Trajectory(times, configs, log.horizon)
    cur = config0.copy()
    for t, a in zip(log.times, log.anchors):
        if rule.apply(cur, family.anchor_at(a)):
            times.append(float(t))
            configs.append(cur.copy())
    return Trajectory(times, configs, log.horizon)


def replay_final(config0: Configuration, log: EventLog, rule: MajorityRule) -> Configuration:
    """Final configuration of :func:`replay_forward` without storing the path."""
    family = rule.family(config0.geometry)
    out = config0.copy()
    W, H, n1, n2 = _kernel_shape(out, family)
    _backend.kernels.replay_majority(
        out.bits.reshape(-1), W, H, n1, n2, family.geometry.periodic,
        np.ascontiguousarray(log.anchors, dtype=np.int64),
    )
    return out


@dataclass
class Observer:
    """Samples ``fn(configuration)`` at the requested times.

    Records are ``(time, value, clipped)``; ``clipped`` marks a requested
    time outside [0, T], for which the configuration at T is reported.
    """

    times: Sequence[float]
    fn: Callable[[Configuration], Any] = Configuration.copy
    records: list = field(default_factory=list)


@dataclass
class RunResult:
    final: Configuration
    outputs: list[list]
    events: int
    status: int
    t_last: float  # time of the last event that was drawn and applied, -1 if none

    @property
    def absorbed(self) -> bool:
        return self.status == ABSORBED

    @property
    def ring_hit(self) -> bool:
        return self.status == RING


def run(
    config0: Configuration,
    rule: UpdateRule,
    horizon: float,
    rng: RngStream,
    observers: Sequence[Observer] = (),
    *,
    stop_when_absorbed: bool = False,
    ring: int = 0,
) -> RunResult:
    """Simulate to ``horizon`` without materialising the event log.

    With the same stream, the final configuration equals
    ``replay_forward(config0, generate_event_log(M, horizon, rng), rule)``.
    ``ring > 0`` (windows only) stops the run as soon as a state-1 vertex
    is written within ``ring`` cells of the window edge.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    g = config0.geometry
    if ring and g.periodic:
        raise ValueError("a boundary ring only makes sense on a window")
    config = config0.copy()
    flat = config.bits.reshape(-1)
    ones = config.count()
    k = _backend.kernels
    if isinstance(rule, MajorityRule):
        family = rule.family(g)
        W, H, n1, n2 = _kernel_shape(config, family)

        def advance(t_next, t_stop, ones):
            return k.majority_advance(flat, W, H, n1, n2, g.periodic, rng, t_next, t_stop, ones,
                                      ring, ring if g.d == 2 else 0, stop_when_absorbed)
    elif isinstance(rule, VoterRule):
        rule.family(g)
        W, H = (g.shape[0], 1) if g.d == 1 else g.shape

        def advance(t_next, t_stop, ones):
            return k.voter_advance(flat, W, H, rng, t_next, t_stop, ones, stop_when_absorbed)
    else:
        raise TypeError(f"no engine for rule {rule!r}")

    requests = sorted({float(t) for ob in observers for t in ob.times if 0 <= t <= horizon})
    t_next = -1.0
    t_last = -1.0
    events = 0
    status = REACHED
    for stop in [*requests, float(horizon)]:
        if status == REACHED:
            tl, t_next, ones, ne, status = advance(t_next, stop, ones)
            events += ne
            if ne:
                t_last = tl
        if stop in requests:
            for ob in observers:
                for t in ob.times:
                    if float(t) == stop:
                        ob.records.append((float(t), ob.fn(config), False))
    for ob in observers:
        for t in ob.times:
            if not 0 <= t <= horizon:
                ob.records.append((float(t), ob.fn(config), True))
        ob.records.sort(key=lambda r: r[0])
    return RunResult(config, [ob.records for ob in observers], events, status, t_last)


__all__ = [
    "ABSORBED", "EventLog", "MajorityRule", "Observer", "REACHED", "RING", "RunResult",
    "Trajectory", "UpdateRule", "VoterRule", "generate_event_log", "majority_update",
    "replay_final", "replay_forward", "run", "voter_update",
]
