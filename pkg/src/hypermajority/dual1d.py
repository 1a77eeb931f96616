"""One-dimensional tools: the rightmost-1 front for even n, and backward
center paths for odd n.

Segments are zero-padded windows of width W whose hyperedges are the
blocks ``[u, u + n - 1]`` with ``0 <= u <= W - n``; an anchor index in an
:class:`~hypermajority.dynamics.EventLog` is therefore the block's left
end.  A vertex ``p`` sees every block it would see on the whole line only
when ``n - 1 <= p <= W - n``; leaving that range is a truncation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dynamics import EventLog, MajorityRule, generate_event_log, replay_final, replay_forward
from .lattice import Configuration, HyperedgeFamily, LatticeGeometry
from .rng import RngStream


class TruncationError(RuntimeError):
    """The dependence region of a 1D computation reached the segment boundary."""


def _require_even(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"the front process needs an even n >= 2, got {n}")


def _require_odd(n: int) -> None:
    if n < 3 or n % 2 == 0:
        raise ValueError(f"center paths need an odd n >= 3, got {n}")


def front_jump(n: int, offset: int) -> int:
    """Front displacement when the block anchored at ``X - n + 1 + offset`` is updated.

    That block holds ``k = n - offset`` ones; it turns all 1 (front moves to
    its right end) when ``2k >= n``, and all 0 (front moves to its left end
    minus one) otherwise.
    """
    k = n - offset
    return n - k if 2 * k >= n else -k


def front_increments(n: int) -> list[tuple[int, int]]:
    """``(jump, rate)`` for the n blocks containing the front; jumps 1 - n/2 .. n/2."""
    _require_even(n)
    return sorted((front_jump(n, off), 1) for off in range(n))


def front_drift(n: int) -> float:
    return float(sum(j * r for j, r in front_increments(n)))


@dataclass
class FrontTrajectory:
    times: np.ndarray
    positions: np.ndarray  # position after each change; positions[0] is X_0 at time 0
    horizon: float

    @property
    def final(self) -> int:
        return int(self.positions[-1])

    def at(self, t: float) -> int:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return int(self.positions[max(k, 0)])


def simulate_front(n: int, horizon: float, rng: RngStream, x0: int = 0) -> FrontTrajectory:
    """Jump chain of the rightmost 1 of a left-filled configuration (n even).

    Only the n blocks containing the front can move it, so the chain rings
    at total rate n and picks one of them uniformly.  Zero jumps are not
    recorded as change points.
    """
    _require_even(n)
    jumps = [front_jump(n, off) for off in range(n)]
    times = [0.0]
    pos = [x0]
    x = x0
    t = rng.exponential(n)
    while t <= horizon:
        j = jumps[rng.below(n)]
        if j:
            x += j
            times.append(t)
            pos.append(x)
        t += rng.exponential(n)
    return FrontTrajectory(np.array(times), np.array(pos, dtype=np.int64), float(horizon))


def front_from_log(n: int, log: EventLog, x0: int) -> FrontTrajectory:
    """The same jump chain driven by a full event log: events on blocks away
    from the front are discarded."""
    _require_even(n)
    times = [0.0]
    pos = [x0]
    x = x0
    for t, u in zip(log.times, log.anchors):
        off = int(u) - (x - n + 1)
        if 0 <= off < n:
            j = front_jump(n, off)
            if j:
                x += j
                times.append(float(t))
                pos.append(x)
    return FrontTrajectory(np.array(times), np.array(pos, dtype=np.int64), log.horizon)


def left_filled(width: int, front: int) -> Configuration:
    bits = np.zeros(width, dtype=np.uint8)
    bits[: front + 1] = 1
    return Configuration(LatticeGeometry.window((width,)), bits)


def engine_front(n: int, log: EventLog, width: int, x0: int) -> FrontTrajectory:
    """Front extracted from the full majority engine on a segment started left-filled at ``x0``.

    Raises AssertionError if some change point is not left-filled, and
    TruncationError if the front comes within n - 1 of either end.
    """
    traj = replay_forward(left_filled(width, x0), log, MajorityRule(n))
    times, pos = [], []
    for t, cfg in traj:
        ones = np.flatnonzero(cfg.bits)
        x = int(ones[-1]) if ones.size else -1
        assert ones.size == x + 1, f"configuration at t={t} is not left-filled"
        if not n - 1 <= x <= width - n:
            raise TruncationError(f"front reached {x} on a segment of width {width}")
        times.append(t)
        pos.append(x)
    return FrontTrajectory(np.array(times), np.array(pos, dtype=np.int64), log.horizon)


@dataclass
class CenterPath:
    """Backward center path from (x, T): ``positions[k]`` holds from backward time ``times[k]``."""

    x: int
    horizon: float
    times: np.ndarray  # backward times of encountered events, increasing
    positions: np.ndarray

    def at(self, s: float) -> int:
        k = int(np.searchsorted(self.times, s, side="right"))
        return self.x if k == 0 else int(self.positions[k - 1])

    @property
    def jumps(self) -> np.ndarray:
        prev = np.concatenate([[self.x], self.positions[:-1]])
        return self.positions - prev


def _segment_width(log: EventLog, n: int) -> int | None:
    if log.family is None:
        return None
    return log.family.geometry.shape[0]


def center_path(x: int, horizon: float, log: EventLog, n: int) -> CenterPath:
    """Going backward from time ``horizon``, jump to the center ``u + (n-1)/2``
    of every block ``[u, u+n-1]`` whose event the path meets."""
    _require_odd(n)
    s, p = _backend.kernels.center_path(
        np.ascontiguousarray(log.times), np.ascontiguousarray(log.anchors, dtype=np.int64),
        int(x), int(n), float(horizon),
    )
    width = _segment_width(log, n)
    if width is not None:
        lo = min(int(x), int(p.min()) if p.size else int(x))
        hi = max(int(x), int(p.max()) if p.size else int(x))
        if lo < n - 1 or hi > width - n:
            raise TruncationError(f"center path from {x} left the exact range of the segment")
    return CenterPath(int(x), float(horizon), s, p)


def first_meeting(px: CenterPath, py: CenterPath) -> float | None:
    """First backward time at which two center paths coincide, or None."""
    if px.x == py.x:
        return 0.0
    events = sorted(set(px.times.tolist()) | set(py.times.tolist()))
    for s in events:
        if px.at(s) == py.at(s):
            return s
    return None


def meeting_time(x: int, y: int, horizon: float, log: EventLog, n: int) -> float | None:
    if x == y:
        return 0.0
    return first_meeting(center_path(x, horizon, log, n), center_path(y, horizon, log, n))


@dataclass
class CouplingVerdict:
    S: float | None
    eta_x: int
    eta_y: int
    violated: bool


def dependence_interval(log: EventLog, lo: int, hi: int, n: int) -> tuple[int, int]:
    """Vertices at time 0 that can influence [lo, hi] at the log horizon."""
    return _backend.kernels.dependence_hull(
        np.ascontiguousarray(log.anchors, dtype=np.int64), int(lo), int(hi), int(n)
    )


def coupling_check(config0: Configuration, x: int, y: int, horizon: float, log: EventLog, n: int) -> CouplingVerdict:
    """Replay forward and compare with the meeting time of the center paths.

    Once the two paths have met before time 0 (S < T), the opinions at x
    and y at time T must agree; ``violated`` reports the opposite.
    """
    _require_odd(n)
    width = config0.geometry.shape[0]
    lo, hi = dependence_interval(log, min(x, y), max(x, y), n)
    if lo < n - 1 or hi > width - n:
        raise TruncationError(f"dependence interval [{lo}, {hi}] reaches the segment boundary")
    S = meeting_time(x, y, horizon, log, n)
    final = replay_final(config0, log, MajorityRule(n))
    ex, ey = final[(x,)], final[(y,)]
    violated = S is not None and S < horizon and ex != ey
    return CouplingVerdict(S, ex, ey, violated)


def segment_for(distance: int, n: int, horizon: float, factor: int = 8) -> tuple[int, int, int]:
    """(width, x, y) for a segment with half-width ``distance/2 + factor*n*T`` around the pair."""
    R = int(math.ceil(distance / 2 + factor * n * horizon))
    x = R + n
    y = x + distance
    return y + R + n, x, y


@dataclass
class CouplingRecord:
    replica: int
    S: float | None
    eta_x: int | None
    eta_y: int | None
    violated: bool
    truncated: bool


def coupling_replica(n: int, horizon: float, distance: int, rng: RngStream,
                     factor: int = 8, max_redraws: int = 20) -> list[CouplingRecord]:
    """One coupling replica; truncated attempts are kept as flagged records and re-drawn."""
    width, x, y = segment_for(distance, n, horizon, factor)
    geo = LatticeGeometry.window((width,))
    family = HyperedgeFamily(n, geo)
    out = []
    stream = rng
    for attempt in range(max_redraws + 1):
        config0 = Configuration.bernoulli(geo, stream)
        log = generate_event_log(family, horizon, stream)
        try:
            v = coupling_check(config0, x, y, horizon, log, n)
        except TruncationError:
            out.append(CouplingRecord(rng.replica, None, None, None, False, True))
            stream = rng.child(attempt)
            continue
        out.append(CouplingRecord(rng.replica, v.S, v.eta_x, v.eta_y, v.violated, False))
        return out
    raise TruncationError(f"replica {rng.replica}: {max_redraws} truncated attempts")
