"""Pure-Python reference kernels.

Same signatures and the same random-word consumption as ``_ckernels``;
the two must agree bit for bit (see tests/test_kernels.py).  States are
flat uint8 arrays of length ``W * H`` indexed ``i * H + j``; 1D lattices
use ``H == 1`` and a block height ``n2 == 1``.

Status codes returned by the advance kernels: 0 horizon reached,
1 absorbed (all 0 or all 1), 2 a state-1 vertex entered the boundary
ring of a zero-padded window, 3 output buffer full.
"""
from __future__ import annotations

import math

import numpy as np

NAME = "python"

_MASK64 = (1 << 64) - 1
_TWO_M53 = 1.0 / 9007199254740992.0

REACHED, ABSORBED, RING, FULL = 0, 1, 2, 3


def _below(raw, m):
    prod = raw() * m
    low = prod & _MASK64
    if low < m:
        threshold = ((1 << 64) - m) % m
        while low < threshold:
            prod = raw() * m
            low = prod & _MASK64
    return prod >> 64


def _gap(raw, rate):
    return -math.log(((raw() >> 11) + 0.5) * _TWO_M53) / rate


def _apply_block(state, W, H, i, j, n1, n2, periodic):
    """Majority update of one block (``state`` a uint8 memoryview); returns the change in 1s."""
    size = n1 * n2
    k = 0
    for di in range(n1):
        ii = (i + di) % W if periodic else i + di
        base = ii * H
        for dj in range(n2):
            jj = (j + dj) % H if periodic else j + dj
            k += state[base + jj]
    if 2 * k >= size:
        if k == size:
            return 0
        v = 1
        delta = size - k
    else:
        if k == 0:
            return 0
        v = 0
        delta = -k
    for di in range(n1):
        ii = (i + di) % W if periodic else i + di
        base = ii * H
        for dj in range(n2):
            jj = (j + dj) % H if periodic else j + dj
            state[base + jj] = v
    return delta


def majority_advance(state, W, H, n1, n2, periodic, rng, t_next, t_stop, ones,
                     ring1=0, ring2=0, stop_absorbed=True):
    """Run majority events with times in (now, t_stop].

    ``t_next`` is the already drawn time of the next event, or a negative
    number to draw it from time 0.  Returns ``(t_last, t_next, ones,
    events, status)`` where ``t_last`` is the time of the last applied
    event (-1 if none).
    """
    raw = rng.bitgen.random_raw
    state = memoryview(state)
    A1 = W if periodic else W - n1 + 1
    A2 = H if periodic else H - n2 + 1
    M = A1 * A2
    N = W * H
    t_last = -1.0
    events = 0
    if t_next < 0:
        t_next = _gap(raw, M)
    while t_next <= t_stop:
        a = _below(raw, M)
        i = a // A2
        j = a - i * A2
        delta = _apply_block(state, W, H, i, j, n1, n2, periodic)
        ones += delta
        t_last = t_next
        events += 1
        t_next = t_last + _gap(raw, M)
        if delta > 0 and (ring1 or ring2):
            if (i < ring1 or i + n1 > W - ring1
                    or (H > 1 and (j < ring2 or j + n2 > H - ring2))):
                return t_last, t_next, ones, events, RING
        if stop_absorbed and (ones == 0 or ones == N):
            return t_last, t_next, ones, events, ABSORBED
    return t_last, t_next, ones, events, REACHED


def voter_advance(state, W, H, rng, t_next, t_stop, ones, stop_absorbed=True):
    """Voter events (rate 1 per vertex, copy a uniform nearest neighbour) on a torus."""
    raw = rng.bitgen.random_raw
    state = memoryview(state)
    N = W * H
    deg = 2 if H == 1 else 4
    t_last = -1.0
    events = 0
    if t_next < 0:
        t_next = _gap(raw, N)
    while t_next <= t_stop:
        v = _below(raw, N)
        k = _below(raw, deg)
        i = v // H
        j = v - i * H
        if k == 0:
            u = ((i + 1) % W) * H + j
        elif k == 1:
            u = ((i - 1) % W) * H + j
        elif k == 2:
            u = i * H + (j + 1) % H
        else:
            u = i * H + (j - 1) % H
        new = state[u]
        if state[v] != new:
            ones += 1 if new else -1
            state[v] = new
        t_last = t_next
        events += 1
        t_next = t_last + _gap(raw, N)
        if stop_absorbed and (ones == 0 or ones == N):
            return t_last, t_next, ones, events, ABSORBED
    return t_last, t_next, ones, events, REACHED


def generate_log(M, T, rng):
    """Superposed Poisson events on ``M`` hyperedges over (0, T]."""
    raw = rng.bitgen.random_raw
    times = []
    anchors = []
    t = _gap(raw, M)
    while t <= T:
        anchors.append(_below(raw, M))
        times.append(t)
        t = t + _gap(raw, M)
    return np.array(times, dtype=np.float64), np.array(anchors, dtype=np.int64)


def replay_majority(state, W, H, n1, n2, periodic, anchors, changed=None):
    """Apply logged majority events in order; returns the number of effective events.

    When ``changed`` (uint8, one per event) is given it is filled with 1 for
    events that altered the configuration.
    """
    A2 = H if periodic else H - n2 + 1
    state = memoryview(state)
    count = 0
    for e in range(len(anchors)):
        a = int(anchors[e])
        i = a // A2
        j = a - i * A2
        delta = _apply_block(state, W, H, i, j, n1, n2, periodic)
        hit = delta != 0
        if changed is not None:
            changed[e] = hit
        count += hit
    return count


def center_path(times, anchors, x, n, T):
    """Backward center path in 1D from (x, T); returns (backward times, positions)."""
    half = (n - 1) // 2
    p = int(x)
    s_out = []
    p_out = []
    for e in range(len(anchors) - 1, -1, -1):
        u = int(anchors[e])
        if u <= p <= u + n - 1:
            p = u + half
            s_out.append(T - float(times[e]))
            p_out.append(p)
    return np.array(s_out, dtype=np.float64), np.array(p_out, dtype=np.int64)


def dependence_hull(anchors, lo, hi, n):
    """Backward growth of the interval of vertices whose past can influence [lo, hi]."""
    lo = int(lo)
    hi = int(hi)
    for e in range(len(anchors) - 1, -1, -1):
        u = int(anchors[e])
        if u <= hi and u + n - 1 >= lo:
            if u < lo:
                lo = u
            if u + n - 1 > hi:
                hi = u + n - 1
    return lo, hi


def slice_moves(xm, x0, xp):
    """State-changing updates of the slice process, ordered by anchor.

    Returns a list of ``(anchor_col, anchor_row, new_xm, new_x0, new_xp)``.
    """
    X = {-1: xm, 0: x0, 1: xp}
    NEG = None
    moves = []

    def below_front(r, other):
        o = X.get(other, NEG)
        return o is None or o < X[r]

    for r in (-1, 0, 1):
        c = X[r]
        for row0, other in ((r - 1, r - 1), (r, r + 1)):
            if below_front(r, other):
                nx = dict(X)
                nx[r] = c - 1
                moves.append((c, row0, nx[-1], nx[0], nx[1]))
    for r in (-1, 0):
        p, q = X[r], X[r + 1]
        mn = min(p, q)
        cols = [mn, mn + 1] if abs(p - q) >= 2 else [mn]
        for c in cols:
            nx = dict(X)
            nx[r] = max(p, c + 1)
            nx[r + 1] = max(q, c + 1)
            moves.append((c, r, nx[-1], nx[0], nx[1]))
    moves.sort(key=lambda m: (m[0], m[1]))
    return moves


def slice_advance(X, rng, t_next, t_stop, out_t, out_x, start=0):
    """Slice jump chain; writes change points into ``out_t``/``out_x`` from ``start``.

    ``X`` is an int64 array (X(-1), X(0), X(1)) updated in place.  Returns
    ``(t_next, count, status)`` with status FULL when the buffers filled.
    """
    raw = rng.bitgen.random_raw
    cap = len(out_t)
    k = start
    moves = slice_moves(int(X[0]), int(X[1]), int(X[2]))
    if t_next < 0:
        t_next = _gap(raw, len(moves))
    while t_next <= t_stop:
        if k >= cap:
            return t_next, k, FULL
        m = moves[_below(raw, len(moves))]
        X[0], X[1], X[2] = m[2], m[3], m[4]
        out_t[k] = t_next
        out_x[k, 0] = m[2]
        out_x[k, 1] = m[3]
        out_x[k, 2] = m[4]
        k += 1
        moves = slice_moves(m[2], m[3], m[4])
        t_next = t_next + _gap(raw, len(moves))
    return t_next, k, REACHED
