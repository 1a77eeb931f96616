# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; a line-for-line port of ``_pykernels``.

Random words come from the numpy PCG64 owned by each ``RngStream``, read
through the BitGenerator capsule, so the draws match the Python kernels
exactly.  Loops release the GIL.
"""
import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log
from libc.stdint cimport int64_t, uint8_t, uint64_t
from numpy.random cimport bitgen_t

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t hm_below(bitgen_t *bg, uint64_t m) {
        unsigned __int128 prod = (unsigned __int128)bg->next_uint64(bg->state) * m;
        uint64_t low = (uint64_t)prod;
        if (low < m) {
            uint64_t threshold = (0 - m) % m;
            while (low < threshold) {
                prod = (unsigned __int128)bg->next_uint64(bg->state) * m;
                low = (uint64_t)prod;
            }
        }
        return (uint64_t)(prod >> 64);
    }
    """
    uint64_t hm_below(bitgen_t *bg, uint64_t m) nogil

NAME = "cython"

cdef enum:
    S_REACHED = 0
    S_ABSORBED = 1
    S_RING = 2
    S_FULL = 3

REACHED, ABSORBED, RING, FULL = S_REACHED, S_ABSORBED, S_RING, S_FULL


cdef bitgen_t* _bitgen(object rng) except NULL:
    capsule = rng.bitgen.capsule
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline double _gap(bitgen_t *bg, double rate) noexcept nogil:
    cdef uint64_t x = bg.next_uint64(bg.state)
    return -log((<double>(x >> 11) + 0.5) * 1.1102230246251565e-16) / rate  # 2**-53


cdef inline Py_ssize_t _wrap(Py_ssize_t a, Py_ssize_t m) noexcept nogil:
    a = a % m
    if a < 0:
        a += m
    return a


cdef inline int64_t _apply_block(uint8_t[::1] state, Py_ssize_t W, Py_ssize_t H,
                                 Py_ssize_t i, Py_ssize_t j, int n1, int n2,
                                 bint periodic) noexcept nogil:
    cdef int64_t size = n1 * n2
    cdef int64_t k = 0, delta
    cdef Py_ssize_t di, dj, ii, jj, base
    cdef uint8_t v
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


def majority_advance(uint8_t[::1] state, Py_ssize_t W, Py_ssize_t H, int n1, int n2,
                     bint periodic, rng, double t_next, double t_stop, int64_t ones,
                     Py_ssize_t ring1=0, Py_ssize_t ring2=0, bint stop_absorbed=True):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t A1 = W if periodic else W - n1 + 1
    cdef Py_ssize_t A2 = H if periodic else H - n2 + 1
    cdef uint64_t M = A1 * A2
    cdef int64_t N = W * H
    cdef double t_last = -1.0
    cdef int64_t events = 0, delta
    cdef Py_ssize_t a, i, j
    cdef int status = S_REACHED
    with nogil:
        if t_next < 0:
            t_next = _gap(bg, <double>M)
        while t_next <= t_stop:
            a = <Py_ssize_t>hm_below(bg, M)
            i = a // A2
            j = a - i * A2
            delta = _apply_block(state, W, H, i, j, n1, n2, periodic)
            ones += delta
            t_last = t_next
            events += 1
            t_next = t_last + _gap(bg, <double>M)
            if delta > 0 and (ring1 or ring2):
                if (i < ring1 or i + n1 > W - ring1
                        or (H > 1 and (j < ring2 or j + n2 > H - ring2))):
                    status = S_RING
                    break
            if stop_absorbed and (ones == 0 or ones == N):
                status = S_ABSORBED
                break
    return t_last, t_next, ones, events, status


def voter_advance(uint8_t[::1] state, Py_ssize_t W, Py_ssize_t H, rng, double t_next,
                  double t_stop, int64_t ones, bint stop_absorbed=True):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef uint64_t N = W * H
    cdef uint64_t deg = 2 if H == 1 else 4
    cdef double t_last = -1.0
    cdef int64_t events = 0
    cdef Py_ssize_t v, u, i, j
    cdef uint64_t k
    cdef uint8_t new
    cdef int status = S_REACHED
    with nogil:
        if t_next < 0:
            t_next = _gap(bg, <double>N)
        while t_next <= t_stop:
            v = <Py_ssize_t>hm_below(bg, N)
            k = hm_below(bg, deg)
            i = v // H
            j = v - i * H
            if k == 0:
                u = ((i + 1) % W) * H + j
            elif k == 1:
                u = _wrap(i - 1, W) * H + j
            elif k == 2:
                u = i * H + (j + 1) % H
            else:
                u = i * H + _wrap(j - 1, H)
            new = state[u]
            if state[v] != new:
                ones += 1 if new else -1
                state[v] = new
            t_last = t_next
            events += 1
            t_next = t_last + _gap(bg, <double>N)
            if stop_absorbed and (ones == 0 or ones == <int64_t>N):
                status = S_ABSORBED
                break
    return t_last, t_next, ones, events, status


def generate_log(Py_ssize_t M, double T, rng):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t cap = <Py_ssize_t>(M * T + 10 * (M * T) ** 0.5 + 64)
    cdef Py_ssize_t k = 0
    cdef double t
    times_arr = np.empty(cap, dtype=np.float64)
    anchors_arr = np.empty(cap, dtype=np.int64)
    cdef double[::1] times = times_arr
    cdef int64_t[::1] anchors = anchors_arr
    t = _gap(bg, <double>M)
    while t <= T:
        if k == cap:
            cap = 2 * cap
            times_arr = np.resize(times_arr, cap)
            anchors_arr = np.resize(anchors_arr, cap)
            times = times_arr
            anchors = anchors_arr
        with nogil:
            while t <= T and k < cap:
                anchors[k] = <int64_t>hm_below(bg, <uint64_t>M)
                times[k] = t
                k += 1
                t = t + _gap(bg, <double>M)
    return times_arr[:k].copy(), anchors_arr[:k].copy()


def replay_majority(uint8_t[::1] state, Py_ssize_t W, Py_ssize_t H, int n1, int n2,
                    bint periodic, const int64_t[::1] anchors, uint8_t[::1] changed=None):
    cdef Py_ssize_t A2 = H if periodic else H - n2 + 1
    cdef Py_ssize_t e, a, i, j, count = 0
    cdef Py_ssize_t ne = anchors.shape[0]
    cdef bint record = changed is not None
    cdef int64_t delta
    with nogil:
        for e in range(ne):
            a = anchors[e]
            i = a // A2
            j = a - i * A2
            delta = _apply_block(state, W, H, i, j, n1, n2, periodic)
            if record:
                changed[e] = delta != 0
            if delta != 0:
                count += 1
    return count


def center_path(const double[::1] times, const int64_t[::1] anchors, int64_t x, int n, double T):
    cdef Py_ssize_t ne = anchors.shape[0]
    cdef Py_ssize_t e, k = 0
    cdef int64_t half = (n - 1) // 2
    cdef int64_t p = x, u
    s_arr = np.empty(64, dtype=np.float64)
    p_arr = np.empty(64, dtype=np.int64)
    cdef double[::1] s_out = s_arr
    cdef int64_t[::1] p_out = p_arr
    e = ne - 1
    while e >= 0:
        u = anchors[e]
        if u <= p and p <= u + n - 1:
            if k == s_out.shape[0]:
                s_arr = np.resize(s_arr, 2 * k)
                p_arr = np.resize(p_arr, 2 * k)
                s_out = s_arr
                p_out = p_arr
            p = u + half
            s_out[k] = T - times[e]
            p_out[k] = p
            k += 1
        e -= 1
    return s_arr[:k].copy(), p_arr[:k].copy()


def dependence_hull(const int64_t[::1] anchors, int64_t lo, int64_t hi, int n):
    cdef Py_ssize_t e = anchors.shape[0] - 1
    cdef int64_t u
    with nogil:
        while e >= 0:
            u = anchors[e]
            if u <= hi and u + n - 1 >= lo:
                if u < lo:
                    lo = u
                if u + n - 1 > hi:
                    hi = u + n - 1
            e -= 1
    return lo, hi


cdef struct Move:
    int64_t col
    int64_t row
    int64_t x[3]


cdef inline void _push(Move *moves, int *nm, int64_t col, int64_t row,
                       int64_t xm, int64_t x0, int64_t xp) noexcept nogil:
    cdef Move *m = &moves[nm[0]]
    m.col = col
    m.row = row
    m.x[0] = xm
    m.x[1] = x0
    m.x[2] = xp
    nm[0] += 1


cdef int _slice_moves(int64_t xm, int64_t x0, int64_t xp, Move *moves) noexcept nogil:
    """Fill ``moves`` (capacity 8) in the order of ``_pykernels.slice_moves``."""
    cdef int nm = 0
    cdef int64_t X[3]
    cdef int r, a, b
    cdef int64_t c, p, q, mn, cc
    cdef Move tmp
    X[0] = xm
    X[1] = x0
    X[2] = xp
    # removals: row r loses its front cell through the block shared with row r-1 or r+1
    for r in range(3):
        c = X[r]
        # block rows (r-1, r); lower neighbour is outside the slice when r == 0
        if r == 0 or X[r - 1] < c:
            _push(moves, &nm, c, r - 2,
                  c - 1 if r == 0 else X[0], c - 1 if r == 1 else X[1], c - 1 if r == 2 else X[2])
        if r == 2 or X[r + 1] < c:
            _push(moves, &nm, c, r - 1,
                  c - 1 if r == 0 else X[0], c - 1 if r == 1 else X[1], c - 1 if r == 2 else X[2])
    # gains on the row pairs (-1, 0) and (0, 1)
    for r in range(2):
        p = X[r]
        q = X[r + 1]
        mn = p if p < q else q
        for cc in range(mn, mn + (2 if (p - q >= 2 or q - p >= 2) else 1)):
            a = r
            b = r + 1
            X[a] = p if p > cc + 1 else cc + 1
            X[b] = q if q > cc + 1 else cc + 1
            _push(moves, &nm, cc, r - 1, X[0], X[1], X[2])
            X[a] = p
            X[b] = q
    # insertion sort by (col, row)
    cdef int i, j
    for i in range(1, nm):
        tmp = moves[i]
        j = i - 1
        while j >= 0 and (moves[j].col > tmp.col or (moves[j].col == tmp.col and moves[j].row > tmp.row)):
            moves[j + 1] = moves[j]
            j -= 1
        moves[j + 1] = tmp
    return nm


def slice_moves(int64_t xm, int64_t x0, int64_t xp):
    cdef Move moves[8]
    cdef int nm = _slice_moves(xm, x0, xp, moves)
    return [(moves[i].col, moves[i].row, moves[i].x[0], moves[i].x[1], moves[i].x[2])
            for i in range(nm)]


def slice_advance(int64_t[::1] X, rng, double t_next, double t_stop,
                  double[::1] out_t, int64_t[:, ::1] out_x, Py_ssize_t start=0):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Move moves[8]
    cdef Py_ssize_t cap = out_t.shape[0]
    cdef Py_ssize_t k = start
    cdef int nm, pick
    cdef int status = S_REACHED
    with nogil:
        nm = _slice_moves(X[0], X[1], X[2], moves)
        if t_next < 0:
            t_next = _gap(bg, <double>nm)
        while t_next <= t_stop:
            if k >= cap:
                status = S_FULL
                break
            pick = <int>hm_below(bg, <uint64_t>nm)
            X[0] = moves[pick].x[0]
            X[1] = moves[pick].x[1]
            X[2] = moves[pick].x[2]
            out_t[k] = t_next
            out_x[k, 0] = X[0]
            out_x[k, 1] = X[1]
            out_x[k, 2] = X[2]
            k += 1
            nm = _slice_moves(X[0], X[1], X[2], moves)
            t_next = t_next + _gap(bg, <double>nm)
    return t_next, k, status
