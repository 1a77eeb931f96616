"""The compiled and pure-Python kernels must agree bit for bit."""
import numpy as np
import pytest

from hypermajority import _backend, _pykernels
from hypermajority.rng import RngStream

ck = pytest.importorskip("hypermajority._ckernels") if "cython" in _backend.available() else None
pytestmark = pytest.mark.skipif(ck is None, reason="compiled kernels not built")


def _state(seed, size, p=0.5):
    return RngStream(seed, 99).bernoulli_field(size, p)


@pytest.mark.parametrize("W,H,n1,n2,periodic", [(40, 1, 3, 1, True), (30, 1, 2, 1, False), (12, 9, 2, 2, True), (15, 11, 3, 3, False)])
def test_majority_advance(W, H, n1, n2, periodic):
    outs = []
    for mod in (_pykernels, ck):
        s = _state(W * H, W * H)
        res = mod.majority_advance(s, W, H, n1, n2, periodic, RngStream(4), -1.0, 3.0, int(s.sum()), 0, 0, False)
        outs.append((res, s.tobytes()))
    assert outs[0] == outs[1]


def test_majority_advance_ring_and_segments():
    outs = []
    for mod in (_pykernels, ck):
        s = np.zeros(20 * 20, dtype=np.uint8)
        s.reshape(20, 20)[8:12, 8:12] = 1
        rng = RngStream(6)
        t_next, ones, trace = -1.0, 16, []
        for stop in (0.5, 1.0, 5.0):
            tl, t_next, ones, ev, st = mod.majority_advance(s, 20, 20, 3, 3, False, rng, t_next, stop, ones, 2, 2, True)
            trace.append((tl, t_next, ones, ev, st))
            if st != mod.REACHED:
                break
        outs.append((trace, s.tobytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("W,H", [(50, 1), (8, 8)])
def test_voter_advance(W, H):
    outs = []
    for mod in (_pykernels, ck):
        s = _state(1, W * H)
        res = mod.voter_advance(s, W, H, RngStream(2), -1.0, 2.0, int(s.sum()), False)
        outs.append((res, s.tobytes()))
    assert outs[0] == outs[1]


def test_generate_and_replay():
    tp, ap = _pykernels.generate_log(37, 20.0, RngStream(8))
    tc, ac = ck.generate_log(37, 20.0, RngStream(8))
    assert np.array_equal(tp, tc) and np.array_equal(ap, ac)
    outs = []
    for mod in (_pykernels, ck):
        s = _state(3, 40)
        changed = np.zeros(len(ap), dtype=np.uint8)
        count = mod.replay_majority(s, 40, 1, 4, 1, False, ap, changed)
        outs.append((count, s.tobytes(), changed.tobytes()))
    assert outs[0] == outs[1]


def test_center_path_and_hull():
    t, a = ck.generate_log(200, 10.0, RngStream(12))
    sp, pp = _pykernels.center_path(t, a, 100, 5, 10.0)
    sc, pc = ck.center_path(t, a, 100, 5, 10.0)
    assert np.array_equal(sp, sc) and np.array_equal(pp, pc)
    assert _pykernels.dependence_hull(a, 90, 110, 3) == ck.dependence_hull(a, 90, 110, 3)


def test_slice_kernels():
    for X in [(0, 0, 0), (2, 0, -3), (-1, 0, -1), (5, 5, 1), (1, 0, 1)]:
        assert _pykernels.slice_moves(*X) == ck.slice_moves(*X)
    outs = []
    for mod in (_pykernels, ck):
        X = np.zeros(3, dtype=np.int64)
        out_t = np.zeros(50)
        out_x = np.zeros((50, 3), dtype=np.int64)
        res = mod.slice_advance(X, RngStream(1), -1.0, 100.0, out_t, out_x, 0)
        outs.append((res, X.tolist(), out_t.tobytes(), out_x.tobytes()))
    assert outs[0] == outs[1]
    assert outs[0][0][2] == ck.FULL


def test_backend_switch():
    before = _backend.name()
    with _backend.using("python"):
        assert _backend.name() == "python"
    assert _backend.name() == before
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")
