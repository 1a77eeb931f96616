import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermajority import contour2d as C
from hypermajority.dynamics import majority_update
from hypermajority.lattice import Configuration, HyperedgeFamily, LatticeGeometry, read_grid_text
from hypermajority.rng import RngStream


def mask_of(*rows):
    """Cluster from text rows, top row = highest y."""
    return read_grid_text("\n".join(rows) + "\n").padded(C.PAD)


def L_shape():
    m = np.ones((12, 12), dtype=np.uint8)
    m[6:, 6:] = 0
    return C.cluster_from_mask(m)


def two_squares():
    m = np.zeros((14, 5), dtype=np.uint8)
    m[:5, :] = 1
    m[9:, :] = 1
    return C.cluster_from_mask(m)


def empty():
    return Configuration.zeros(LatticeGeometry.window((6, 6)))


# contour ---------------------------------------------------------------------


def test_single_cell_contour():
    c = C.build_contour(mask_of("#"))
    assert sorted(c.edges) == [((0, 0), (0, 1)), ((0, 0), (1, 0)), ((0, 1), (1, 1)), ((1, 0), (1, 1))]
    assert C.is_jordan(c)


def test_empty_contour():
    c = C.build_contour(empty())
    assert len(c) == 0
    v = C.is_jordan(c)
    assert not v and v.reason == "empty"


def test_two_by_two_loop():
    c = C.build_contour(C.rectangle(2, 2))
    assert len(c) == 8 and C.is_jordan(c)
    assert set(c.degrees().values()) == {2}


def test_diagonal_pair_pinches():
    v = C.is_jordan(C.build_contour(mask_of(".#", "#.")))
    assert not v and v.witness == (1, 1) and "degree 4" in v.reason


def test_separated_cells_two_cycles():
    v = C.is_jordan(C.build_contour(mask_of("#.#")))
    assert not v and "2 cycles" in v.reason


def _perimeter(config):
    # per-cell side count: each 1 contributes its sides facing a 0
    B = config.cropped(1).bits.astype(int)
    total = 0
    for i, j in zip(*np.nonzero(B)):
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            total += B[i + di, j + dj] == 0
    return total


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
def test_contour_matches_perimeter_and_even_degrees(w, h, seed, p):
    bits = (np.random.default_rng(seed).random((w, h)) < p).astype(np.uint8)
    config = C.cluster_from_mask(bits, (seed % 7 - 3, seed % 5 - 2))
    c = C.build_contour(config)
    assert len(c) == _perimeter(config)
    assert all(d in (2, 4) for d in c.degrees().values())


# corners ---------------------------------------------------------------------


@pytest.mark.parametrize("m", [2, 3, 6, 9])
def test_square_corners(m):
    r = C.find_corners(C.rectangle(m, m))
    assert r.positive == [(0, 0), (0, m - 1), (m - 1, 0), (m - 1, m - 1)]
    assert r.c_plus == 4 and r.c_minus == 0


def test_no_corners_when_empty():
    r = C.find_corners(empty())
    assert (r.c_plus, r.c_minus) == (0, 0)


def test_L_shape_corners():
    r = C.find_corners(L_shape())
    assert (r.c_plus, r.c_minus) == (5, 1)
    assert r.negative == [(6, 6)]


def test_corner_listed_once():
    # the 0 at (1, 1) satisfies both diagonal conditions
    r = C.find_corners(mask_of("#.#", "...", "#.#"))
    assert r.negative.count((1, 1)) == 1


# regularity ------------------------------------------------------------------


def test_six_square_regular():
    v = C.is_regular_cluster(C.rectangle(6, 6))
    assert v.r0 and v.r1 and v.r2 and v.regular and v.vertex_count == 36


def test_two_square_fails_r2():
    v = C.is_regular_cluster(C.rectangle(2, 2))
    assert v.r0 and not v.r2 and v.r2_witness == ((0, 0), (0, 1))


def test_disjoint_squares_fail_r0():
    v = C.is_regular_cluster(two_squares())
    assert not v.r0 and not v.regular


def test_r1_flags_narrow_notch():
    # a one-cell-wide slit brings two stretches of contour within one window
    m = np.ones((9, 9), dtype=np.uint8)
    m[4, 3:] = 0
    v = C.is_regular_cluster(C.cluster_from_mask(m))
    assert v.r0 and not v.r1 and v.r1_witness is not None


def test_r1_empty_and_single():
    assert C.local_connectivity_failures(C.build_contour(empty())) == []
    assert C.local_connectivity_failures(C.build_contour(mask_of("#"))) == []


# phi -------------------------------------------------------------------------


@pytest.mark.parametrize("k,value", [(0, 0), (9, 0), (5, 4), (4, -4), (1, -1), (8, 1)])
def test_phi_values(k, value):
    assert C.phi_value(k) == value


def test_phi_on_configuration():
    c = C.rectangle(6, 6)
    assert C.phi(c, (0, 0)) == -4
    assert C.phi(c, (3, 3)) == 0
    assert C.phi(c, (1, 0)) == 3


def test_phi_matches_majority_update():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 10_000:
        bits = (rng.random((7, 7)) < rng.uniform(0.2, 0.8)).astype(np.uint8)
        config = C.cluster_from_mask(bits)
        fam = HyperedgeFamily(3, config.geometry)
        ox, oy = config.geometry.origin
        for _ in range(50):
            center = (ox + 1 + int(rng.integers(0, 11)), oy + 1 + int(rng.integers(0, 11)))
            anchor = (center[0] - 1, center[1] - 1)
            after = majority_update(config, anchor, fam)
            assert C.phi(config, center) == after.count() - config.count()
            checked += 1


def test_phi_sum_examples():
    assert C.phi_sum(C.rectangle(6, 6)) == -36
    assert C.phi_sum(empty()) == 0
    assert C.phi_sum(L_shape()) == -36


def test_phi_sum_brute_force():
    for config in (C.rectangle(6, 6), L_shape(), C.rectangle(4, 11), mask_of("#.", "##")):
        ox, oy = config.geometry.origin
        W, H = config.geometry.shape
        brute = sum(C.phi(config, (x, y)) for x in range(ox - 2, ox + W + 2) for y in range(oy - 2, oy + H + 2))
        assert C.phi_sum(config) == brute


def test_phi_sum_repads_tight_window():
    tight = Configuration.ones(LatticeGeometry.window((6, 6)))
    assert C.phi_sum(tight) == -36


# corner identity -------------------------------------------------------------


@pytest.mark.parametrize("config", [C.rectangle(4, 11), C.rectangle(6, 6), L_shape()], ids=["4x11", "6x6", "L"])
def test_corner_identity_holds(config):
    r = C.check_corner_identity(config)
    assert r.asserted and r.identity_holds and r.phi_sum == -36


def test_small_square_informational():
    r = C.check_corner_identity(C.rectangle(3, 3))
    assert r.vertices == 9 and not r.asserted


# turns -----------------------------------------------------------------------


def test_turns():
    assert C.turn_counts(C.build_contour(mask_of("#"))) == (4, 0)
    assert C.turn_counts(C.build_contour(C.rectangle(6, 6))) == (4, 0)
    assert C.turn_counts(C.build_contour(L_shape())) == (5, 1)


def test_cycle_is_clockwise():
    path = C.cycle_points(C.build_contour(C.rectangle(2, 3)))
    assert path[0] == (0, 0) and path[1] == (0, 1)
    assert len(path) == 10


def test_turns_need_jordan():
    with pytest.raises(ValueError):
        C.turn_counts(C.build_contour(two_squares()))


# boundary thickness ----------------------------------------------------------


@pytest.mark.parametrize("m", [4, 6])
def test_thickness_on_squares(m):
    v = C.check_boundary_thickness(C.rectangle(m, m))
    assert v and v.checked == 8 * m


def test_thickness_fails_on_domino():
    v = C.check_boundary_thickness(C.rectangle(2, 1))
    assert not v and v.witness is not None


# generator and corpus --------------------------------------------------------


def test_generator_rejects_unknown_class():
    with pytest.raises(ValueError):
        C.generate_regular_cluster(RngStream(0), 100, "blob")


def test_generator_budget():
    with pytest.raises(C.GenerationError):
        C.generate_regular_cluster(RngStream(0), 100, "staircase", budget=0)


def test_staircase_steps_regular():
    m = np.zeros((12, 14), dtype=np.uint8)
    m[:4, :14] = 1
    m[4:8, :10] = 1
    m[8:, :5] = 1
    assert C.is_regular_cluster(C.cluster_from_mask(m))


@pytest.mark.parametrize("shape", C.SHAPE_CLASSES)
def test_corpus(shape):
    for k in range(25):
        config = C.generate_regular_cluster(RngStream(300, k), 150, shape)
        v = C.is_regular_cluster(config)
        assert v.regular and v.vertex_count >= 11
        contour = C.build_contour(config)
        rights, lefts = C.turn_counts(contour)
        assert rights - lefts == 4
        r = C.check_corner_identity(config)
        assert r.identity_holds and r.c_plus - r.c_minus == 4 and r.phi_sum == -36
        assert C.check_boundary_thickness(config)
