import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypermajority.lattice import (
    Configuration,
    GridParseError,
    HyperedgeFamily,
    LatticeGeometry,
    count_ones,
    count_zeros,
    read_grid_text,
    set_block,
    vertices_of,
    write_grid_text,
)


def test_vertices_1d():
    fam = HyperedgeFamily(2, LatticeGeometry.torus(10, 1))
    assert vertices_of(fam, (0,)) == [(0,), (1,)]


def test_vertices_2d_lexicographic():
    fam = HyperedgeFamily(3, LatticeGeometry.torus(5, 2))
    assert vertices_of(fam, (0, 0)) == [(i, j) for i in range(3) for j in range(3)]


def test_vertices_wrap():
    fam = HyperedgeFamily(3, LatticeGeometry.torus(10, 1))
    assert vertices_of(fam, (9,)) == [(9,), (0,), (1,)]


def test_window_anchor_out_of_range():
    fam = HyperedgeFamily(3, LatticeGeometry.window((5, 5)))
    assert len(fam) == 9
    with pytest.raises(IndexError):
        vertices_of(fam, (3, 0))
    with pytest.raises(IndexError):
        vertices_of(fam, (-1, 0))


def test_torus_has_one_block_per_vertex():
    fam = HyperedgeFamily(3, LatticeGeometry.torus(6, 2))
    blocks = {frozenset(fam.vertices_of(a)) for a in fam.anchors()}
    assert len(fam) == 36 == len(blocks)


def test_torus_smaller_than_block_rejected():
    with pytest.raises(ValueError):
        HyperedgeFamily(4, LatticeGeometry.torus(3, 1))


def test_count_ones_examples():
    g = LatticeGeometry.torus(5, 2)
    fam3 = HyperedgeFamily(3, g)
    assert count_ones(Configuration.zeros(g), (1, 1), fam3) == 0
    assert count_ones(Configuration.ones(g), (1, 1), fam3) == 9
    c = Configuration.zeros(g)
    c[(0, 0)] = 1
    c[(1, 0)] = 1  # row 0 of the 2x2 block at the origin
    assert count_ones(c, (0, 0), HyperedgeFamily(2, g)) == 2


def test_anchor_index_roundtrip():
    fam = HyperedgeFamily(2, LatticeGeometry.window((6, 4), (-3, 5)))
    for k in range(len(fam)):
        assert fam.anchor_index(fam.anchor_at(k)) == k


def test_window_reads_zero_outside():
    c = Configuration.ones(LatticeGeometry.window((3, 3), (1, 1)))
    assert c[(0, 0)] == 0 and c[(1, 1)] == 1 and c[(4, 2)] == 0
    with pytest.raises(IndexError):
        c[(0, 0)] = 1


def test_torus_wraps_reads():
    c = Configuration.zeros(LatticeGeometry.torus(4, 2))
    c[(5, -1)] = 1
    assert c[(1, 3)] == 1


def test_grid_examples():
    c = read_grid_text("##\n##")
    assert c.geometry.shape == (2, 2) and c.count() == 4
    d = read_grid_text("#.\n.#")
    assert d[(0, 1)] == 1 and d[(1, 0)] == 1 and d[(0, 0)] == 0 and d[(1, 1)] == 0


def test_grid_top_row_is_highest_y():
    c = read_grid_text("#..\n...")
    assert c[(0, 1)] == 1 and c.count() == 1


@pytest.mark.parametrize("text", ["##\n#.\n", "#.#\n...\n.#.\n", "3 -2 2 1\n.#\n"])
def test_grid_roundtrip(text):
    assert write_grid_text(read_grid_text(text)) == text


@pytest.mark.parametrize(
    "text,line",
    [("##\n#\n", 2), ("#x\n", 1), ("..\n.#\n#a\n", 3), ("a b c d\n##\n", 1), ("0 0 3 1\n##\n", 1)],
)
def test_grid_errors_carry_line(text, line):
    with pytest.raises(GridParseError) as exc:
        read_grid_text(text)
    assert exc.value.line == line


def test_set_block():
    g = LatticeGeometry.window((4, 4))
    c = set_block(Configuration.zeros(g), (1, 1), (2, 3), 1)
    assert c.count() == 6 and c[(1, 3)] == 1 and c[(0, 0)] == 0
    with pytest.raises(IndexError):
        set_block(c, (3, 3), (4, 4), 1)


def test_cropped_and_padded():
    c = read_grid_text("5 7 3 2\n.#.\n##.\n")
    t = c.cropped(2)
    assert t.geometry.origin == (3, 5) and t.geometry.shape == (6, 6)
    assert sorted(t.support()) == sorted(c.support())
    p = c.padded(1)
    assert p.geometry.origin == (4, 6) and sorted(p.support()) == sorted(c.support())


grids = st.integers(1, 6).flatmap(
    lambda w: st.lists(st.lists(st.sampled_from("#."), min_size=w, max_size=w).map("".join), min_size=1, max_size=6)
)


@given(grids)
def test_grid_roundtrip_property(rows):
    text = "\n".join(rows) + "\n"
    assert write_grid_text(read_grid_text(text)) == text


@settings(max_examples=60)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1), st.integers(-5, 5), st.integers(-5, 5), st.integers(0, 6), st.integers(0, 6))
def test_block_invariants(n, seed, sx, sy, ax, ay):
    g = LatticeGeometry.torus(7, 2)
    fam = HyperedgeFamily(n, g)
    bits = np.random.default_rng(seed).integers(0, 2, size=(7, 7), dtype=np.uint8)
    c = Configuration(g, bits)
    verts = fam.vertices_of((ax, ay))
    assert len(verts) == len(set(verts)) == n * n
    assert count_ones(c, (ax, ay), fam) + count_zeros(c, (ax, ay), fam) == n * n
    shifted = Configuration(g, np.roll(bits, (sx, sy), axis=(0, 1)))
    assert count_ones(shifted, (ax + sx, ay + sy), fam) == count_ones(c, (ax, ay), fam)
