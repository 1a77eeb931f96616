"""Finite lattices, spin configurations and block hyperedges.

Two truncations of the integer lattice are supported: periodic tori, and
zero-padded windows whose outside is permanently in state 0.  2D arrays
are indexed ``bits[i, j]`` for the vertex ``(x0 + i, y0 + j)``, so the
first axis is the first coordinate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

Coord = tuple[int, ...]


class GridParseError(ValueError):
    """Malformed grid text."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LatticeGeometry:
    """Shape, boundary condition and coordinate origin of a finite lattice."""

    shape: tuple[int, ...]
    periodic: bool = True
    origin: tuple[int, ...] = field(default=())

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if any(s < 1 for s in shape):
            raise ValueError("every side length must be at least 1")
        origin = tuple(int(o) for o in self.origin) if self.origin else (0,) * len(shape)
        if len(origin) != len(shape):
            raise ValueError("origin and shape dimensions differ")
        if self.periodic and any(origin):
            raise ValueError("periodic geometries are anchored at the origin")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def torus(cls, side: int, d: int = 2) -> "LatticeGeometry":
        return cls((side,) * d, periodic=True)

    @classmethod
    def window(cls, shape: Sequence[int], origin: Sequence[int] | None = None) -> "LatticeGeometry":
        return cls(tuple(shape), periodic=False, origin=tuple(origin) if origin else ())

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def local(self, coord: Sequence[int]) -> Coord | None:
        """Array index of ``coord``, wrapped on a torus; None outside a window."""
        if len(coord) != self.d:
            raise ValueError(f"expected a {self.d}-dimensional coordinate, got {tuple(coord)}")
        if self.periodic:
            return tuple(int(c) % s for c, s in zip(coord, self.shape))
        idx = tuple(int(c) - o for c, o in zip(coord, self.origin))
        if all(0 <= i < s for i, s in zip(idx, self.shape)):
            return idx
        return None

    def coords(self) -> Iterator[Coord]:
        """All vertices in lexicographic order."""
        ranges = [range(o, o + s) for o, s in zip(self.origin, self.shape)]
        return itertools.product(*ranges)


class Configuration:
    """One bit per vertex of a finite geometry."""

    __slots__ = ("geometry", "bits")

    def __init__(self, geometry: LatticeGeometry, bits: np.ndarray | None = None):
        self.geometry = geometry
        if bits is None:
            bits = np.zeros(geometry.shape, dtype=np.uint8)
        else:
            bits = np.ascontiguousarray(bits, dtype=np.uint8)
            if bits.shape != geometry.shape:
                raise ValueError(f"bits have shape {bits.shape}, geometry {geometry.shape}")
            if bits.size and bits.max() > 1:
                raise ValueError("states must be 0 or 1")
        self.bits = bits

    @classmethod
    def zeros(cls, geometry: LatticeGeometry) -> "Configuration":
        return cls(geometry)

    @classmethod
    def ones(cls, geometry: LatticeGeometry) -> "Configuration":
        return cls(geometry, np.ones(geometry.shape, dtype=np.uint8))

    @classmethod
    def bernoulli(cls, geometry: LatticeGeometry, rng, p: float = 0.5) -> "Configuration":
        return cls(geometry, rng.bernoulli_field(geometry.size, p).reshape(geometry.shape))

    def __getitem__(self, coord: Sequence[int]) -> int:
        idx = self.geometry.local(coord)
        return 0 if idx is None else int(self.bits[idx])

    def __setitem__(self, coord: Sequence[int], value: int) -> None:
        idx = self.geometry.local(coord)
        if idx is None:
            raise IndexError(f"{tuple(coord)} lies outside the window")
        self.bits[idx] = 1 if value else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        g = self.geometry
        kind = "torus" if g.periodic else f"window@{g.origin}"
        return f"Configuration({kind}, shape={g.shape}, ones={self.count()})"

    def copy(self) -> "Configuration":
        return Configuration(self.geometry, self.bits.copy())

    def count(self) -> int:
        return int(self.bits.sum(dtype=np.int64))

    def support(self) -> list[Coord]:
        """Coordinates of state-1 vertices, lexicographic."""
        o = self.geometry.origin
        return [tuple(int(i) + oo for i, oo in zip(idx, o)) for idx in np.argwhere(self.bits)]

    def bounding_box(self) -> tuple[Coord, Coord] | None:
        """(lowest corner, highest corner) of the support, inclusive."""
        idx = np.argwhere(self.bits)
        if idx.size == 0:
            return None
        o = np.array(self.geometry.origin)
        return tuple(int(v) for v in idx.min(0) + o), tuple(int(v) for v in idx.max(0) + o)

    def padded(self, margin: int) -> "Configuration":
        """Same window configuration surrounded by ``margin`` extra cells of 0."""
        g = self.geometry
        if g.periodic:
            raise ValueError("cannot pad a periodic configuration")
        geo = LatticeGeometry.window(
            tuple(s + 2 * margin for s in g.shape), tuple(o - margin for o in g.origin)
        )
        return Configuration(geo, np.pad(self.bits, margin))

    def cropped(self, margin: int) -> "Configuration":
        """Tight window around the support plus ``margin`` cells of 0 on each side."""
        box = self.bounding_box()
        if box is None:
            lo, hi = self.geometry.origin, self.geometry.origin
            geo = LatticeGeometry.window(tuple(1 + 2 * margin for _ in lo), tuple(c - margin for c in lo))
            return Configuration(geo)
        lo, hi = box
        geo = LatticeGeometry.window(
            tuple(h - l + 1 + 2 * margin for l, h in zip(lo, hi)), tuple(l - margin for l in lo)
        )
        out = Configuration(geo)
        src = tuple(slice(l - o, h - o + 1) for l, h, o in zip(lo, hi, self.geometry.origin))
        dst = tuple(slice(margin, margin + h - l + 1) for l, h in zip(lo, hi))
        out.bits[dst] = self.bits[src]
        return out

    def with_padding(self, margin: int) -> "Configuration":
        """Ensure at least ``margin`` zero cells between the support and the window edge."""
        g = self.geometry
        box = self.bounding_box()
        if box is None:
            return self.copy()
        lo, hi = box
        gap = min(
            min(l - o for l, o in zip(lo, g.origin)),
            min(o + s - 1 - h for h, o, s in zip(hi, g.origin, g.shape)),
        )
        if gap >= margin:
            return self.copy()
        return self.padded(margin - gap)


@dataclass(frozen=True)
class HyperedgeFamily:
    """All n x ... x n blocks ``h_x = x + {0..n-1}^d`` of a geometry.

    On a torus every vertex anchors a block.  In a zero-padded window only
    blocks lying entirely inside the window are kept, since the outside is
    frozen at 0.
    """

    n: int
    geometry: LatticeGeometry

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("block side n must exceed 1")
        g = self.geometry
        if g.periodic and any(s < self.n for s in g.shape):
            raise ValueError(f"torus side must be at least n={self.n}")
        if not g.periodic and any(s < self.n for s in g.shape):
            raise ValueError(f"window side must be at least n={self.n}")

    @property
    def block_size(self) -> int:
        return self.n ** self.geometry.d

    @property
    def anchor_shape(self) -> tuple[int, ...]:
        g = self.geometry
        if g.periodic:
            return g.shape
        return tuple(s - self.n + 1 for s in g.shape)

    def __len__(self) -> int:
        return int(np.prod(self.anchor_shape))

    def anchors(self) -> Iterator[Coord]:
        ranges = [range(o, o + s) for o, s in zip(self.geometry.origin, self.anchor_shape)]
        return itertools.product(*ranges)

    def anchor_at(self, index: int) -> Coord:
        """Anchor with flat (row-major) index ``index``."""
        idx = np.unravel_index(int(index), self.anchor_shape)
        return tuple(int(i) + o for i, o in zip(idx, self.geometry.origin))

    def anchor_index(self, anchor: Sequence[int]) -> int:
        self._check_anchor(anchor)
        g = self.geometry
        rel = [int(a) - o for a, o in zip(anchor, g.origin)]
        if g.periodic:
            rel = [r % s for r, s in zip(rel, g.shape)]
        return int(np.ravel_multi_index(rel, self.anchor_shape))

    def _check_anchor(self, anchor: Sequence[int]) -> None:
        g = self.geometry
        if len(anchor) != g.d:
            raise ValueError(f"expected a {g.d}-dimensional anchor")
        if g.periodic:
            return
        for a, o, s in zip(anchor, g.origin, self.anchor_shape):
            if not o <= a < o + s:
                raise IndexError(f"anchor {tuple(anchor)} out of range for this window")

    def vertices_of(self, anchor: Sequence[int]) -> list[Coord]:
        """The n^d vertices of the block at ``anchor``, lexicographic, wrapped on a torus."""
        self._check_anchor(anchor)
        g = self.geometry
        out = []
        for off in itertools.product(range(self.n), repeat=g.d):
            c = tuple(int(a) + o for a, o in zip(anchor, off))
            if g.periodic:
                c = tuple(ci % s for ci, s in zip(c, g.shape))
            out.append(c)
        return out

    def block_index(self, anchor: Sequence[int]) -> tuple:
        """Numpy fancy index selecting the block's cells in ``Configuration.bits``."""
        self._check_anchor(anchor)
        g = self.geometry
        axes = []
        for a, o, s in zip(anchor, g.origin, g.shape):
            r = np.arange(int(a) - o, int(a) - o + self.n)
            axes.append(r % s if g.periodic else r)
        return np.ix_(*axes)


def vertices_of(family: HyperedgeFamily, anchor: Sequence[int]) -> list[Coord]:
    return family.vertices_of(anchor)


def count_ones(config: Configuration, anchor: Sequence[int], family: HyperedgeFamily) -> int:
    """Number of state-1 vertices in the block at ``anchor``."""
    return int(config.bits[family.block_index(anchor)].sum())


def count_zeros(config: Configuration, anchor: Sequence[int], family: HyperedgeFamily) -> int:
    return family.block_size - count_ones(config, anchor, family)


def set_block(config: Configuration, lo: Sequence[int], hi: Sequence[int], value: int) -> Configuration:
    """Copy of ``config`` with the box ``lo <= x <= hi`` (inclusive) set to ``value``."""
    g = config.geometry
    a = g.local(lo)
    b = g.local(hi)
    if a is None or b is None or any(x > y for x, y in zip(a, b)):
        raise IndexError(f"rectangle {tuple(lo)}..{tuple(hi)} not inside the window")
    out = config.copy()
    out.bits[tuple(slice(x, y + 1) for x, y in zip(a, b))] = 1 if value else 0
    return out


def read_grid_text(text: str) -> Configuration:
    """Parse the ``#``/``.`` grid format into a zero-padded 2D window.

    Rows run top to bottom, so the first row has the highest second
    coordinate.  An optional first line ``x0 y0 width height`` fixes the
    window; otherwise the lower-left cell is (0, 0).
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    header = None
    start = 0
    if lines and lines[0].strip() and lines[0].strip()[0] not in "#.":
        parts = lines[0].split()
        try:
            x0, y0, w, h = (int(p) for p in parts)
        except ValueError:
            raise GridParseError("header must be 'x0 y0 width height'", 1) from None
        header = (x0, y0, w, h)
        start = 1
    rows = lines[start:]
    if not rows:
        raise GridParseError("no grid rows", start + 1)
    width = len(rows[0])
    for k, row in enumerate(rows):
        lineno = start + k + 1
        if len(row) != width:
            raise GridParseError(f"ragged row (length {len(row)}, expected {width})", lineno)
        bad = set(row) - {"#", "."}
        if bad:
            raise GridParseError(f"illegal character {sorted(bad)[0]!r}", lineno)
    height = len(rows)
    if width == 0:
        raise GridParseError("empty row", start + 1)
    x0, y0 = 0, 0
    if header is not None:
        x0, y0, w, h = header
        if (w, h) != (width, height):
            raise GridParseError(f"header says {w}x{h}, grid is {width}x{height}", 1)
    grid = np.array([[c == "#" for c in row] for row in rows], dtype=np.uint8)
    bits = np.ascontiguousarray(grid[::-1].T)  # bits[i, j], j counted upward
    return Configuration(LatticeGeometry.window((width, height), (x0, y0)), bits)


def write_grid_text(config: Configuration, header: bool | None = None) -> str:
    """Inverse of :func:`read_grid_text`; the header is written when the origin is not (0, 0)."""
    g = config.geometry
    if g.d != 2:
        raise ValueError("grid text is two-dimensional")
    if header is None:
        header = any(g.origin)
    rows = config.bits.T[::-1]
    body = "\n".join("".join("#" if v else "." for v in row) for row in rows)
    if header:
        x0, y0 = g.origin
        return f"{x0} {y0} {g.shape[0]} {g.shape[1]}\n{body}\n"
    return body + "\n"
