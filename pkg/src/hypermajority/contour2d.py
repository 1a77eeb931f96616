"""Geometry of finite planar clusters: contours, corners, regularity and the
corner identity for the 3x3 majority update.

Dual points are indexed by integer pairs: ``(a, b)`` stands for the point
``(a - 1/2, b - 1/2)``, so the unit square around cell ``(x, y)`` has dual
corners ``(x, y)``, ``(x + 1, y)``, ``(x, y + 1)`` and ``(x + 1, y + 1)``.
An edge is a sorted pair of adjacent dual points.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .lattice import Configuration, LatticeGeometry
from .rng import RngStream

DualPoint = tuple[int, int]
Edge = tuple[DualPoint, DualPoint]

PAD = 3


class GenerationError(RuntimeError):
    pass


def _canvas(config: Configuration, pad: int = PAD) -> tuple[np.ndarray, tuple[int, int]]:
    """Tight copy of the support with ``pad`` cells of 0 around it, and its origin."""
    if config.geometry.d != 2:
        raise ValueError("cluster geometry needs a 2D configuration")
    c = config.cropped(pad)
    return c.bits.astype(np.int8), tuple(c.geometry.origin)


@dataclass(frozen=True)
class Contour:
    edges: frozenset[Edge]

    def __len__(self) -> int:
        return len(self.edges)

    def degrees(self) -> dict[DualPoint, int]:
        deg: dict[DualPoint, int] = defaultdict(int)
        for p, q in self.edges:
            deg[p] += 1
            deg[q] += 1
        return dict(deg)

    def adjacency(self) -> dict[DualPoint, list[DualPoint]]:
        adj: dict[DualPoint, list[DualPoint]] = defaultdict(list)
        for p, q in sorted(self.edges):
            adj[p].append(q)
            adj[q].append(p)
        return dict(adj)

    def components(self) -> list[set[DualPoint]]:
        adj = self.adjacency()
        seen: set[DualPoint] = set()
        out = []
        for start in sorted(adj):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                p = stack.pop()
                for q in adj[p]:
                    if q not in comp:
                        comp.add(q)
                        stack.append(q)
            seen |= comp
            out.append(comp)
        return out


def build_contour(config: Configuration) -> Contour:
    """Open dual edges: those separating two nearest neighbours in different states."""
    B, (ox, oy) = _canvas(config)
    edges = set()
    # neighbours (x, y), (x + 1, y): vertical dual edge at a = x + 1
    for i, j in zip(*np.nonzero(B[1:, :] != B[:-1, :])):
        a, b = ox + i + 1, oy + j
        edges.add(((a, b), (a, b + 1)))
    # neighbours (x, y), (x, y + 1): horizontal dual edge at b = y + 1
    for i, j in zip(*np.nonzero(B[:, 1:] != B[:, :-1])):
        a, b = ox + i, oy + j + 1
        edges.add(((a, b), (a + 1, b)))
    return Contour(frozenset((tuple(map(int, p)), tuple(map(int, q))) for p, q in edges))


@dataclass
class JordanVerdict:
    ok: bool
    reason: str = ""
    witness: DualPoint | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_jordan(contour: Contour) -> JordanVerdict:
    """One cycle, every dual point of degree 0 or 2."""
    if not contour.edges:
        return JordanVerdict(False, "empty")
    for p, d in sorted(contour.degrees().items()):
        if d != 2:
            return JordanVerdict(False, f"dual point of degree {d}", p)
    comps = contour.components()
    if len(comps) > 1:
        return JordanVerdict(False, f"{len(comps)} cycles", min(comps[1]))
    return JordanVerdict(True)


@dataclass
class CornerReport:
    positive: list[tuple[int, int]]
    negative: list[tuple[int, int]]

    @property
    def c_plus(self) -> int:
        return len(self.positive)

    @property
    def c_minus(self) -> int:
        return len(self.negative)

    @property
    def all(self) -> list[tuple[int, int]]:
        return sorted(self.positive + self.negative)


def find_corners(config: Configuration) -> CornerReport:
    """Vertices whose two neighbours along some diagonal agree with each other
    and disagree with the vertex; signed by the vertex's own state."""
    B, (ox, oy) = _canvas(config)
    c = B[1:-1, 1:-1]
    d1 = (B[:-2, :-2] == B[2:, 2:]) & (B[:-2, :-2] != c)
    d2 = (B[:-2, 2:] == B[2:, :-2]) & (B[:-2, 2:] != c)
    hit = d1 | d2
    pos, neg = [], []
    for i, j in zip(*np.nonzero(hit)):
        v = (int(ox + i + 1), int(oy + j + 1))
        (pos if c[i, j] else neg).append(v)
    return CornerReport(sorted(pos), sorted(neg))


# the 3x3 block of dual points around a window center, and the unit edges between them
_WIN_POINTS = [(u, v) for u in (-1, 0, 1) for v in (-1, 0, 1)]
_WIN_EDGES = [((u, v), (u + 1, v)) for u in (-1, 0) for v in (-1, 0, 1)] + [
    ((u, v), (u, v + 1)) for u in (-1, 0, 1) for v in (-1, 0)
]


def _pattern_connected(key: int) -> bool:
    """Connectivity of the window pattern encoded by :func:`_window_keys`."""
    pts = [p for k, p in enumerate(_WIN_POINTS) if key >> k & 1]
    if len(pts) <= 1:
        return True
    parent = {p: p for p in pts}

    def root(p):
        while parent[p] != p:
            p = parent[p]
        return p

    for k, (p, q) in enumerate(_WIN_EDGES):
        if key >> (9 + k) & 1:
            parent[root(p)] = root(q)
    return len({root(p) for p in pts}) == 1


def _window_keys(contour: Contour) -> tuple[np.ndarray, tuple[int, int]]:
    """Bit pattern (9 point bits, then 12 edge bits) of every window meeting the contour."""
    deg = contour.degrees()
    xs = [p[0] for p in deg]
    ys = [p[1] for p in deg]
    a0, b0 = min(xs) - 2, min(ys) - 2
    W, H = max(xs) - a0 + 3, max(ys) - b0 + 3
    on = np.zeros((W, H), dtype=np.int64)
    eh = np.zeros((W, H), dtype=np.int64)  # edge (a, b)-(a+1, b)
    ev = np.zeros((W, H), dtype=np.int64)  # edge (a, b)-(a, b+1)
    for p in deg:
        on[p[0] - a0, p[1] - b0] = 1
    for p, q in contour.edges:
        (eh if p[1] == q[1] else ev)[p[0] - a0, p[1] - b0] = 1
    keys = np.zeros((W - 2, H - 2), dtype=np.int64)

    def shifted(arr, u, v):
        return arr[1 + u : W - 1 + u, 1 + v : H - 1 + v]

    for k, (u, v) in enumerate(_WIN_POINTS):
        keys |= shifted(on, u, v) << k
    for k, (p, q) in enumerate(_WIN_EDGES):
        keys |= shifted(eh if p[1] == q[1] else ev, *p) << (9 + k)
    return keys, (a0 + 1, b0 + 1)


def local_connectivity_failures(contour: Contour) -> list[DualPoint]:
    """Dual points x for which the contour inside the closed square x + [-1, 1]^2
    is disconnected.

    An open edge either lies inside such a square or meets it in one
    endpoint only, so the intersection is the union of the inside edges and
    the contour's dual points on the square; its connectivity is that of
    the graph they form.
    """
    if not contour.edges:
        return []
    keys, (a0, b0) = _window_keys(contour)
    uniq, inv = np.unique(keys, return_inverse=True)
    ok = np.array([_pattern_connected(int(k)) for k in uniq])
    bad = np.argwhere(~ok[inv.reshape(keys.shape)])
    return [(int(a0 + i), int(b0 + j)) for i, j in bad]


@dataclass
class RegularityVerdict:
    r0: bool
    r1: bool
    r2: bool
    vertex_count: int
    r0_witness: DualPoint | None = None
    r1_witness: DualPoint | None = None
    r2_witness: tuple[tuple[int, int], tuple[int, int]] | None = None
    reason: str = ""

    @property
    def regular(self) -> bool:
        return self.r0 and self.r1 and self.r2

    def __bool__(self) -> bool:
        return self.regular


def close_corner_pair(corners: list[tuple[int, int]]) -> tuple[tuple[int, int], tuple[int, int]] | None:
    """First pair of corners at Chebyshev distance <= 2 (their closed 3x3 squares meet)."""
    for k, p in enumerate(corners):
        for q in corners[k + 1 :]:
            if max(abs(p[0] - q[0]), abs(p[1] - q[1])) <= 2:
                return p, q
    return None


def is_regular_cluster(config: Configuration) -> RegularityVerdict:
    contour = build_contour(config)
    j = is_jordan(contour)
    r1_fail = local_connectivity_failures(contour)
    pair = close_corner_pair(find_corners(config).all)
    return RegularityVerdict(
        r0=j.ok,
        r1=not r1_fail,
        r2=pair is None,
        vertex_count=config.count(),
        r0_witness=j.witness,
        r1_witness=r1_fail[0] if r1_fail else None,
        r2_witness=pair,
        reason=j.reason,
    )


def phi_value(k: int) -> int:
    """Change in the number of 1s when a 3x3 square holding k ones is updated."""
    return 9 - k if k >= 5 else -k


def phi(config: Configuration, center: tuple[int, int]) -> int:
    x, y = center
    k = sum(config[(x + u, y + v)] for u in (-1, 0, 1) for v in (-1, 0, 1))
    return phi_value(k)


def phi_field(config: Configuration) -> tuple[np.ndarray, tuple[int, int]]:
    """phi at every center of the padded canvas; zero outside it."""
    B, (ox, oy) = _canvas(config)
    k = sliding_window_view(B, (3, 3)).sum(axis=(2, 3))
    f = np.where(k >= 5, 9 - k, -k)
    return f, (ox + 1, oy + 1)


def phi_sum(config: Configuration) -> int:
    """Sum of phi over the plane; it vanishes at distance > 1 from the support,
    which the padding of the canvas always covers."""
    return int(phi_field(config)[0].sum())


@dataclass
class CornerIdentityReport:
    vertices: int
    c_plus: int
    c_minus: int
    phi_sum: int
    regular: bool
    identity_holds: bool

    @property
    def asserted(self) -> bool:
        """True when the input is regular with at least 11 vertices, so the identity must hold."""
        return self.regular and self.vertices >= 11


def check_corner_identity(config: Configuration) -> CornerIdentityReport:
    """Compare phi_sum with 9 (c_minus - c_plus)."""
    corners = find_corners(config)
    s = phi_sum(config)
    return CornerIdentityReport(
        vertices=config.count(),
        c_plus=corners.c_plus,
        c_minus=corners.c_minus,
        phi_sum=s,
        regular=is_regular_cluster(config).regular,
        identity_holds=s == 9 * (corners.c_minus - corners.c_plus),
    )


_STEP = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}


def cycle_points(contour: Contour) -> list[DualPoint]:
    """Dual points of a Jordan contour in clockwise order, starting at the smallest one."""
    j = is_jordan(contour)
    if not j:
        raise ValueError(f"contour is not a Jordan curve: {j.reason}")
    adj = contour.adjacency()
    start = min(adj)
    path = [start]
    prev, cur = start, max(adj[start])
    while cur != start:
        path.append(cur)
        a, b = adj[cur]
        prev, cur = cur, (b if a == prev else a)
    area2 = sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(path, path[1:] + path[:1]))
    if area2 > 0:  # counterclockwise
        path = [path[0]] + path[:0:-1]
    return path


def turn_counts(contour: Contour) -> tuple[int, int]:
    """(right turns, left turns) along the clockwise walk."""
    path = cycle_points(contour)
    m = len(path)
    rights = lefts = 0
    for k in range(m):
        p, q, r = path[k - 1], path[k], path[(k + 1) % m]
        u = (q[0] - p[0], q[1] - p[1])
        v = (r[0] - q[0], r[1] - q[1])
        cross = u[0] * v[1] - u[1] * v[0]
        if cross < 0:
            rights += 1
        elif cross > 0:
            lefts += 1
    return rights, lefts


@dataclass
class ThicknessVerdict:
    holds: bool
    witness: tuple[tuple[int, int], tuple[int, int]] | None = None  # (x, e)
    checked: int = 0

    def __bool__(self) -> bool:
        return self.holds


def check_boundary_thickness(config: Configuration) -> ThicknessVerdict:
    """For every ordered pair of disagreeing neighbours (x, x + e), require
    three equal states on each side along e:
    η(x-2e) = η(x-e) = η(x) != η(x+e) = η(x+2e) = η(x+3e).
    """
    B, (ox, oy) = _canvas(config, pad=PAD + 1)
    W, H = B.shape
    P = np.pad(B, 3)
    checked = 0
    for e in ((1, 0), (-1, 0), (0, 1), (0, -1)):

        def at(s):
            return P[3 + s * e[0] : 3 + s * e[0] + W, 3 + s * e[1] : 3 + s * e[1] + H]

        here = at(0)
        edge = here != at(1)
        ok = (at(-2) == here) & (at(-1) == here) & (at(2) == at(1)) & (at(3) == at(1))
        checked += int(edge.sum())
        bad = np.argwhere(edge & ~ok)
        if len(bad):
            i, j = bad[0]
            return ThicknessVerdict(False, ((int(ox + i), int(oy + j)), e), checked)
    return ThicknessVerdict(True, None, checked)


def cluster_from_mask(mask: np.ndarray, origin: tuple[int, int] = (0, 0)) -> Configuration:
    """Window configuration with bits ``mask[i, j]`` at (origin + (i, j)), padded by PAD."""
    geo = LatticeGeometry.window(mask.shape, origin)
    return Configuration(geo, np.asarray(mask, dtype=np.uint8)).padded(PAD)


def rectangle(width: int, height: int) -> Configuration:
    return cluster_from_mask(np.ones((width, height), dtype=np.uint8))


def _profile(rng: RngStream, length: int, total_shift: int, min_run: int, min_jump: int) -> list[int]:
    """Non-decreasing integer profile of ``length`` entries starting at 0; every
    change is a jump of at least ``min_jump`` after a run of at least ``min_run``."""
    out = []
    cur = 0
    while len(out) < length:
        run = min_run + rng.below(min_run + 1)
        out.extend([cur] * run)
        if total_shift - cur >= min_jump:
            cur += min_jump + rng.below(max(1, min(3, total_shift - cur - min_jump + 1)))
    return out[:length]


def _staircase(rng: RngStream, target: int) -> np.ndarray:
    steps = 2 + rng.below(3)
    widths = [4 + rng.below(4) for _ in range(steps)]
    drops = [4 + rng.below(4) for _ in range(steps)]
    base = max(4, int(round(target / sum(widths))) - sum(drops) // 2)
    heights = [base + sum(drops[k:]) for k in range(steps)]  # strictly decreasing, last >= base + 4
    mask = np.zeros((sum(widths), heights[0]), dtype=np.uint8)
    x = 0
    for w, h in zip(widths, heights):
        mask[x : x + w, :h] = 1
        x += w
    return mask


def _orthoconvex(rng: RngStream, target: int) -> np.ndarray:
    """Rows are intervals; the left and right indentations are unimodal in y
    (shrinking to 0 at a random row, then growing), so every row and every
    column meets the cluster in an interval."""
    side = max(12, int(round(np.sqrt(target))))
    height = side + rng.below(side // 2 + 1)
    drop = 4 + rng.below(side // 2 + 1)

    def indentation():
        peak = rng.below(height)
        below = _profile(rng, peak, drop, 3, 3)
        above = _profile(rng, height - peak, drop, 3, 3)
        return below[::-1] + above

    left, right = indentation(), indentation()
    width = side + 2 * drop
    mask = np.zeros((width, height), dtype=np.uint8)
    for y in range(height):
        lo, hi = left[y], width - right[y]
        if hi - lo < 4:
            return np.zeros((1, 1), dtype=np.uint8)
        mask[lo:hi, y] = 1
    return mask


SHAPE_CLASSES = ("rectangle", "staircase", "random_orthoconvex")


def generate_regular_cluster(rng: RngStream, target_size: int, shape_class: str, budget: int = 1000) -> Configuration:
    """Random regular cluster with at least 11 vertices, by rejection against the validator.

    Rectangles have sides in [4, 40]; ``target_size`` guides the area.
    """
    if shape_class not in SHAPE_CLASSES:
        raise ValueError(f"unknown shape class {shape_class!r}; choose from {SHAPE_CLASSES}")
    for _ in range(budget):
        if shape_class == "rectangle":
            w = 4 + rng.below(37)
            h = min(40, max(4, int(round(target_size / w)) + rng.below(5) - 2))
            mask = np.ones((w, h), dtype=np.uint8)
        elif shape_class == "staircase":
            mask = _staircase(rng, target_size)
        else:
            mask = _orthoconvex(rng, target_size)
        if mask.sum() < 11:
            continue
        config = cluster_from_mask(mask)
        if is_regular_cluster(config).regular:
            return config
    raise GenerationError(f"no regular {shape_class} found in {budget} attempts")
