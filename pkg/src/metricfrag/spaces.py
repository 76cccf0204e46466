"""Validated finite metric spaces, ball queries, and exact ultrametric trees.

A space is a symmetric matrix of pairwise distances validated once at
construction.  The triangle check tolerates ingested rounded data with a
slack of TRIANGLE_SLACK * diameter; all other comparisons are exact.
Ultrametric trees store the integer separation level per pair, so the
strong triangle inequality holds exactly regardless of float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonzeroDiagonal,
    NotSymmetric,
    ParseError,
    SinglePoint,
    TriangleViolation,
    ZeroOffDiagonal,
)

TRIANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A validated n-point metric space with cached diameter and d_min.

    Immutable: the distance matrix is marked read-only at construction.
    Use :func:`make_space` instead of constructing directly.
    """

    n: int
    dist: np.ndarray
    diameter: float
    d_min: float

    def __post_init__(self):
        self.dist.flags.writeable = False

    def __repr__(self):
        return f"FiniteMetricSpace(n={self.n}, diameter={self.diameter}, d_min={self.d_min})"


def make_space(matrix) -> FiniteMetricSpace:
    """Validate a square distance matrix and wrap it as a FiniteMetricSpace.

    Raises NotSymmetric, NonzeroDiagonal, ZeroOffDiagonal, or
    TriangleViolation (with the offending triple).  Non-square or
    non-finite input raises ValueError.
    """
    dist = np.array(matrix, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError(f"matrix must be square, got shape {dist.shape}")
    if not np.all(np.isfinite(dist)):
        raise ValueError("matrix entries must be finite")
    n = dist.shape[0]
    if np.any(np.diag(dist) != 0.0):
        i = int(np.nonzero(np.diag(dist) != 0.0)[0][0])
        raise NonzeroDiagonal(f"dist[{i}][{i}] = {dist[i, i]} != 0")
    if not np.array_equal(dist, dist.T):
        bad = np.nonzero(dist != dist.T)
        i, j = int(bad[0][0]), int(bad[1][0])
        raise NotSymmetric(f"dist[{i}][{j}] = {dist[i, j]} != dist[{j}][{i}] = {dist[j, i]}")
    off = ~np.eye(n, dtype=bool)
    if np.any(dist[off] <= 0.0):
        bad = np.nonzero((dist <= 0.0) & off)
        i, j = int(bad[0][0]), int(bad[1][0])
        if dist[i, j] == 0.0:
            raise ZeroOffDiagonal(f"distinct points {i},{j} at distance 0")
        raise ValueError(f"negative distance dist[{i}][{j}] = {dist[i, j]}")
    diameter = float(dist.max()) if n >= 2 else 0.0
    slack = TRIANGLE_SLACK * diameter
    # dist[i,k] <= dist[i,j] + dist[j,k] for all i,j,k
    for j in range(n):
        sums = dist[:, j][:, None] + dist[j, :][None, :]
        bad = dist > sums + slack
        if np.any(bad):
            i, k = (int(v[0]) for v in np.nonzero(bad))
            raise TriangleViolation(i, j, k, f"dist[{i}][{k}] = {dist[i, k]} > {dist[i, j]} + {dist[j, k]} via {j}")
    d_min = float(dist[off].min()) if n >= 2 else float("inf")
    return FiniteMetricSpace(n=n, dist=dist, diameter=diameter, d_min=d_min)


def ball(space: FiniteMetricSpace, center: int, radius: float) -> set[int]:
    """Closed ball B(center, radius) = {y : d(center, y) <= radius}."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if not 0 <= center < space.n:
        raise ValueError(f"center {center} out of range")
    return set(np.nonzero(space.dist[center] <= radius)[0].tolist())


def jump_radii(space: FiniteMetricSpace, center: int) -> list[tuple[float, int]]:
    """Radii where |B(center, t)| jumps, as (radius, new ball size) pairs.

    Starts at (0, 1); sizes are strictly increasing and end at n.
    |B(center, t)| = size_j for t_j <= t < t_{j+1}.
    """
    if not 0 <= center < space.n:
        raise ValueError(f"center {center} out of range")
    values, counts = np.unique(space.dist[center], return_counts=True)
    sizes = np.cumsum(counts)
    return [(float(t), int(s)) for t, s in zip(values, sizes)]


def normalize(space: FiniteMetricSpace) -> tuple[FiniteMetricSpace, float]:
    """Rescale to diameter exactly 2; returns (space, factor) with original = new * factor."""
    if space.n < 2:
        raise SinglePoint("cannot normalize a one-point space")
    factor = space.diameter / 2.0
    if factor == 1.0:
        return space, 1.0
    scaled = space.dist / factor
    return make_space(scaled), factor


@dataclass(frozen=True)
class UltrametricTree:
    """Level-indexed hierarchy on a survivor set.

    ``level_of_separation[(x, y)]`` (x < y) is the deepest level at which x
    and y still share a cluster; the ultrametric value is
    2 * scale_at_level[level].  Ultrametricity is exact because comparisons
    go through the integer level, never through floats.
    """

    points: tuple[int, ...]
    level_of_separation: dict[tuple[int, int], int] = field(repr=False)
    scale_at_level: tuple[float, ...]

    def level(self, x: int, y: int) -> int:
        if x == y:
            raise ValueError("separation level is defined for distinct points")
        return self.level_of_separation[(x, y) if x < y else (y, x)]

    def value(self, x: int, y: int) -> float:
        return 2.0 * self.scale_at_level[self.level(x, y)]

    def value_matrix(self) -> np.ndarray:
        """Dense matrix of ultrametric values in survivor order (0 on the diagonal)."""
        k = len(self.points)
        out = np.zeros((k, k))
        for a in range(k):
            for b in range(a + 1, k):
                out[a, b] = out[b, a] = self.value(self.points[a], self.points[b])
        return out


def distortion(space: FiniteMetricSpace, tree: UltrametricTree) -> float:
    """(max over pairs rho/d) / (min over pairs rho/d); 1 for < 2 survivors (vacuous)."""
    pts = tree.points
    if len(pts) < 2:
        return 1.0
    ratios = [
        tree.value(x, y) / space.dist[x, y] for i, x in enumerate(pts) for y in pts[i + 1 :]
    ]
    return max(ratios) / min(ratios)


def is_ultrametric_matrix(matrix) -> bool:
    """True iff the matrix is a metric satisfying the strong triangle inequality exactly."""
    space = make_space(matrix)
    d = space.dist
    # d[i,k] <= max(d[i,j], d[j,k]) for all i,j,k
    via = np.maximum(d[:, :, None], d[None, :, :]).min(axis=1)
    return bool(np.all(d <= via))


def parse_matrix_text(text: str) -> FiniteMetricSpace:
    """Parse the distance-matrix text format: a line with n, then n rows of n
    comma-separated decimals.  Strict: no trailing commas, no missing fields.
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input", 1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ParseError(f"first line must be the point count, got {lines[0]!r}", 1) from None
    if n < 1:
        raise ParseError(f"point count must be >= 1, got {n}", 1)
    if len([ln for ln in lines[1:] if ln.strip()]) != n or len(lines) < n + 1:
        raise ParseError(f"expected {n} matrix rows, got {len(lines) - 1}", min(len(lines), n + 1))
    rows = []
    for r in range(n):
        line = lines[1 + r]
        fields = line.split(",")
        if len(fields) != n:
            raise ParseError(f"expected {n} comma-separated values, got {len(fields)}", r + 2)
        row = []
        for c, tok in enumerate(fields):
            tok = tok.strip()
            try:
                value = float(tok)
            except ValueError:
                raise ParseError(f"bad decimal {tok!r}", r + 2, c + 1) from None
            if tok == "" or not np.isfinite(value):
                raise ParseError(f"bad decimal {tok!r}", r + 2, c + 1)
            row.append(value)
        rows.append(row)
    return make_space(rows)


def read_matrix_file(path) -> FiniteMetricSpace:
    """Read and validate a distance-matrix text file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix_text(fh.read())


def format_matrix_text(space: FiniteMetricSpace) -> str:
    """Inverse of parse_matrix_text, with full float precision for round-trips."""
    lines = [str(space.n)]
    for row in space.dist:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
