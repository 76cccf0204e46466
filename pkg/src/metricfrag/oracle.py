"""Ground-truth verification of distortion-D ultrametric embeddability.

The subdominant ultrametric (minimax path values over a minimum spanning
tree) is the entrywise-largest ultrametric below a given matrix.  A subset
embeds into some ultrametric within [d, D*d] iff the subdominant of D*d
restricted to the subset dominates d -- the subdominant is the maximal
candidate, so checking it is an exact decision, not a heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .errors import DomainError, TooLarge
from .spaces import FiniteMetricSpace

MAX_EXHAUSTIVE = 20
DOMINANCE_SLACK = 1e-12


def _mst_adjacency(dist: np.ndarray) -> list[list[tuple[int, float]]]:
    mst = minimum_spanning_tree(dist).tocoo()
    adj: list[list[tuple[int, float]]] = [[] for _ in range(dist.shape[0])]
    for i, j, w in zip(mst.row, mst.col, mst.data):
        adj[int(i)].append((int(j), float(w)))
        adj[int(j)].append((int(i), float(w)))
    return adj


def _subdominant_matrix(dist: np.ndarray) -> np.ndarray:
    """Minimax path values between all pairs, computed on the MST."""
    n = dist.shape[0]
    adj = _mst_adjacency(dist)
    out = np.zeros((n, n))
    for src in range(n):
        stack = [src]
        seen = np.zeros(n, dtype=bool)
        seen[src] = True
        while stack:
            v = stack.pop()
            for w, weight in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    out[src, w] = max(out[src, v], weight)
                    stack.append(w)
    return out


@dataclass(frozen=True)
class SubdominantResult:
    """The largest ultrametric below the input, with minimax witness paths."""

    matrix: np.ndarray
    witness_paths: dict[tuple[int, int], tuple[int, ...]]


def subdominant_ultrametric(space: FiniteMetricSpace) -> SubdominantResult:
    """Entrywise-maximal ultrametric below the space's metric.

    The value for a pair is the bottleneck edge weight on the MST path
    between them; that path is returned as the witness.
    """
    n = space.n
    adj = _mst_adjacency(space.dist)
    matrix = _subdominant_matrix(space.dist)
    parent = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        stack = [src]
        seen = np.zeros(n, dtype=bool)
        seen[src] = True
        while stack:
            v = stack.pop()
            for w, _ in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[src, w] = v
                    stack.append(w)
    paths: dict[tuple[int, int], tuple[int, ...]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            path = [j]
            while path[-1] != i:
                path.append(int(parent[i, path[-1]]))
            paths[(i, j)] = tuple(reversed(path))
    return SubdominantResult(matrix=matrix, witness_paths=paths)


def embeddable(space: FiniteMetricSpace, subset, D: float) -> bool:
    """True iff some ultrametric rho on the subset satisfies d <= rho <= D*d."""
    if D < 1.0:
        raise DomainError(f"D must be >= 1, got {D}")
    idx = np.array(sorted(set(int(p) for p in subset)), dtype=np.int64)
    if idx.size < 2:
        raise ValueError("subset must contain at least 2 points")
    if idx[0] < 0 or idx[-1] >= space.n:
        raise ValueError("subset contains out-of-range point indices")
    d = space.dist[np.ix_(idx, idx)]
    rho = _subdominant_matrix(D * d)
    return bool(np.all(rho >= d * (1.0 - DOMINANCE_SLACK)))


def max_subset(space: FiniteMetricSpace, D: float, size_cap: int | None = None) -> tuple[int, tuple[int, ...]]:
    """Largest subset (lexicographically first among ties) that embeds within D.

    Exhaustive search over subsets in decreasing size, pruned by failing
    triples: any candidate containing a non-embeddable triple is skipped.
    """
    if space.n > MAX_EXHAUSTIVE:
        raise TooLarge(f"exhaustive search capped at n = {MAX_EXHAUSTIVE}, got {space.n}")
    if D < 1.0:
        raise DomainError(f"D must be >= 1, got {D}")
    n = space.n
    if n == 1:
        return 1, (0,)
    cap = n if size_cap is None else min(n, size_cap)
    if cap < 2:
        raise DomainError(f"size_cap must allow at least a pair, got {size_cap}")
    bad_triples = {
        t for t in combinations(range(n), 3) if not embeddable(space, t, D)
    }
    for k in range(cap, 1, -1):
        for cand in combinations(range(n), k):
            if any(t in bad_triples for t in combinations(cand, 3)):
                continue
            if embeddable(space, cand, D):
                return k, cand
    return 2, (0, 1)
