"""Reproducible metric-space families for experiments and tests.

Every family is normalized to diameter 2 at generation time (for n >= 2),
so fragmentation preconditions hold without caller action.  The same spec
always produces bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial.distance import squareform, pdist

from .errors import BadSpec, Disconnected
from .spaces import FiniteMetricSpace, make_space, normalize

FAMILIES = ("uniform", "path", "cycle", "euclidean", "gnp_shortest_path", "binary_tree")
GNP_ATTEMPTS = 100


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    seed: int = 0
    dim: int = 3       # euclidean only
    p: float = 0.3     # gnp_shortest_path only
    depth: int | None = None  # binary_tree alternative to n: n = 2^(depth+1) - 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadSpec(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.depth is not None and self.family == "binary_tree":
            object.__setattr__(self, "n", 2 ** (self.depth + 1) - 1)
        if self.n < 1:
            raise BadSpec(f"n must be >= 1, got {self.n}")
        if self.family == "euclidean" and self.dim < 1:
            raise BadSpec(f"dim must be >= 1, got {self.dim}")
        if self.family == "gnp_shortest_path" and not 0.0 < self.p <= 1.0:
            raise BadSpec(f"edge probability must be in (0,1], got {self.p}")

    def as_string(self) -> str:
        parts = [f"n={self.n}", f"seed={self.seed}"]
        if self.family == "euclidean":
            parts.insert(0, f"dim={self.dim}")
        if self.family == "gnp_shortest_path":
            parts.insert(0, f"p={self.p}")
        return f"{self.family}:" + ",".join(parts)


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse a CLI spec string such as ``euclidean:dim=3,n=128,seed=7``."""
    family, _, rest = text.partition(":")
    family = family.strip()
    kwargs: dict = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or key not in {"n", "seed", "dim", "p", "depth"}:
                raise BadSpec(f"bad generator parameter {item!r}")
            try:
                kwargs[key] = float(value) if key == "p" else int(value)
            except ValueError:
                raise BadSpec(f"bad value in {item!r}") from None
    if "n" not in kwargs and "depth" not in kwargs:
        raise BadSpec(f"generator spec {text!r} must set n (or depth for binary_tree)")
    kwargs.setdefault("n", 0)
    try:
        return GeneratorSpec(family=family, **kwargs)
    except TypeError:
        raise BadSpec(f"bad generator spec {text!r}") from None


def _graph_metric(adjacency: np.ndarray) -> np.ndarray:
    return shortest_path(adjacency, method="D", unweighted=True)


def _binary_tree_adjacency(n: int) -> np.ndarray:
    adj = np.zeros((n, n))
    for child in range(1, n):
        parent = (child - 1) // 2
        adj[parent, child] = adj[child, parent] = 1.0
    return adj


def _gnp_adjacency(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    for _ in range(GNP_ATTEMPTS):
        upper = rng.random((n, n)) < p
        adj = np.triu(upper, k=1).astype(float)
        adj = adj + adj.T
        if n == 1 or connected_components(adj, directed=False, return_labels=False) == 1:
            return adj
    raise Disconnected(f"no connected G({n}, {p}) in {GNP_ATTEMPTS} attempts")


def generate(spec: GeneratorSpec) -> FiniteMetricSpace:
    """Build the validated, diameter-2-normalized space described by the spec."""
    n = spec.n
    rng = np.random.default_rng(spec.seed)
    if spec.family == "uniform":
        raw = np.full((n, n), 2.0)
        np.fill_diagonal(raw, 0.0)
    elif spec.family == "path":
        idx = np.arange(n)
        raw = np.abs(idx[:, None] - idx[None, :]).astype(float)
    elif spec.family == "cycle":
        idx = np.arange(n)
        gap = np.abs(idx[:, None] - idx[None, :])
        raw = np.minimum(gap, n - gap).astype(float)
    elif spec.family == "euclidean":
        points = rng.random((n, spec.dim))
        raw = squareform(pdist(points)) if n >= 2 else np.zeros((1, 1))
    elif spec.family == "gnp_shortest_path":
        raw = _graph_metric(_gnp_adjacency(n, spec.p, rng))
    else:
        raw = _graph_metric(_binary_tree_adjacency(n))
    if n == 1:
        return make_space([[0.0]])
    space = make_space(raw)
    return normalize(space)[0]
