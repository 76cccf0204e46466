"""Randomized iterative fragmentation and the extracted ultrametric.

One level keeps a point iff the first uniform sample landing in its
enlarged ball B(x, R) also lands in B(x, r); survivors cluster around the
sample that claimed them, clusters have diameter <= 2r and are separated
by more than R - r.  Iterating over a decreasing radii schedule with
(r, R) = (r_n, r_n + 2 r_{n-1} / D) yields a survivor set on which
separation levels define an ultrametric within distortion D.

Samples are always drawn from all of X, not the current survivor set:
that is what makes the per-level survival probability exactly
|B(x,r)| / |B(x,R)| under counting measure, which the expected-mass
bound relies on.  Iteration stops at the truncation index past which
every ball involved is a singleton and levels become identities.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotNormalized, SampleCap
from .exponents import interval_sum, solve_beta
from .radii import RadiiSchedule, stopping_index
from .spaces import FiniteMetricSpace, UltrametricTree, jump_radii

SAMPLE_CAP = 10**7
_BATCH = 32
DIAMETER_SLACK = 1e-12


@dataclass(frozen=True)
class FragmentationResult:
    """Full record of one fragmentation run.

    ``levels[i]`` maps each point surviving level i+1 to its cluster id
    (the 1-based index of the sample that claimed it); survivor sets are
    nested across levels.  ``scales`` holds r_0..r_N.
    """

    space_id: str
    n: int
    D: float
    schedule_kind: str
    u: float | None
    seed: int | None
    scales: tuple[float, ...]
    levels: tuple[dict[int, int], ...]
    survivors: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def to_json_dict(self) -> dict:
        """The documented JSON shape: {n, D, u, seed, scales[], levels[][], survivors[], ultrametric_pairs[]}."""
        tree = ultrametric_of(self)
        pairs = [
            [x, y, tree.level(x, y), tree.value(x, y)]
            for i, x in enumerate(self.survivors)
            for y in self.survivors[i + 1 :]
        ]
        return {
            "n": self.n,
            "D": self.D,
            "u": self.u,
            "seed": self.seed,
            "scales": list(self.scales),
            "levels": [sorted([p, c] for p, c in lvl.items()) for lvl in self.levels],
            "survivors": list(self.survivors),
            "ultrametric_pairs": pairs,
        }


def result_to_json(result: FragmentationResult) -> str:
    return json.dumps(result.to_json_dict(), sort_keys=True)


def space_id(space: FiniteMetricSpace) -> str:
    """Short content hash of the distance matrix, for provenance."""
    return hashlib.sha256(np.ascontiguousarray(space.dist).tobytes()).hexdigest()[:12]


def fragment_once(space: FiniteMetricSpace, active, r: float, R: float,
                  rng: np.random.Generator) -> dict[int, int]:
    """One fragmentation level at scales (r, R); returns survivor -> cluster id.

    Samples i.i.d. uniform points of X until every active point has seen a
    sample in its R-ball; the point survives iff that first sample is also
    in its r-ball.  Cluster ids are 1-based sample indices, so the labeling
    is canonical given the sample stream.
    """
    if not 0.0 < r < R:
        raise DomainError(f"need 0 < r < R, got r={r}, R={R}")
    dist = space.dist
    pending = np.unique(np.fromiter(active, dtype=np.int64))
    if pending.size and (pending[0] < 0 or pending[-1] >= space.n):
        raise ValueError("active contains out-of-range point indices")
    out: dict[int, int] = {}
    index = 0
    while pending.size:
        if index >= SAMPLE_CAP:
            raise SampleCap(f"{pending.size} points unassigned after {index} samples")
        batch = rng.integers(0, space.n, size=_BATCH)
        for s in batch:
            index += 1
            d = dist[s].take(pending)
            in_R = d <= R
            if not in_R.any():
                continue
            claimed = pending[in_R]
            for p in claimed[d[in_R] <= r]:
                out[int(p)] = index
            pending = pending[~in_R]
            if not pending.size:
                break
    return out


def fragment_iterated(space: FiniteMetricSpace, schedule: RadiiSchedule, D: float,
                      rng: np.random.Generator | int) -> FragmentationResult:
    """Iterate fragment_once at (r_n, r_n + 2 r_{n-1}/D) for n = 1..N.

    The space must be normalized (diameter <= 2) and D > 2.  Each level
    consumes fresh draws from the same stream; survivor sets are nested and
    the level-N clusters are singletons.  A run may end with fewer than two
    survivors; the size guarantee is only in expectation.
    """
    if space.diameter > 2.0 * (1.0 + DIAMETER_SLACK):
        raise NotNormalized(f"diameter {space.diameter} > 2; normalize the space first")
    if not D > 2.0:
        raise DomainError(f"D must be > 2, got {D}")
    if schedule[0] != 1.0:
        raise DomainError("schedule must have r_0 = 1")
    seed: int | None
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    else:
        seed = None
    N = stopping_index(schedule, space.d_min, D)
    scales = schedule.realized(N)
    active: tuple[int, ...] = tuple(range(space.n))
    levels = []
    for n in range(1, N + 1):
        r = scales[n]
        assignment = fragment_once(space, active, r, r + 2.0 * scales[n - 1] / D, rng)
        levels.append(assignment)
        active = tuple(sorted(assignment))
    return FragmentationResult(
        space_id=space_id(space),
        n=space.n,
        D=float(D),
        schedule_kind=schedule.kind,
        u=schedule.u,
        seed=seed,
        scales=scales,
        levels=tuple(levels),
        survivors=active,
    )


def ultrametric_of(result: FragmentationResult) -> UltrametricTree:
    """Separation levels of survivor pairs: the longest common prefix of
    their per-level cluster ids; the ultrametric value is 2 * r_level."""
    survivors = result.survivors
    levels = result.levels
    separation: dict[tuple[int, int], int] = {}
    for i, x in enumerate(survivors):
        for y in survivors[i + 1 :]:
            lvl = 0
            for assignment in levels:
                if assignment[x] != assignment[y]:
                    break
                lvl += 1
            separation[(x, y)] = lvl
    return UltrametricTree(
        points=survivors,
        level_of_separation=separation,
        scale_at_level=result.scales,
    )


def expected_mass_bound(space: FiniteMetricSpace, schedule: RadiiSchedule, D: float) -> float:
    """Sum over x of prod_n |B(x, r_n)| / |B(x, r_n + 2 r_{n-1}/D)|.

    All factors beyond the truncation index are 1, so the finite product
    is the exact value of the infinite one.  E[|survivors|] given these
    radii is at least the returned value.
    """
    if space.diameter > 2.0 * (1.0 + DIAMETER_SLACK):
        raise NotNormalized(f"diameter {space.diameter} > 2; normalize the space first")
    if not D > 2.0:
        raise DomainError(f"D must be > 2, got {D}")
    N = stopping_index(schedule, space.d_min, D)
    scales = schedule.realized(N)
    product = np.ones(space.n)
    for n in range(1, N + 1):
        r = scales[n]
        R = r + 2.0 * scales[n - 1] / D
        small = (space.dist <= r).sum(axis=1)
        big = (space.dist <= R).sum(axis=1)
        product *= small / big
    return float(product.sum())


def jensen_lower_bound(space: FiniteMetricSpace, D: float) -> float:
    """Schedule-averaged lower bound on E[|survivors|] for the optimal schedule.

    For each point, the jump radii of its ball-growth function weight the
    log cardinality increments by the exact danger-window probability at
    that radius; the result is at least n^(1 - beta(2/D)) because every
    probability is at most beta.
    """
    if space.diameter > 2.0 * (1.0 + DIAMETER_SLACK):
        raise NotNormalized(f"diameter {space.diameter} > 2; normalize the space first")
    if not D > 2.0:
        raise DomainError(f"D must be > 2, got {D}")
    beta_val = solve_beta(2.0 / D).value
    total = 0.0
    for x in range(space.n):
        jumps = jump_radii(space, x)
        acc = 0.0
        for (t, size), (_, prev_size) in zip(jumps[1:], jumps):
            acc += interval_sum(beta_val, D, t).total * math.log(size / prev_size)
        total += math.exp(-acc)
    return total


def validate_result(space: FiniteMetricSpace, result: FragmentationResult) -> list[str]:
    """Check every structural invariant of a run; returns violation messages.

    Covers nesting, per-level cluster diameter (<= 2 r_n), inter-cluster
    separation (> 2 r_{n-1}/D), singletons at the final level, and the
    distortion bounds d <= rho <= D d on all survivor pairs.
    """
    bad: list[str] = []
    tol = 1e-12 * max(space.diameter, 1.0)
    dist = space.dist
    prev_points: set[int] | None = None
    for i, assignment in enumerate(result.levels):
        n = i + 1
        points = set(assignment)
        if prev_points is not None and not points <= prev_points:
            bad.append(f"level {n}: survivors not nested inside level {n - 1}")
        prev_points = points
        clusters: dict[int, list[int]] = {}
        for p, c in assignment.items():
            clusters.setdefault(c, []).append(p)
        r_n = result.scales[n]
        sep = 2.0 * result.scales[n - 1] / result.D
        members = [np.array(sorted(v)) for v in clusters.values()]
        for m in members:
            if m.size >= 2 and dist[np.ix_(m, m)].max() > 2.0 * r_n + tol:
                bad.append(f"level {n}: cluster diameter {dist[np.ix_(m, m)].max()} > 2*r_n = {2 * r_n}")
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                gap = dist[np.ix_(members[a], members[b])].min()
                if not gap > sep - tol:
                    bad.append(f"level {n}: clusters separated by {gap} <= 2*r_(n-1)/D = {sep}")
        if n == result.depth and any(len(m) > 1 for m in members):
            bad.append(f"level {n}: final-level cluster is not a singleton")
    if set(result.survivors) != (prev_points if prev_points is not None else set(range(space.n))):
        bad.append("survivors do not match the last level")
    if len(result.survivors) >= 2:
        tree = ultrametric_of(result)
        for i, x in enumerate(result.survivors):
            for y in result.survivors[i + 1 :]:
                rho = tree.value(x, y)
                d = dist[x, y]
                if rho < d * (1.0 - 1e-12):
                    bad.append(f"pair ({x},{y}): rho = {rho} < d = {d}")
                if rho > result.D * d * (1.0 + 1e-12):
                    bad.append(f"pair ({x},{y}): rho = {rho} > D*d = {result.D * d}")
    return bad
