"""Random radii schedules and finite truncation.

The one-draw schedule r_n = (1-beta)^((u+n-1)/beta) carries all its
randomness in the single uniform u; the geometric baseline draws each
level independently from [8^-n/4, 8^-n/2].  Values are computed in log
space (exp(((u+n-1)/beta) * log1p(-beta))) so deep levels underflow
gracefully instead of diverging across platforms.  r_0 is 1 exactly, by
definition rather than by formula.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NonTerminating, ParseError

STOPPING_CAP = 10**6


class RadiiSchedule:
    """A realized non-increasing radii sequence with r_0 = 1.

    Values are memoized on first access, so randomized kinds (mn07) stay
    reproducible: index n always yields the n-th draw of the generator.
    Immutable apart from the append-only cache; safe to share between
    concurrent readers.
    """

    def __init__(self, kind: str, *, beta: float | None = None, u: float | None = None,
                 values: list[float] | None = None, rng: np.random.Generator | None = None):
        self.kind = kind
        self.beta = beta
        self.u = u
        self._rng = rng
        self._cache = [1.0] if values is None else [1.0] + list(values[1:])

    def __getitem__(self, n: int) -> float:
        if n < 0:
            raise IndexError("schedule index must be >= 0")
        while len(self._cache) <= n:
            self._cache.append(self._next_value(len(self._cache)))
        return self._cache[n]

    def _next_value(self, n: int) -> float:
        if self.kind == "optimal":
            return math.exp((self.u + n - 1) / self.beta * math.log1p(-self.beta))
        if self.kind == "mn07_geometric":
            lo = 8.0 ** (-n) / 4.0
            return lo + self._rng.random() * lo
        # custom: the final listed value extends to all deeper levels
        return self._cache[-1]

    def realized(self, upto: int) -> tuple[float, ...]:
        """Radii r_0..r_upto as a tuple (forces evaluation)."""
        return tuple(self[i] for i in range(upto + 1))

    def known_values(self) -> tuple[float, ...]:
        """All values evaluated so far (for custom schedules: the full list)."""
        return tuple(self._cache)


def optimal_schedule(beta_val: float, u: float) -> RadiiSchedule:
    """The one-draw schedule r_n = (1-beta)^((u+n-1)/beta), r_0 = 1."""
    if not 0.0 < beta_val < 1.0:
        raise DomainError(f"beta must be in (0,1), got {beta_val}")
    if not 0.0 <= u < 1.0:
        raise DomainError(f"u must be in [0,1), got {u}")
    return RadiiSchedule("optimal", beta=beta_val, u=u)


def mn07_geometric_schedule(rng: np.random.Generator | int) -> RadiiSchedule:
    """Baseline schedule: r_n uniform on [8^-n/4, 8^-n/2], independent per level."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    return RadiiSchedule("mn07_geometric", rng=rng)


def custom_schedule(values) -> RadiiSchedule:
    """Schedule from an explicit list; must start at 1, be positive and non-increasing."""
    values = [float(v) for v in values]
    if not values or values[0] != 1.0:
        raise DomainError("custom schedule must start with r_0 = 1")
    for a, b in zip(values, values[1:]):
        if b <= 0.0 or b > a:
            raise DomainError("custom schedule must be positive and non-increasing")
    return RadiiSchedule("custom", values=values)


def load_schedule(path) -> RadiiSchedule:
    """Read a one-column decimal text file: strictly decreasing, first value 1."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                values.append(float(tok))
            except ValueError:
                raise ParseError(f"bad decimal {tok!r}", lineno) from None
    if not values or values[0] != 1.0:
        raise ParseError("schedule file must start with 1", 1)
    for i, (a, b) in enumerate(zip(values, values[1:]), start=2):
        if not b < a:
            raise ParseError(f"schedule values must be strictly decreasing, got {b} after {a}", i)
        if b <= 0.0:
            raise ParseError(f"schedule values must be positive, got {b}", i)
    return custom_schedule(values)


def stopping_index(schedule: RadiiSchedule, d_min: float, D: float) -> int:
    """Smallest N >= 1 from which fragmentation is the identity.

    Both 2*r_N < d_min (clusters are singletons) and r_N + 2*r_{N-1}/D < d_min
    (the enlarged ball is a singleton, so survival is certain); every level
    after N then changes nothing.
    """
    if not d_min > 0.0:
        raise DomainError(f"d_min must be > 0, got {d_min}")
    if not D > 2.0:
        raise DomainError(f"D must be > 2, got {D}")
    for n in range(1, STOPPING_CAP + 1):
        r_prev = schedule[n - 1]
        r_n = schedule[n]
        if 2.0 * r_n < d_min and r_n + 2.0 * r_prev / D < d_min:
            return n
    raise NonTerminating(f"no truncation index within {STOPPING_CAP} levels; schedule does not decay")
