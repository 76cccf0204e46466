"""Solvers for the distortion-exponent equations and exact interval sums.

theta(D) solves    2/D = (1-theta) * theta^(theta/(1-theta))   for D > 2,
beta(alpha) solves alpha = beta * (1-beta)^((1-beta)/beta)     for alpha in (0,1],
and the two are linked by theta(D) = 1 - beta(2/D).

Both right-hand sides are evaluated in log space so the solvers stay
accurate for beta near 0 and near 1.  Root finding is plain bisection:
monotonicity makes it unconditionally convergent, which matters more here
than iteration count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParameterMismatch

RESIDUAL_TOL = 1e-12
BRACKET_TOL = 1e-13
EQUATION_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class ExponentSolution:
    """A solved exponent with its residual and final bisection bracket."""

    value: float
    residual: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class IntervalSum:
    """Clipped danger-window intervals for one probe radius.

    ``terms`` lists (n, (lo, hi), length) for the level intervals that meet
    [0, 1] with positive length (at most two can).  ``total`` is the exact
    probability that a uniform U lands in one of them.
    """

    r: float
    terms: tuple[tuple[int, tuple[float, float], float], ...]
    total: float


def beta_equation(beta: float) -> float:
    """beta * (1-beta)^((1-beta)/beta), the strictly increasing map with f(0)=0, f(1)=1."""
    if beta <= 0.0:
        return 0.0
    if beta >= 1.0:
        return 1.0
    return math.exp(math.log(beta) + (1.0 - beta) / beta * math.log1p(-beta))


def theta_equation(theta: float) -> float:
    """(1-theta) * theta^(theta/(1-theta)), strictly decreasing from 1 to 0 on (0,1)."""
    return beta_equation(1.0 - theta)


def _bisect(func, lo: float, hi: float, increasing: bool) -> ExponentSolution:
    """Bisection until the bracket is below BRACKET_TOL and the residual below RESIDUAL_TOL."""
    flo = func(lo)
    fhi = func(hi)
    if (flo > 0) == (fhi > 0):
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    mid = 0.5 * (lo + hi)
    fmid = func(mid)
    for _ in range(200):
        if hi - lo <= BRACKET_TOL and abs(fmid) <= RESIDUAL_TOL:
            break
        if (fmid > 0) == increasing:
            hi = mid
        else:
            lo = mid
        new_mid = 0.5 * (lo + hi)
        if new_mid == mid or new_mid == lo or new_mid == hi:
            break
        mid = new_mid
        fmid = func(mid)
    return ExponentSolution(value=mid, residual=fmid, bracket=(lo, hi))


def solve_theta(D: float) -> ExponentSolution:
    """The subset-size exponent theta(D) in (0,1) for target distortion D > 2."""
    if not D > 2.0:
        raise DomainError(f"theta(D) is defined for D > 2, got D = {D}")
    target = 2.0 / D
    return _bisect(lambda t: theta_equation(t) - target, 1e-15, 1.0 - 1e-15, increasing=False)


def solve_beta(alpha: float) -> ExponentSolution:
    """The unique beta with beta_equation(beta) = alpha, for alpha in (0, 1]."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"beta(alpha) is defined for alpha in (0,1], got {alpha}")
    if alpha == 1.0:
        return ExponentSolution(value=1.0, residual=0.0, bracket=(1.0, 1.0))
    return _bisect(lambda b: beta_equation(b) - alpha, 1e-15, 1.0 - 1e-15, increasing=True)


def _beta_p_objective(x: float, alpha: float, p: float) -> float:
    # ((1+alpha*x)^p - 1) / (x^p - 1), via expm1 so small p stays accurate
    return math.expm1(p * math.log1p(alpha * x)) / math.expm1(p * math.log(x))


def _beta_p_search(alpha: float, p: float) -> tuple[float, float]:
    """Locate the interior minimum of the beta_p objective; returns (x_min, f_min).

    The objective blows up at x -> 1+, dips below alpha^p at an interior
    minimum, and tends back up to alpha^p as x -> infinity.  The upper end
    of the search range is found by doubling until the objective rises,
    then the minimum is refined by golden-section to relative 1e-10 in x.
    """
    if not (0.0 < alpha < 1.0 and 0.0 < p < 1.0):
        raise DomainError(f"beta_p needs (alpha, p) in the open unit square, got ({alpha}, {p})")
    x = 2.0
    fx = _beta_p_objective(x, alpha, p)
    while True:
        x2 = 2.0 * x
        f2 = _beta_p_objective(x2, alpha, p)
        if f2 >= fx or x2 > 1e300:
            break
        x, fx = x2, f2
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 1.0 + 1e-9, x2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _beta_p_objective(c, alpha, p)
    fd = _beta_p_objective(d, alpha, p)
    while (b - a) > 1e-10 * max(1.0, abs(a)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _beta_p_objective(c, alpha, p)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _beta_p_objective(d, alpha, p)
    return 0.5 * (a + b), min(fc, fd)


def beta_p(alpha: float, p: float) -> float:
    """inf over x > 1 of ((1+alpha*x)^p - 1)/(x^p - 1)."""
    return _beta_p_search(alpha, p)[1]


def beta_p_minimizer(alpha: float, p: float) -> float:
    """The x attaining beta_p(alpha, p)."""
    return _beta_p_search(alpha, p)[0]


def check_beta_matches(beta_val: float, D: float) -> None:
    """Raise ParameterMismatch unless beta_val solves the beta equation for this D."""
    if abs(beta_equation(beta_val) - 2.0 / D) > EQUATION_CHECK_TOL:
        raise ParameterMismatch(
            f"beta = {beta_val} does not solve the exponent equation for D = {D}"
        )


def interval_sum(beta_val: float, D: float, r: float) -> IntervalSum:
    """Exact danger-window probability sum for the one-draw schedule at probe radius r.

    Level n contributes the interval I_n = (a - n + 1, a - n + 1 + beta]
    with a = beta * log(r) / log(1 - beta), clipped to [0, 1].
    """
    if not (0.0 < beta_val < 1.0):
        raise DomainError(f"beta must be in (0,1), got {beta_val}")
    if not D > 2.0:
        raise DomainError(f"D must be > 2, got {D}")
    if not r > 0.0:
        raise DomainError(f"probe radius must be > 0, got {r}")
    check_beta_matches(beta_val, D)
    a = beta_val * math.log(r) / math.log1p(-beta_val)
    terms = []
    total = 0.0
    n_lo = max(1, math.floor(a) - 1)
    for n in range(n_lo, math.floor(a) + 3):
        if n < 1:
            continue
        lo = a - n + 1
        hi = lo + beta_val
        clo, chi = max(lo, 0.0), min(hi, 1.0)
        if chi > clo:
            terms.append((n, (clo, chi), chi - clo))
            total += chi - clo
    return IntervalSum(r=r, terms=tuple(terms), total=total)


def sup_interval_sum(beta_val: float, D: float, grid: int) -> float:
    """Max of interval_sum(...).total over a log-uniform radius grid spanning one period.

    The grid covers r in [(1-beta)^(1/beta), 1], one full period of a mod 1,
    endpoint r = 1 (a = 0) included.
    """
    if grid < 10:
        raise DomainError(f"grid must be >= 10, got {grid}")
    check_beta_matches(beta_val, D)
    log_r_min = math.log1p(-beta_val) / beta_val
    best = 0.0
    for i in range(grid + 1):
        r = math.exp(log_r_min * (1.0 - i / grid))
        best = max(best, interval_sum(beta_val, D, r).total)
    return best
