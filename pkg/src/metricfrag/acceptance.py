"""The acceptance suite: every verifiable guarantee, checked at desk scale.

Each criterion function is self-contained and deterministic (fixed seeds),
returns a CriterionResult, and is surfaced both through ``metricfrag
check`` and through tests/test_acceptance.py.  Monte Carlo assertions use
three standard errors; everything else is checked at the stated tolerance.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .exponents import beta_p, beta_p_minimizer, interval_sum, solve_beta, solve_theta, sup_interval_sum
from .fragmentation import fragment_iterated, fragment_once, jensen_lower_bound, ultrametric_of, validate_result
from .generators import GeneratorSpec, generate
from .oracle import embeddable, max_subset
from .radii import optimal_schedule
from .spaces import distortion, is_ultrametric_matrix

FAMILIES = ("uniform", "path", "cycle", "euclidean", "gnp_shortest_path", "binary_tree")


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} ({self.seconds:.1f}s) -- {self.detail}"


def _result(number: int, name: str, start: float, passed: bool, detail: str) -> CriterionResult:
    return CriterionResult(number, name, passed, detail, time.perf_counter() - start)


def criterion_1() -> CriterionResult:
    """Exact survival law on the 8-point uniform metric at (r, R) = (1, 2)."""
    start = time.perf_counter()
    space = generate(GeneratorSpec("uniform", n=8))
    rng = np.random.default_rng(140)
    runs = 100_000
    counts = np.zeros(8)
    points = tuple(range(8))
    for _ in range(runs):
        for p in fragment_once(space, points, 1.0, 2.0, rng):
            counts[p] += 1
    freq = counts / runs
    tol = 3.0 * math.sqrt(0.125 * 0.875 / runs)
    worst = float(np.abs(freq - 0.125).max())
    return _result(1, "exact survival law (1/8 within 3SE)", start,
                   worst <= tol, f"max |freq - 1/8| = {worst:.5f}, 3SE = {tol:.5f}")


def criterion_2() -> CriterionResult:
    """Structural invariants over 1000 runs across all families, n <= 64."""
    start = time.perf_counter()
    sizes = (2, 3, 5, 8, 12, 17, 24, 33, 47, 64)
    distortions = (2.5, 4.0, 8.0)
    betas = {D: solve_beta(2.0 / D).value for D in distortions}
    master = np.random.default_rng(2026)
    failures = []
    for i in range(1000):
        spec = GeneratorSpec(FAMILIES[i % 6], n=sizes[(i // 6) % 10], seed=i % 97)
        space = generate(spec)
        D = distortions[i % 3]
        schedule = optimal_schedule(betas[D], float(master.random()))
        result = fragment_iterated(space, schedule, D, np.random.default_rng((31, i)))
        bad = validate_result(space, result)
        if bad:
            failures.append(f"run {i} ({spec.as_string()}, D={D}): {bad[0]}")
            continue
        if len(result.survivors) >= 2:
            tree = ultrametric_of(result)
            if not is_ultrametric_matrix(tree.value_matrix()):
                failures.append(f"run {i}: strong triangle scan failed")
            elif distortion(space, tree) > D * (1.0 + 1e-12):
                failures.append(f"run {i}: distortion {distortion(space, tree)} > D = {D}")
    return _result(2, "structural invariants, 1000 runs, zero failures", start,
                   not failures, failures[0] if failures else "0 violations in 1000 runs")


@lru_cache(maxsize=1)
def _expectation_chain() -> dict:
    space = generate(GeneratorSpec("euclidean", n=128, seed=7, dim=3))
    D = 6.0
    beta_val = solve_beta(2.0 / D).value
    bound = 128.0 ** (1.0 - beta_val)
    jensen = jensen_lower_bound(space, D)
    children = np.random.SeedSequence(424242).spawn(2000)
    sizes = []
    for child in children:
        sched_ss, sample_ss = child.spawn(2)
        u = float(np.random.default_rng(sched_ss).random())
        schedule = optimal_schedule(beta_val, u)
        result = fragment_iterated(space, schedule, D, np.random.default_rng(sample_ss))
        sizes.append(len(result.survivors))
    sizes = np.array(sizes)
    return {"bound": bound, "jensen": jensen, "sizes": sizes}


def criterion_3() -> CriterionResult:
    """Expectation chain on euclidean n=128, dim=3, D=6 over 2000 trials."""
    start = time.perf_counter()
    data = _expectation_chain()
    sizes, jensen, bound = data["sizes"], data["jensen"], data["bound"]
    mean = float(sizes.mean())
    se = float(sizes.std(ddof=1) / math.sqrt(sizes.size))
    ok_jensen = jensen >= bound - 1e-9
    ok_mean = mean >= jensen - 3.0 * se
    return _result(3, "expectation chain (mean >= jensen >= n^(1-beta))", start,
                   ok_jensen and ok_mean,
                   f"mean = {mean:.3f} (3SE = {3 * se:.3f}), jensen = {jensen:.3f}, bound = {bound:.3f}")


def criterion_4() -> CriterionResult:
    """Some trial reaches the guaranteed size ceil(n^(1-beta))."""
    start = time.perf_counter()
    data = _expectation_chain()
    need = math.ceil(data["bound"])
    biggest = int(data["sizes"].max())
    return _result(4, "existence at the guaranteed size", start,
                   biggest >= need, f"max |survivors| = {biggest}, need >= {need}")


def _mc_interval_probabilities(D: float, n_radii: int, draws: int, seed: int) -> tuple[float, float]:
    """Max |MC - interval_sum| over probe radii, and max true-window excess over beta.

    The analytic-window events extend the one-draw formula to level 0
    (r~_0 = (1-beta)^((u-1)/beta)), which tiles exactly like the interval
    formula at every radius; the true-window events use r_0 = 1, whose
    total can fall below the formula but never exceeds beta.
    """
    beta = solve_beta(2.0 / D).value
    alpha = 2.0 / D
    L = math.log1p(-beta)
    U = np.random.default_rng(seed).random(draws)
    log_lo = 2.5 * L / beta
    log_hi = math.log1p(alpha) + 0.05
    worst_match = 0.0
    worst_excess = -1.0
    for k in range(n_radii):
        r = math.exp(log_lo + (log_hi - log_lo) * k / (n_radii - 1))
        expected = interval_sum(beta, D, r).total
        a = beta * math.log(r) / L
        analytic = np.zeros(draws, dtype=bool)
        true_win = np.zeros(draws, dtype=bool)
        for n in range(max(1, math.floor(a) - 1), math.floor(a) + 3):
            r_n = np.exp((U + n - 1) / beta * L)
            prev = np.exp((U + n - 2) / beta * L)
            analytic |= (r_n < r) & (r <= r_n + alpha * prev)
            if n == 1:
                prev = 1.0
            true_win |= (r_n < r) & (r <= r_n + alpha * prev)
        mc = float(analytic.mean())
        se = math.sqrt(max(expected * (1.0 - expected), 1e-12) / draws)
        worst_match = max(worst_match, abs(mc - expected) - 3.0 * se)
        se_beta = math.sqrt(beta * (1.0 - beta) / draws)
        worst_excess = max(worst_excess, float(true_win.mean()) - (beta + 3.0 * se_beta))
    return worst_match, worst_excess


def criterion_5() -> CriterionResult:
    """Admissible-exponent supremum and Monte Carlo interval probabilities."""
    start = time.perf_counter()
    problems = []
    for D in (2.1, 3.0, 6.0, 20.0):
        beta = solve_beta(2.0 / D).value
        sup = sup_interval_sum(beta, D, 10_000)
        if abs(sup - beta) > 1e-9:
            problems.append(f"D={D}: sup = {sup} vs beta = {beta}")
        match_gap, excess = _mc_interval_probabilities(D, n_radii=1000, draws=100_000, seed=99)
        if match_gap > 0:
            problems.append(f"D={D}: MC vs interval_sum off by 3SE + {match_gap:.2e}")
        if excess > 0:
            problems.append(f"D={D}: admissibility exceeded, beta + 3SE + {excess:.2e}")
    return _result(5, "admissible supremum + MC interval probabilities", start,
                   not problems, problems[0] if problems else "4 distortions, sup and MC all within tolerance")


def criterion_6() -> CriterionResult:
    """Exponent identities, the elementary lower bound, and the leading-order asymptotic."""
    start = time.perf_counter()
    problems = []
    for D in (2.01, 2.1, 3.0, 6.0, 10.0, 100.0):
        theta = solve_theta(D).value
        beta = solve_beta(2.0 / D).value
        if abs(theta + beta - 1.0) > 1e-11:
            problems.append(f"D={D}: theta + beta - 1 = {theta + beta - 1:.2e}")
        if theta < 1.0 - 2.0 * math.e / D:
            problems.append(f"D={D}: theta = {theta} < 1 - 2e/D")
    eps = 1e-6
    ratio = solve_theta(2.0 + eps).value * 2.0 * math.log(1.0 / eps) / eps
    if not 0.8 <= ratio <= 1.25:
        problems.append(f"asymptotic ratio theta(2+e)*2*log(1/e)/e = {ratio:.6f} outside [0.8, 1.25]")
    return _result(6, "exponent identities and asymptotics", start,
                   not problems, problems[0] if problems else "identity, lower bound, asymptotic all hold")


def criterion_7() -> CriterionResult:
    """beta_p decreases to beta(alpha) and the critical-point identity holds."""
    start = time.perf_counter()
    problems = []
    for alpha in (0.1, 1.0 / 3.0, 0.8):
        beta = solve_beta(alpha).value
        errors = [abs(beta_p(alpha, p) - beta) for p in (0.1, 0.01, 0.001)]
        if not errors[0] > errors[1] > errors[2]:
            problems.append(f"alpha={alpha}: |beta_p - beta| not decreasing: {errors}")
        if errors[2] > 0.05:
            problems.append(f"alpha={alpha}: |beta_p - beta| = {errors[2]} > 0.05 at p = 0.001")
        for p in (0.1, 0.01, 0.001):
            x0 = beta_p_minimizer(alpha, p)
            bp = beta_p(alpha, p)
            predicted = 1.0 / ((alpha / bp) ** (1.0 / (1.0 - p)) - alpha)
            if abs(x0 - predicted) / predicted > 1e-6:
                problems.append(f"alpha={alpha}, p={p}: minimizer {x0} vs predicted {predicted}")
    return _result(7, "beta_p limit and critical-point self-check", start,
                   not problems, problems[0] if problems else "3 alphas x 3 p values all consistent")


def criterion_8() -> CriterionResult:
    """Fragmentation survivors are always embeddable and never beat the optimum."""
    start = time.perf_counter()
    problems = []
    betas = {D: solve_beta(2.0 / D).value for D in (2.5, 4.0)}
    master = np.random.default_rng(555)
    for i in range(200):
        spec = GeneratorSpec(FAMILIES[i % 6], n=2 + (i % 7), seed=1000 + i)
        space = generate(spec)
        for D in (2.5, 4.0):
            schedule = optimal_schedule(betas[D], float(master.random()))
            result = fragment_iterated(space, schedule, D, np.random.default_rng((77, i)))
            best, _ = max_subset(space, D)
            if len(result.survivors) >= 2 and not embeddable(space, result.survivors, D):
                problems.append(f"space {i} D={D}: survivors not embeddable")
            if len(result.survivors) > best:
                problems.append(f"space {i} D={D}: |survivors| = {len(result.survivors)} > optimum {best}")
            if spec.family == "uniform" and best != space.n:
                problems.append(f"space {i} D={D}: uniform max_subset = {best} != n = {space.n}")
    return _result(8, "oracle equivalence on 200 random spaces", start,
                   not problems, problems[0] if problems else "400 runs, all survivor sets optimal-consistent")


def criterion_9() -> CriterionResult:
    """Identical frag configs produce byte-identical JSON reports (modulo wall clock)."""
    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for name in ("a.json", "b.json"):
            out = Path(tmp) / name
            cmd = [sys.executable, "-m", "metricfrag", "frag",
                   "--generator", "euclidean:dim=3,n=16,seed=3", "--distortion", "4",
                   "--trials", "40", "--seed", "11", "--output", "json", "--out", str(out)]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                return _result(9, "deterministic reports", start, False,
                               f"frag exited {proc.returncode}: {proc.stderr.strip()}")
            doc = json.loads(out.read_text())
            doc.pop("wall_clock_s")
            blobs.append(json.dumps(doc, sort_keys=True).encode())
    same = blobs[0] == blobs[1]
    return _result(9, "deterministic reports", start, same,
                   "byte-identical after dropping wall clock" if same else "reports differ")


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_all(numbers=None) -> list[CriterionResult]:
    chosen = sorted(CRITERIA) if numbers is None else sorted(set(numbers))
    results = []
    for number in chosen:
        if number not in CRITERIA:
            raise ValueError(f"no acceptance criterion {number}")
        results.append(CRITERIA[number]())
    return results
