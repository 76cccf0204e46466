import json
import math

import numpy as np
import pytest

from metricfrag import (
    DomainError,
    GeneratorSpec,
    NotNormalized,
    custom_schedule,
    expected_mass_bound,
    fragment_iterated,
    fragment_once,
    generate,
    interval_sum,
    is_ultrametric_matrix,
    jensen_lower_bound,
    make_space,
    optimal_schedule,
    result_to_json,
    solve_beta,
    ultrametric_of,
    validate_result,
)

TWO_POINT = [[0.0, 2.0], [2.0, 0.0]]


def uniform_space(n, value=2.0):
    m = np.full((n, n), value)
    np.fill_diagonal(m, 0.0)
    return make_space(m)


class TestFragmentOnce:
    def test_uniform_survivor_is_first_sample(self):
        space = uniform_space(6)
        for seed in range(30):
            out = fragment_once(space, range(6), 1.0, 2.0, np.random.default_rng(seed))
            assert len(out) == 1
            assert set(out.values()) == {1}  # everyone is claimed by the first sample

    def test_certain_survival_when_balls_coincide(self):
        space = make_space(TWO_POINT)
        for seed in range(30):
            out = fragment_once(space, [0], 0.5, 0.9, np.random.default_rng(seed))
            assert out.keys() == {0}

    def test_two_point_survival_probability(self):
        space = make_space(TWO_POINT)
        rng = np.random.default_rng(17)
        trials = 20_000
        survived = np.zeros(2)
        for _ in range(trials):
            for p in fragment_once(space, (0, 1), 1.0, 2.0, rng):
                survived[p] += 1
        se = math.sqrt(0.25 / trials)
        assert np.all(np.abs(survived / trials - 0.5) <= 3.0 * se)

    def test_survival_law_on_path(self):
        # Pr[x survives] = |B(x,r)| / |B(x,R)| per point, any space
        space = make_space([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]])
        r, R = 1.0, 2.0
        expected = np.array([
            (space.dist[x] <= r).sum() / (space.dist[x] <= R).sum() for x in range(4)
        ])
        rng = np.random.default_rng(23)
        trials = 20_000
        survived = np.zeros(4)
        for _ in range(trials):
            for p in fragment_once(space, range(4), r, R, rng):
                survived[p] += 1
        freq = survived / trials
        se = np.sqrt(expected * (1.0 - expected) / trials)
        assert np.all(np.abs(freq - expected) <= 3.0 * se + 1e-12)

    def test_cluster_geometry(self):
        space = generate(GeneratorSpec("euclidean", n=32, seed=2))
        out = fragment_once(space, range(32), 0.3, 0.5, np.random.default_rng(1))
        clusters = {}
        for p, c in out.items():
            clusters.setdefault(c, []).append(p)
        for members in clusters.values():
            for a in members:
                for b in members:
                    assert space.dist[a, b] <= 2 * 0.3 + 1e-12
        ids = list(clusters)
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                gap = min(space.dist[x, y] for x in clusters[a] for y in clusters[b])
                assert gap > 0.5 - 0.3 - 1e-12

    def test_empty_active(self):
        assert fragment_once(make_space(TWO_POINT), [], 0.5, 1.0, np.random.default_rng(0)) == {}

    def test_deterministic_given_seed(self):
        space = generate(GeneratorSpec("euclidean", n=20, seed=5))
        a = fragment_once(space, range(20), 0.4, 0.7, np.random.default_rng(99))
        b = fragment_once(space, range(20), 0.4, 0.7, np.random.default_rng(99))
        assert a == b

    def test_bad_scales(self):
        space = make_space(TWO_POINT)
        with pytest.raises(DomainError):
            fragment_once(space, [0, 1], 1.0, 1.0, np.random.default_rng(0))
        with pytest.raises(DomainError):
            fragment_once(space, [0, 1], 0.0, 1.0, np.random.default_rng(0))

    def test_bad_active_index(self):
        with pytest.raises(ValueError):
            fragment_once(make_space(TWO_POINT), [0, 5], 0.5, 1.0, np.random.default_rng(0))


class TestFragmentIterated:
    def test_single_point_space(self):
        result = fragment_iterated(make_space([[0.0]]), optimal_schedule(0.5, 0.1), 4.0, 3)
        assert result.survivors == (0,)
        assert result.depth == 1

    def test_two_point_custom_schedule_hand_trace(self):
        space = make_space(TWO_POINT)
        result = fragment_iterated(space, custom_schedule([1.0, 0.9]), 4.0, 11)
        assert result.survivors == (0, 1)
        assert result.depth == 1
        tree = ultrametric_of(result)
        assert tree.level(0, 1) == 0
        assert tree.value(0, 1) == 2.0  # = d, distortion 1

    def test_uniform_diameter_two_keeps_everything(self):
        # the enlarged ball radius never reaches 2, so every level is trivial
        space = uniform_space(8)
        result = fragment_iterated(space, optimal_schedule(0.5, 0.25), 8.0, 7)
        assert result.survivors == tuple(range(8))

    def test_rejects_unnormalized(self):
        space = make_space(np.array(TWO_POINT) * 2.0)
        with pytest.raises(NotNormalized):
            fragment_iterated(space, optimal_schedule(0.5, 0.0), 4.0, 0)

    def test_rejects_low_distortion(self):
        with pytest.raises(DomainError):
            fragment_iterated(make_space(TWO_POINT), optimal_schedule(0.5, 0.0), 2.0, 0)

    def test_determinism(self):
        space = generate(GeneratorSpec("euclidean", n=24, seed=8))
        sched = optimal_schedule(solve_beta(0.5).value, 0.37)
        a = fragment_iterated(space, sched, 4.0, 1234)
        b = fragment_iterated(space, sched, 4.0, 1234)
        assert a == b
        assert a.seed == 1234 and a.u == 0.37

    def test_structural_invariants_across_families(self):
        families = ("uniform", "path", "cycle", "euclidean", "gnp_shortest_path", "binary_tree")
        rng = np.random.default_rng(42)
        betas = {D: solve_beta(2.0 / D).value for D in (2.5, 4.0, 8.0)}
        for i in range(60):
            spec = GeneratorSpec(families[i % 6], n=2 + (i % 14), seed=i)
            space = generate(spec)
            D = (2.5, 4.0, 8.0)[i % 3]
            sched = optimal_schedule(betas[D], float(rng.random()))
            result = fragment_iterated(space, sched, D, np.random.default_rng((9, i)))
            assert validate_result(space, result) == []
            # survivor sets nest and final clusters are singletons
            assert set(result.survivors) == set(result.levels[-1])
            assert all(len(set(lvl.values())) == len(lvl) for lvl in result.levels[-1:])


class TestUltrametricOf:
    def test_distinct_pairs_separate_before_final_level(self):
        space = generate(GeneratorSpec("euclidean", n=30, seed=13))
        result = fragment_iterated(space, optimal_schedule(0.5, 0.6), 8.0, 77)
        tree = ultrametric_of(result)
        for i, x in enumerate(result.survivors):
            for y in result.survivors[i + 1 :]:
                assert tree.level(x, y) < result.depth

    def test_value_matrix_is_exactly_ultrametric(self):
        space = generate(GeneratorSpec("gnp_shortest_path", n=26, seed=3))
        result = fragment_iterated(space, optimal_schedule(0.5, 0.2), 8.0, 5)
        if len(result.survivors) >= 3:
            assert is_ultrametric_matrix(ultrametric_of(result).value_matrix())

    def test_distortion_bounds_every_pair(self):
        space = generate(GeneratorSpec("euclidean", n=40, seed=21))
        beta = solve_beta(2.0 / 3.0).value
        result = fragment_iterated(space, optimal_schedule(beta, 0.8), 3.0, 6)
        tree = ultrametric_of(result)
        for i, x in enumerate(result.survivors):
            for y in result.survivors[i + 1 :]:
                d = space.dist[x, y]
                rho = tree.value(x, y)
                assert d * (1 - 1e-12) <= rho <= 3.0 * d * (1 + 1e-12)


class TestExpectedMassBound:
    def test_two_point_all_factors_one(self):
        space = make_space(TWO_POINT)
        assert expected_mass_bound(space, custom_schedule([1.0, 0.9]), 4.0) == 2.0

    def test_single_point(self):
        assert expected_mass_bound(make_space([[0.0]]), optimal_schedule(0.5, 0.0), 4.0) == 1.0

    def test_uniform_with_effective_level(self):
        # unit-distance uniform space: level 1 of [1, 0.8, 0.1, 0.01] has
        # r < 1 <= R, so each factor is 1/n and the bound telescopes to 1
        space = uniform_space(5, value=1.0)
        sched = custom_schedule([1.0, 0.8, 0.1, 0.01])
        assert expected_mass_bound(space, sched, 4.0) == pytest.approx(1.0, abs=1e-12)

    def test_monte_carlo_mean_dominates_bound(self):
        space = generate(GeneratorSpec("euclidean", n=12, seed=31))
        sched = optimal_schedule(solve_beta(0.5).value, 0.45)
        bound = expected_mass_bound(space, sched, 4.0)
        trials = 400
        sizes = [
            len(fragment_iterated(space, sched, 4.0, np.random.default_rng((3, t))).survivors)
            for t in range(trials)
        ]
        mean = np.mean(sizes)
        se = np.std(sizes, ddof=1) / math.sqrt(trials)
        assert mean >= bound - 3.0 * se


class TestJensenLowerBound:
    def test_single_point(self):
        assert jensen_lower_bound(make_space([[0.0]]), 6.0) == 1.0

    def test_uniform_closed_form(self):
        n, D = 9, 6.0
        space = uniform_space(n)
        beta = solve_beta(2.0 / D).value
        s2 = interval_sum(beta, D, 2.0).total
        assert jensen_lower_bound(space, D) == pytest.approx(n * n ** (-s2), rel=1e-12)

    def test_bounded_between_power_law_and_n(self):
        for spec in (GeneratorSpec("euclidean", n=20, seed=1),
                      GeneratorSpec("path", n=15),
                      GeneratorSpec("binary_tree", n=31)):
            space = generate(spec)
            for D in (2.5, 6.0):
                beta = solve_beta(2.0 / D).value
                value = jensen_lower_bound(space, D)
                assert space.n ** (1.0 - beta) - 1e-9 <= value <= space.n

    def test_expectation_chain_small_instance(self):
        space = generate(GeneratorSpec("euclidean", n=16, seed=6))
        D = 4.0
        beta = solve_beta(0.5).value
        jensen = jensen_lower_bound(space, D)
        assert jensen >= 16 ** (1.0 - beta) - 1e-9
        children = np.random.SeedSequence(91).spawn(300)
        sizes = []
        for child in children:
            s1, s2 = child.spawn(2)
            u = float(np.random.default_rng(s1).random())
            result = fragment_iterated(space, optimal_schedule(beta, u), D, np.random.default_rng(s2))
            sizes.append(len(result.survivors))
        mean = np.mean(sizes)
        se = np.std(sizes, ddof=1) / math.sqrt(len(sizes))
        assert mean >= jensen - 3.0 * se


class TestSerialization:
    def test_json_shape(self):
        space = generate(GeneratorSpec("euclidean", n=10, seed=44))
        result = fragment_iterated(space, optimal_schedule(0.5, 0.3), 8.0, 10)
        doc = json.loads(result_to_json(result))
        assert set(doc) == {"n", "D", "u", "seed", "scales", "levels", "survivors", "ultrametric_pairs"}
        assert doc["n"] == 10 and doc["D"] == 8.0 and doc["seed"] == 10 and doc["u"] == 0.3
        assert doc["scales"][0] == 1.0
        assert len(doc["levels"]) == result.depth
        assert doc["survivors"] == sorted(doc["survivors"])
        for x, y, level, value in doc["ultrametric_pairs"]:
            assert value == 2.0 * doc["scales"][level]
            assert x in doc["survivors"] and y in doc["survivors"]

    def test_json_deterministic(self):
        space = generate(GeneratorSpec("cycle", n=12, seed=0))
        a = result_to_json(fragment_iterated(space, optimal_schedule(0.5, 0.9), 8.0, 2))
        b = result_to_json(fragment_iterated(space, optimal_schedule(0.5, 0.9), 8.0, 2))
        assert a == b
