import numpy as np
import pytest

from metricfrag import (
    FiniteMetricSpace,
    NonzeroDiagonal,
    NotSymmetric,
    ParseError,
    SinglePoint,
    TriangleViolation,
    UltrametricTree,
    ZeroOffDiagonal,
    ball,
    distortion,
    is_ultrametric_matrix,
    jump_radii,
    make_space,
    normalize,
    parse_matrix_text,
)
from metricfrag.spaces import format_matrix_text

PATH3 = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]


def uniform_matrix(n, value=2.0):
    m = np.full((n, n), value)
    np.fill_diagonal(m, 0.0)
    return m


def random_space(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 3))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return make_space(d)


class TestMakeSpace:
    def test_path_metric(self):
        s = make_space(PATH3)
        assert s.n == 3
        assert s.diameter == 2.0
        assert s.d_min == 1.0

    def test_cached_values_match_recomputation(self):
        s = random_space(10, seed=4)
        off = ~np.eye(10, dtype=bool)
        assert s.diameter == s.dist.max()
        assert s.d_min == s.dist[off].min()

    def test_triangle_violation_reports_triple(self):
        with pytest.raises(TriangleViolation) as err:
            make_space([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
        i, j, k = err.value.triple
        assert (i, k) == (0, 2) and j == 1

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            make_space([[0, 1], [2, 0]])

    def test_nonzero_diagonal(self):
        with pytest.raises(NonzeroDiagonal):
            make_space([[1, 1], [1, 0]])

    def test_zero_off_diagonal(self):
        with pytest.raises(ZeroOffDiagonal):
            make_space([[0, 0], [0, 0]])

    def test_non_square(self):
        with pytest.raises(ValueError):
            make_space([[0, 1, 2], [1, 0, 1]])

    def test_non_finite(self):
        with pytest.raises(ValueError):
            make_space([[0, np.inf], [np.inf, 0]])

    def test_single_point(self):
        s = make_space([[0.0]])
        assert s.n == 1 and s.diameter == 0.0 and s.d_min == np.inf

    def test_matrix_is_immutable(self):
        s = make_space(PATH3)
        with pytest.raises(ValueError):
            s.dist[0, 1] = 5.0


class TestBall:
    def test_uniform_radius_one(self):
        s = make_space(uniform_matrix(4))
        assert ball(s, 2, 1.0) == {2}

    def test_uniform_radius_two_closed(self):
        s = make_space(uniform_matrix(4))
        assert ball(s, 2, 2.0) == {0, 1, 2, 3}

    def test_path_center(self):
        s = make_space(PATH3)
        assert ball(s, 1, 1.0) == {0, 1, 2}

    def test_contains_center_and_monotone(self):
        s = random_space(12, seed=1)
        for x in range(s.n):
            prev = set()
            for r in np.linspace(0, s.diameter, 9):
                b = ball(s, x, r)
                assert x in b
                assert prev <= b
                prev = b

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            ball(make_space(PATH3), 0, -0.5)


class TestJumpRadii:
    def test_uniform(self):
        s = make_space(uniform_matrix(4))
        assert jump_radii(s, 0) == [(0.0, 1), (2.0, 4)]

    def test_single_point(self):
        assert jump_radii(make_space([[0.0]]), 0) == [(0.0, 1)]

    def test_path_endpoint(self):
        s = make_space(PATH3)
        assert jump_radii(s, 0) == [(0.0, 1), (1.0, 2), (2.0, 3)]

    def test_reconstructs_ball_sizes(self):
        s = random_space(9, seed=2)
        for x in range(s.n):
            jumps = jump_radii(s, x)
            radii = [t for t, _ in jumps]
            sizes = [c for _, c in jumps]
            assert radii[0] == 0.0 and sizes[0] == 1 and sizes[-1] == s.n
            assert all(a < b for a, b in zip(radii, radii[1:]))
            assert all(a < b for a, b in zip(sizes, sizes[1:]))
            for t in np.linspace(0, s.diameter, 17):
                j = max(i for i, tj in enumerate(radii) if tj <= t)
                assert len(ball(s, x, t)) == sizes[j]


class TestNormalize:
    def test_identity_when_diameter_two(self):
        s = make_space(PATH3)
        out, factor = normalize(s)
        assert factor == 1.0
        assert np.array_equal(out.dist, s.dist)

    def test_uniform_six(self):
        s = make_space(uniform_matrix(3, 6.0))
        out, factor = normalize(s)
        assert factor == 3.0
        assert out.diameter == 2.0
        assert np.allclose(out.dist * factor, s.dist)

    def test_diameter_exactly_two(self):
        s = random_space(8, seed=3)
        out, _ = normalize(s)
        assert out.diameter == 2.0

    def test_single_point(self):
        with pytest.raises(SinglePoint):
            normalize(make_space([[0.0]]))


def two_point_tree(value):
    return UltrametricTree(points=(0, 1), level_of_separation={(0, 1): 0},
                           scale_at_level=(value / 2.0,))


class TestDistortion:
    def test_two_points_matching(self):
        s = make_space([[0, 2], [2, 0]])
        assert distortion(s, two_point_tree(2.0)) == 1.0

    def test_two_points_scaled(self):
        s = make_space([[0, 2], [2, 0]])
        assert distortion(s, two_point_tree(6.0)) == 1.0

    def test_three_point_path(self):
        s = make_space(PATH3)
        tree = UltrametricTree(points=(0, 1, 2),
                               level_of_separation={(0, 1): 0, (1, 2): 0, (0, 2): 0},
                               scale_at_level=(1.0,))
        assert distortion(s, tree) == 2.0

    def test_singleton_is_vacuous(self):
        s = make_space(PATH3)
        tree = UltrametricTree(points=(1,), level_of_separation={}, scale_at_level=(1.0,))
        assert distortion(s, tree) == 1.0

    def test_invariant_under_joint_scaling(self):
        s = random_space(6, seed=5)
        tree = UltrametricTree(
            points=(0, 1, 2),
            level_of_separation={(0, 1): 1, (1, 2): 0, (0, 2): 0},
            scale_at_level=(s.diameter / 2, s.d_min),
        )
        scaled = make_space(s.dist * 7.0)
        scaled_tree = UltrametricTree(
            points=tree.points,
            level_of_separation=tree.level_of_separation,
            scale_at_level=tuple(7.0 * v for v in tree.scale_at_level),
        )
        assert distortion(s, tree) == pytest.approx(distortion(scaled, scaled_tree), rel=1e-12)


class TestIsUltrametric:
    def test_uniform(self):
        assert is_ultrametric_matrix(uniform_matrix(5))

    def test_path_is_not(self):
        assert not is_ultrametric_matrix(PATH3)

    def test_two_level_hierarchy(self):
        assert is_ultrametric_matrix([[0, 1, 2], [1, 0, 2], [2, 2, 0]])

    def test_tree_value_matrix_is_ultrametric(self):
        tree = UltrametricTree(
            points=(0, 1, 2, 3),
            level_of_separation={(0, 1): 2, (0, 2): 1, (1, 2): 1, (0, 3): 0, (1, 3): 0, (2, 3): 0},
            scale_at_level=(1.0, 0.4, 0.1),
        )
        assert is_ultrametric_matrix(tree.value_matrix())

    def test_prefix_property_scan(self):
        tree = UltrametricTree(
            points=(0, 1, 2, 3),
            level_of_separation={(0, 1): 2, (0, 2): 1, (1, 2): 1, (0, 3): 0, (1, 3): 0, (2, 3): 0},
            scale_at_level=(1.0, 0.4, 0.1),
        )
        pts = tree.points
        for x in pts:
            for y in pts:
                for z in pts:
                    if len({x, y, z}) == 3:
                        assert tree.level(x, z) >= min(tree.level(x, y), tree.level(y, z))


class TestMatrixText:
    def test_round_trip(self):
        s = random_space(5, seed=9)
        again = parse_matrix_text(format_matrix_text(s))
        assert np.array_equal(again.dist, s.dist)

    def test_well_formed(self):
        s = parse_matrix_text("3\n0,1,2\n1,0,1\n2,1,0\n")
        assert s.n == 3 and s.diameter == 2.0

    def test_ragged_row_reports_location(self):
        with pytest.raises(ParseError) as err:
            parse_matrix_text("3\n0,1,2\n1,0\n2,1,0\n")
        assert err.value.line == 3

    def test_trailing_comma_rejected(self):
        with pytest.raises(ParseError):
            parse_matrix_text("2\n0,1,\n1,0,\n")

    def test_bad_decimal_reports_column(self):
        with pytest.raises(ParseError) as err:
            parse_matrix_text("2\n0,x\n1,0\n")
        assert err.value.line == 2 and err.value.column == 2

    def test_asymmetric_content(self):
        with pytest.raises(NotSymmetric):
            parse_matrix_text("2\n0,1\n2,0\n")

    def test_bad_count_line(self):
        with pytest.raises(ParseError):
            parse_matrix_text("three\n0,1\n1,0\n")
