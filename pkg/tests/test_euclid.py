import numpy as np
import pytest

from sigma_geometry import FiniteSigmaSpace, SpaceSpec, make_space, sigma
from sigma_geometry.errors import DegenerateBasis, DimensionExceedsCap
from sigma_geometry.euclid import (
    build_chart,
    check_conditions,
    covariant_coordinates,
    detect_dimension,
    euclid_report,
    reconstruct_sigma,
)

E2 = make_space(SpaceSpec("euclidean", 2))
M2 = make_space(SpaceSpec("pseudo_euclidean", 2))


def embedded_sampler(ambient: int, rank: int, seed: int = 99):
    """Points on a random rank-dimensional affine subspace of R^ambient."""
    frame = np.random.default_rng(seed).normal(size=(rank, ambient))
    shift = np.random.default_rng(seed + 1).normal(size=ambient)

    def sample(rng, count):
        return shift + rng.uniform(-1, 1, size=(count, rank)) @ frame

    return sample


class TestDetectDimension:
    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_ambient(self, dim):
        space = make_space(SpaceSpec("euclidean", dim))
        res = detect_dimension(space, seed=7)
        assert res.dimension == dim
        assert len(res.basis) == dim + 1
        assert not res.escaped

    @pytest.mark.parametrize("rank", [1, 2, 3])
    def test_subspace_against_rank_oracle(self, rank):
        space = make_space(SpaceSpec("euclidean", 5))
        sampler = embedded_sampler(5, rank)
        pts = sampler(np.random.default_rng(0), 50)
        oracle = np.linalg.matrix_rank(pts - pts[0])
        assert detect_dimension(space, sampler, seed=0).dimension == oracle == rank

    def test_minkowski(self):
        assert detect_dimension(M2).dimension == 2

    def test_square_corners(self):
        corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
        table = 0.5 * np.sum((corners[:, None] - corners[None]) ** 2, axis=-1)
        F = FiniteSigmaSpace(table)
        res = detect_dimension(F, lambda rng, n: np.arange(4), max_dim=3)
        assert res.dimension == 2

    def test_cap(self):
        space = make_space(SpaceSpec("euclidean", 5))
        with pytest.raises(DimensionExceedsCap) as info:
            detect_dimension(space, max_dim=3)
        assert info.value.max_dim == 3
        res = detect_dimension(space, max_dim=3, strict=False)
        assert res.escaped and res.dimension == 3

    def test_seed_independent(self):
        space = make_space(SpaceSpec("euclidean", 3))
        assert {detect_dimension(space, seed=s).dimension for s in range(10)} == {3}

    def test_deterministic(self):
        space = make_space(SpaceSpec("euclidean", 3))
        a, b = detect_dimension(space, seed=5), detect_dimension(space, seed=5)
        assert np.array_equal(a.basis, b.basis)


class TestChart:
    def test_orthonormal(self):
        chart = build_chart(E2, [(0, 0), (1, 0), (0, 1)])
        assert np.array_equal(chart.g_cov, np.eye(2))
        assert chart.signature == (2, 0)

    def test_scaled(self):
        chart = build_chart(E2, [(0, 0), (2, 0), (0, 1)])
        assert np.allclose(chart.g_cov, np.diag([4.0, 1.0]))
        assert np.allclose(chart.g_cov @ chart.g_contra, np.eye(2), atol=1e-12)

    def test_minkowski(self):
        chart = build_chart(M2, [(0, 0), (1, 0), (0, 1)])
        assert np.allclose(chart.g_cov, np.diag([1.0, -1.0]))
        assert chart.signature == (1, 1)

    def test_degenerate(self):
        with pytest.raises(DegenerateBasis):
            build_chart(E2, [(0, 0), (1, 0), (2, 0)])

    def test_read_only(self):
        chart = build_chart(E2, [(0, 0), (1, 0), (0, 1)])
        with pytest.raises(ValueError):
            chart.g_cov[0, 0] = 5.0


class TestCoordinates:
    chart = build_chart(E2, [(0, 0), (1, 0), (0, 1)])

    def test_examples(self):
        assert np.allclose(covariant_coordinates(E2, self.chart, (3, 4)), (3, 4))
        assert np.array_equal(covariant_coordinates(E2, self.chart, (0, 0)), (0, 0))
        c2 = build_chart(E2, [(0, 0), (2, 0), (0, 1)])
        assert covariant_coordinates(E2, c2, (3, 4))[0] == pytest.approx(6.0)

    def test_reconstruct_examples(self):
        assert reconstruct_sigma(self.chart, (0, 0), (3, 4)) == pytest.approx(12.5)
        assert reconstruct_sigma(self.chart, (1, 2), (1, 2)) == 0.0
        cm = build_chart(M2, [(0, 0), (1, 0), (0, 1)])
        assert reconstruct_sigma(cm, (0, 0), (0, 1)) == pytest.approx(-0.5)

    def test_round_trip_flat(self):
        S = make_space(SpaceSpec("constant_metric", 3, {"g": [[2, 0.5, 0], [0.5, -1, 0.2], [0, 0.2, 1.5]]}))
        chart = build_chart(S, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
        rng = np.random.default_rng(0)
        P, Q = rng.uniform(-2, 2, (2, 500, 3))
        rec = reconstruct_sigma(chart, covariant_coordinates(S, chart, P), covariant_coordinates(S, chart, Q))
        direct = S.sigma(P, Q)
        assert np.all(np.abs(rec - direct) <= 1e-9 * np.maximum(1, np.abs(direct)))
        assert chart.signature == (2, 1)


class TestConditions:
    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_euclidean_pass(self, dim):
        rep = euclid_report(make_space(SpaceSpec("euclidean", dim)), seed=dim)
        assert rep.dimension_found == dim
        assert rep.cond1_pass and rep.cond2_pass and rep.cond3_pass
        assert max(rep.cond1_max_residual, rep.cond2_max_residual, rep.cond3_max_residual) <= 1e-8
        assert rep.passed

    def test_minkowski_pass(self):
        rep = euclid_report(M2)
        assert rep.passed and rep.signature == (1, 1)

    def test_sphere_fails(self):
        rep = euclid_report(make_space(SpaceSpec("sphere", 2)))
        assert not rep.cond2_pass
        assert rep.cond2_max_residual > 1e-3
        assert rep.as_dict()["cond2"] == "fail"

    def test_punctured_fails(self):
        rep = euclid_report(make_space(SpaceSpec("punctured_plane", 2, {"a": 1.0})))
        assert not rep.cond2_pass

    def test_finite_square(self):
        corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
        table = 0.5 * np.sum((corners[:, None] - corners[None]) ** 2, axis=-1)
        F = FiniteSigmaSpace(table)
        rep = euclid_report(F, sampler=lambda rng, n: np.arange(4))
        d = rep.as_dict()
        assert d["dimension_found"] == 2
        assert d["cond1"] == d["cond2"] == "pass"
        assert d["cond3"] == "not-assessable"

    def test_finite_non_euclidean(self):
        # four points all at mutual distance 1 on a "circle" of equal sigma: star metric, fails condition II
        table = np.full((4, 4), 0.5)
        np.fill_diagonal(table, 0.0)
        table[0, 1:] = table[1:, 0] = 0.125  # centre at distance 1/2 from three unit-spaced points
        rep = euclid_report(FiniteSigmaSpace(table), sampler=lambda rng, n: np.arange(4))
        assert not (rep.cond1_pass and rep.cond2_pass)

    def test_explicit_pairs(self):
        chart = build_chart(E2, [(0, 0), (1, 0), (0, 1)])
        pairs = [((0, 0), (3, 4)), ((1, 1), (-2, 5))]
        rep = check_conditions(E2, chart, pairs, coord_grid=[[0.5, 0.5], [2, -1]])
        assert rep.counts["pairs"] == 2
        assert rep.passed

    def test_direct_sigma_matches_reconstruction(self):
        chart = build_chart(E2, [(0, 0), (1, 0), (0, 1)])
        for p, q in [((0, 0), (3, 4)), ((1, -2), (0.5, 7))]:
            x, y = covariant_coordinates(E2, chart, p), covariant_coordinates(E2, chart, q)
            assert reconstruct_sigma(chart, x, y) == pytest.approx(sigma(E2, p, q))
