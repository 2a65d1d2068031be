import numpy as np
import pytest

from edmkit import bench
from edmkit.sampling import (
    NoiseSpec,
    ObservationSet,
    all_pairs,
    apply_observation,
    apply_observation_adjoint,
    effective_noise,
    num_pairs,
    observe,
    read_observations,
    sample_knn,
    sample_uniform,
    sample_unit_ball,
    write_observations,
)

from oracles import random_hollow


def dist_matrix(coords_1d):
    pts = np.asarray(coords_1d, dtype=float)[:, None]
    return np.sqrt(bench.edm_from_points(pts))


class TestUniform:
    def test_empirical_frequencies(self):
        pairs = sample_uniform(3, 100000, seed=0)
        idx = pairs[:, 0] * 3 + pairs[:, 1]
        for code in (1, 2, 5):  # (0,1), (0,2), (1,2)
            freq = np.mean(idx == code)
            assert abs(freq - 1.0 / 3.0) < 0.02

    def test_determinism(self):
        a = sample_uniform(10, 500, seed=42)
        b = sample_uniform(10, 500, seed=42)
        np.testing.assert_array_equal(a, b)
        c = sample_uniform(10, 500, seed=43)
        assert not np.array_equal(a, c)

    def test_two_vertices(self):
        pairs = sample_uniform(2, 7, seed=1)
        np.testing.assert_array_equal(pairs, np.tile([0, 1], (7, 1)))

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            sample_uniform(1, 5, seed=0)
        with pytest.raises(ValueError):
            sample_uniform(5, 0, seed=0)


class TestKnn:
    def test_collinear_chain(self):
        d = dist_matrix([0.0, 1.0, 2.0, 3.0])
        pairs = sample_knn(d, 1)
        np.testing.assert_array_equal(pairs, [[0, 1], [1, 2], [2, 3]])

    def test_full_neighborhood(self):
        rng = np.random.default_rng(2)
        d = np.sqrt(bench.edm_from_points(rng.random((6, 2))))
        pairs = sample_knn(d, 5)
        np.testing.assert_array_equal(pairs, all_pairs(6))

    def test_tie_breaks_to_smaller_column(self):
        # vertex 0 is equidistant from 1 and 2; every other row's nearest
        # neighbor avoids vertex 0, so the tie decides whether (0,1) or
        # (0,2) appears
        d = dist_matrix([0.0, 1.0, -1.0, 1.5, -1.9])
        pairs = sample_knn(d, 1)
        assert [0, 1] in pairs.tolist()
        assert [0, 2] not in pairs.tolist()

    def test_normalized_and_unique(self):
        rng = np.random.default_rng(3)
        d = np.sqrt(bench.edm_from_points(rng.random((15, 2))))
        pairs = sample_knn(d, 3)
        assert (pairs[:, 0] < pairs[:, 1]).all()
        assert np.unique(pairs, axis=0).shape == pairs.shape

    def test_at_least_n_minus_one_pairs_for_k2(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(5, 20))
            d = np.sqrt(bench.edm_from_points(rng.random((n, 2))))
            assert sample_knn(d, 2).shape[0] >= n - 1

    def test_k_out_of_range(self):
        d = dist_matrix([0.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            sample_knn(d, 3)


class TestUnitBall:
    def test_large_radius_gives_all(self):
        d = dist_matrix([0.0, 1.0, 2.0])
        np.testing.assert_array_equal(sample_unit_ball(d, 2.0), all_pairs(3))

    def test_small_radius_gives_none(self):
        d = dist_matrix([0.0, 1.0, 2.0])
        assert sample_unit_ball(d, 0.5).shape[0] == 0

    def test_collinear_example(self):
        d = dist_matrix([0.0, 1.0, 2.0])
        np.testing.assert_array_equal(sample_unit_ball(d, 1.5), [[0, 1], [1, 2]])

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(5)
        d = np.sqrt(bench.edm_from_points(rng.random((10, 2))))
        sizes = [sample_unit_ball(d, eps).shape[0] for eps in (0.1, 0.3, 0.7, 1.5)]
        assert sizes == sorted(sizes)

    def test_radius_validation(self):
        with pytest.raises(ValueError):
            sample_unit_ball(np.zeros((3, 3)), 0.0)


class TestObserve:
    def test_noiseless(self):
        d_true = bench.edm_from_points(np.array([[0.0], [1.0], [3.0]]))
        pairs = all_pairs(3)
        obs = observe(pairs, d_true, 0.0, NoiseSpec("gaussian", 0))
        np.testing.assert_allclose(obs.y, np.sqrt(d_true[pairs[:, 0], pairs[:, 1]]))

    def test_reproducible_and_moments(self):
        d_true = bench.edm_from_points(np.full((2, 1), [[0.0], [1.0]]).reshape(2, 1))
        pairs = np.tile([0, 1], (100000, 1)).astype(np.int64)
        spec = NoiseSpec("gaussian", 7)
        obs1 = observe(pairs, d_true, 0.1, spec)
        obs2 = observe(pairs, d_true, 0.1, spec)
        np.testing.assert_array_equal(obs1.y, obs2.y)
        err = obs1.y - 1.0
        assert abs(err.mean()) < 3 * 0.1 / np.sqrt(err.size)
        assert abs(err.var() - 0.01) < 0.001

    def test_clamping(self):
        # true distance 1, noise variate -1 at scale 2 drives y to -1: clamp to 0
        d_true = np.array([[0.0, 1.0], [1.0, 0.0]])
        spec = NoiseSpec("rademacher", 1)
        xi = spec.variates(64)
        assert (xi == -1).any()
        obs = observe(np.tile([0, 1], (64, 1)).astype(np.int64), d_true, 2.0, spec)
        np.testing.assert_allclose(obs.y[xi == -1], 0.0)
        np.testing.assert_allclose(obs.y[xi == 1], 3.0)

    def test_clamp_never_fires_below_min_distance(self):
        rng = np.random.default_rng(8)
        d_true = bench.edm_from_points(rng.random((8, 2)) + 2.0 * np.arange(8)[:, None])
        pairs = all_pairs(8)
        dmin = np.sqrt(d_true[pairs[:, 0], pairs[:, 1]]).min()
        spec = NoiseSpec("uniform", 3)
        eta = 0.5 * dmin / np.sqrt(3.0)  # eta * max|xi| < dmin
        obs = observe(pairs, d_true, eta, spec)
        raw = np.sqrt(d_true[pairs[:, 0], pairs[:, 1]]) + eta * spec.variates(obs.m)
        np.testing.assert_array_equal(obs.y, raw)

    def test_noise_kinds_unit_variance(self):
        for kind in ("gaussian", "rademacher", "uniform"):
            xi = NoiseSpec(kind, 11).variates(200000)
            assert abs(xi.mean()) < 0.01
            assert abs(xi.var() - 1.0) < 0.01

    def test_bad_noise_kind(self):
        with pytest.raises(ValueError):
            NoiseSpec("cauchy", 0)


class TestOperator:
    def _obs(self, n, pairs):
        pairs = np.asarray(pairs, dtype=np.int64)
        return ObservationSet(n=n, pairs=pairs, y=np.zeros(len(pairs)), eta=0.0)

    def test_single_pair_value(self):
        obs = self._obs(2, [[0, 1]])
        np.testing.assert_allclose(
            apply_observation(obs, np.array([[0.0, 5.0], [5.0, 0.0]])), [5.0]
        )

    def test_identity_samples_to_zero(self):
        obs = self._obs(4, [[0, 1], [1, 3], [2, 3]])
        np.testing.assert_allclose(apply_observation(obs, np.eye(4)), 0.0)

    def test_adjoint_zero(self):
        obs = self._obs(3, [[0, 1], [0, 2]])
        np.testing.assert_allclose(apply_observation_adjoint(obs, np.zeros(2)), 0.0)

    def test_adjoint_single_pair(self):
        obs = self._obs(2, [[0, 1]])
        np.testing.assert_allclose(
            apply_observation_adjoint(obs, np.array([2.0])),
            np.array([[0.0, 1.0], [1.0, 0.0]]),
        )

    def test_adjoint_accumulates_duplicates(self):
        obs = self._obs(2, [[0, 1], [0, 1]])
        np.testing.assert_allclose(
            apply_observation_adjoint(obs, np.array([1.0, 1.0])),
            np.array([[0.0, 1.0], [1.0, 0.0]]),
        )

    def test_adjoint_identity_random(self):
        rng = np.random.default_rng(9)
        n, m = 7, 30
        obs = self._obs(n, sample_uniform(n, m, seed=10))
        a = random_hollow(rng, n)
        z = rng.standard_normal(m)
        lhs = float(apply_observation(obs, a) @ z)
        rhs = float(np.tensordot(a, apply_observation_adjoint(obs, z)))
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))

    def test_operator_times_adjoint_counts_duplicates(self):
        obs = self._obs(3, [[0, 1], [0, 1], [1, 2]])
        z = np.array([1.0, 2.0, 5.0])
        out = apply_observation(obs, apply_observation_adjoint(obs, z))
        # each duplicate of a pair contributes half of its z entry
        np.testing.assert_allclose(out, [1.5, 1.5, 2.5])


class TestEffectiveNoise:
    def test_zero_noise(self):
        d_true = np.array([[0.0, 4.0], [4.0, 0.0]])
        obs = ObservationSet(2, np.array([[0, 1]]), np.array([2.0]), eta=0.5)
        np.testing.assert_allclose(effective_noise(obs, d_true, np.zeros(1)), 0.0)

    def test_scalar_formula(self):
        d_true = np.array([[0.0, 4.0], [4.0, 0.0]])  # true distance 2
        obs = ObservationSet(2, np.array([[0, 1]]), np.array([2.5]), eta=0.5)
        zeta = effective_noise(obs, d_true, np.array([1.0]))
        np.testing.assert_allclose(zeta, [4.5])

    def test_squared_observation_identity(self):
        rng = np.random.default_rng(12)
        d_true = bench.edm_from_points(rng.random((9, 2)) + 1.0)
        pairs = sample_uniform(9, 60, seed=13)
        spec = NoiseSpec("gaussian", 14)
        eta = 1e-3  # small enough that clamping never fires
        obs = observe(pairs, d_true, eta, spec)
        xi = spec.variates(obs.m)
        zeta = effective_noise(obs, d_true, xi)
        lhs = obs.y * obs.y - apply_observation(obs, d_true)
        np.testing.assert_allclose(lhs, eta * zeta, atol=1e-10)


def test_sampled_second_moment_matches_closed_form():
    rng = np.random.default_rng(15)
    n = 8
    n_omega = num_pairs(n)
    a = random_hollow(rng, n, scale=2.0)
    pairs = sample_uniform(n, 100000, seed=16)
    vals = a[pairs[:, 0], pairs[:, 1]] ** 2
    target = np.linalg.norm(a) ** 2 / (2 * n_omega)
    se = vals.std() / np.sqrt(vals.size)
    assert abs(vals.mean() - target) <= 3 * se


class TestSerialization:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(17)
        d_true = bench.edm_from_points(rng.random((6, 2)))
        obs = observe(
            sample_uniform(6, 25, seed=18), d_true, 0.123456789, NoiseSpec("gaussian", 19)
        )
        p1 = tmp_path / "a.obs"
        p2 = tmp_path / "b.obs"
        write_observations(obs, p1)
        obs2 = read_observations(p1)
        write_observations(obs2, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert obs2.n == obs.n and obs2.eta == obs.eta
        np.testing.assert_array_equal(obs2.pairs, obs.pairs)
        np.testing.assert_array_equal(obs2.y, obs.y)

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "bad.obs"
        p.write_text("3 5\n0 1 1.0\n")
        with pytest.raises(ValueError):
            read_observations(p)

    def test_row_count_mismatch(self, tmp_path):
        p = tmp_path / "bad.obs"
        p.write_text("3 2 0.0\n0 1 1.0\n")
        with pytest.raises(ValueError):
            read_observations(p)


class TestObservationSetValidation:
    def test_rejects_bad_pairs(self):
        with pytest.raises(ValueError):
            ObservationSet(3, np.array([[1, 0]]), np.array([1.0]))
        with pytest.raises(ValueError):
            ObservationSet(3, np.array([[0, 3]]), np.array([1.0]))

    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            ObservationSet(3, np.array([[0, 1]]), np.array([-1.0]))

    def test_immutable(self):
        obs = ObservationSet(3, np.array([[0, 1]]), np.array([1.0]))
        with pytest.raises(ValueError):
            obs.y[0] = 2.0
