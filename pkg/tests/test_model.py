import numpy as np
import pytest

from edmkit import bench
from edmkit.linalg import double_center, spectrum_of
from edmkit.model import (
    ModelParams,
    build_problem,
    check_weight_ordering,
    estimate_noise_scale,
    objective_and_gradient,
    params_from_config,
    parse_config,
    penalty_weight,
    projector_mismatch,
    projector_overlap,
    with_resolved_rho1,
)
from edmkit.sampling import (
    NoiseSpec,
    ObservationSet,
    all_pairs,
    apply_observation,
    num_pairs,
    observe,
    sample_uniform,
)

from oracles import central_diff_gradient_matrix, random_hollow


def make_instance(n=8, r=2, m=20, eta=0.05, seed=0, rho1=None, rho2=1.0):
    d_true = bench.edm_from_points(bench.random_points(n, r, seed))
    obs = observe(
        sample_uniform(n, m, seed + 1), d_true, eta, NoiseSpec("gaussian", seed + 2)
    )
    basis = spectrum_of(-double_center(d_true)).eigenvectors[:, :r]
    params = ModelParams(rank=r, rho1=rho1 if rho1 is not None else 0.01, rho2=rho2, eta=eta)
    return obs, basis, params, d_true


class TestBuildProblem:
    def test_zero_rho1_zero_cost(self):
        obs, basis, _, _ = make_instance()
        params = ModelParams(rank=2, rho1=0.0, eta=0.0)
        prob = build_problem(obs, basis, params)
        np.testing.assert_allclose(prob.C, 0.0)
        x = random_hollow(np.random.default_rng(0), obs.n)
        f, _ = objective_and_gradient(prob, x)
        r = apply_observation(obs, x) + obs.y**2
        assert f == pytest.approx(0.5 * float(r @ r))

    def test_rho2_zero_gives_trace_term(self):
        obs, basis, _, _ = make_instance()
        params = ModelParams(rank=2, rho1=0.37, rho2=0.0, eta=0.0)
        prob = build_problem(obs, basis, params)
        rng = np.random.default_rng(1)
        for _ in range(5):
            x = random_hollow(rng, obs.n)
            lhs = float(np.tensordot(prob.C, x))
            rhs = obs.m * 0.37 * float(np.trace(double_center(x)))
            assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(rhs)))

    def test_cost_matrix_doubly_centered(self):
        obs, basis, params, _ = make_instance()
        prob = build_problem(obs, basis, params)
        assert np.abs(prob.C @ np.ones(obs.n)).max() <= 1e-10 * (1 + np.abs(prob.C).max())
        assert np.abs(np.ones(obs.n) @ prob.C).max() <= 1e-10 * (1 + np.abs(prob.C).max())

    def test_objective_matches_estimator_form(self):
        # quadratic-form value at X = -D equals m times the estimator
        # objective at D, for random hollow D
        rng = np.random.default_rng(2)
        obs, basis, params, _ = make_instance(m=35, seed=5)
        prob = build_problem(obs, basis, params)
        proj = basis @ basis.T
        for _ in range(10):
            d = random_hollow(rng, obs.n, scale=2.0)
            f, _ = objective_and_gradient(prob, -d)
            jdj = -double_center(d)
            direct = obs.m * (
                0.5 / obs.m * np.sum((obs.y**2 - apply_observation(obs, d)) ** 2)
                + params.rho1
                * (np.trace(jdj) - params.rho2 * float(np.tensordot(proj, jdj)))
            )
            assert f == pytest.approx(direct, rel=1e-9)

    def test_requires_orthonormal_basis(self):
        obs, basis, params, _ = make_instance()
        with pytest.raises(ValueError):
            build_problem(obs, 2.0 * basis, params)

    def test_requires_resolved_rho1(self):
        obs, basis, _, _ = make_instance()
        with pytest.raises(ValueError):
            build_problem(obs, basis, ModelParams(rank=2))


class TestGradient:
    def test_zero_case(self):
        obs = ObservationSet(3, np.array([[0, 1]]), np.array([0.0]))
        params = ModelParams(rank=1, rho1=0.0, eta=0.0)
        basis = np.eye(3)[:, :1]
        # orthonormalize against the centering structure is irrelevant here:
        # rho1 = 0 wipes the cost matrix
        prob = build_problem(obs, basis, params)
        f, g = objective_and_gradient(prob, np.zeros((3, 3)))
        assert f == 0.0
        np.testing.assert_allclose(g, 0.0)

    def test_matches_central_differences(self):
        rng = np.random.default_rng(3)
        obs, basis, params, _ = make_instance(n=6, m=12, seed=9)
        prob = build_problem(obs, basis, params)
        for _ in range(5):
            x = random_hollow(rng, 6)
            _, g = objective_and_gradient(prob, x)
            ref = central_diff_gradient_matrix(
                lambda z: objective_and_gradient(prob, (z + z.T) / 2)[0], x
            )
            assert np.abs(g - ref).max() <= 1e-6 * (1 + np.abs(g).max())

    def test_gradient_symmetric(self):
        obs, basis, params, _ = make_instance(seed=11)
        prob = build_problem(obs, basis, params)
        x = random_hollow(np.random.default_rng(4), obs.n)
        _, g = objective_and_gradient(prob, x)
        np.testing.assert_array_equal(g, g.T)

    def test_lipschitz_half_on_duplicate_free(self):
        rng = np.random.default_rng(5)
        n = 10
        pairs = all_pairs(n)
        for _ in range(50):
            take = rng.choice(pairs.shape[0], size=20, replace=False)
            obs = ObservationSet(n, pairs[np.sort(take)], np.zeros(20))
            prob = build_problem(
                obs, np.linalg.qr(rng.standard_normal((n, 2)))[0],
                ModelParams(rank=2, rho1=0.01, eta=0.0),
            )
            x = random_hollow(rng, n)
            y = random_hollow(rng, n)
            _, gx = objective_and_gradient(prob, x)
            _, gy = objective_and_gradient(prob, y)
            assert np.linalg.norm(gx - gy) <= 0.5 * np.linalg.norm(x - y) + 1e-10


class TestPenaltyWeight:
    def _obs(self, n, m, ymax):
        y = np.full(m, ymax / 2.0)
        y[0] = ymax
        pairs = sample_uniform(n, m, seed=0)
        return ObservationSet(n, pairs, y)

    def test_zero_noise_zero_weight(self):
        assert penalty_weight(self._obs(10, 5, 1.0), eta=0.0) == 0.0

    def test_frozen_example(self):
        # eta=0.1, max y = 2, n=100, m=1000, kappa*c_rho = 1
        obs = self._obs(100, 1000, 2.0)
        got = penalty_weight(obs, kappa=2.0, c_rho=0.5, eta=0.1)
        assert got == pytest.approx(0.0014557908320288375, rel=1e-12)

    def test_monotonicity(self):
        obs_small = self._obs(50, 200, 1.5)
        obs_big = self._obs(50, 800, 1.5)
        lo = penalty_weight(obs_small, eta=0.1)
        hi = penalty_weight(obs_small, eta=0.2)
        assert hi > lo
        assert penalty_weight(obs_big, eta=0.1) < lo

    def test_requires_eta(self):
        with pytest.raises(ValueError):
            penalty_weight(self._obs(10, 5, 1.0))

    def test_invariant_under_relabeling(self):
        obs = self._obs(30, 100, 2.0)
        perm = np.random.default_rng(6).permutation(obs.m)
        obs2 = ObservationSet(30, obs.pairs[perm], obs.y[perm])
        assert penalty_weight(obs, eta=0.3) == penalty_weight(obs2, eta=0.3)


def random_orthonormal(rng, n, r):
    return np.linalg.qr(rng.standard_normal((n, r)))[0]


class TestProjectorDiagnostics:
    def test_identical_bases(self):
        rng = np.random.default_rng(7)
        p = random_orthonormal(rng, 9, 3)
        assert projector_mismatch(p, p, 1.0) == pytest.approx(0.0, abs=1e-12)
        assert projector_overlap(p, p) == pytest.approx(1.0, abs=1e-12)

    def test_scale_zero_is_inv_sqrt2(self):
        rng = np.random.default_rng(8)
        for r in (1, 2, 4):
            p = random_orthonormal(rng, 10, r)
            q = random_orthonormal(rng, 10, r)
            assert projector_mismatch(p, q, 0.0) == pytest.approx(
                1.0 / np.sqrt(2.0), abs=1e-12
            )

    def test_orthogonal_subspaces(self):
        p = np.eye(6)[:, :2]
        q = np.eye(6)[:, 2:4]
        assert projector_mismatch(p, q, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert projector_overlap(p, q) == pytest.approx(0.0, abs=1e-12)

    def test_expansion_identity(self):
        rng = np.random.default_rng(9)
        p = random_orthonormal(rng, 8, 2)
        q = random_orthonormal(rng, 8, 2)
        ip = float(np.tensordot(p @ p.T, q @ q.T))
        for scale in (0.0, 0.7, 1.0, 2.3):
            direct = projector_mismatch(p, q, scale)
            # expansion: alpha(s)^2 = (1/2r)(r - 2 s <PP,QQ> + s^2 r), r = 2 here
            expanded = np.sqrt((2.0 - 2.0 * scale * ip + scale**2 * 2.0) / 4.0)
            assert direct == pytest.approx(expanded, abs=1e-10)

    def test_overlap_minimizes_mismatch_on_grid(self):
        rng = np.random.default_rng(10)
        p = random_orthonormal(rng, 12, 3)
        q = random_orthonormal(rng, 12, 3)
        star = projector_overlap(p, q)
        best = projector_mismatch(p, q, star)
        grid = np.arange(0.0, 3.0001, 0.01)
        vals = np.array([projector_mismatch(p, q, s) for s in grid])
        assert (best <= vals + 1e-12).all()
        # convexity along the grid
        assert (vals[:-2] + vals[2:] - 2 * vals[1:-1] >= -1e-9).all()

    def test_overlap_within_unit_interval(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            p = random_orthonormal(rng, 7, 2)
            q = random_orthonormal(rng, 7, 2)
            ov = projector_overlap(p, q)
            assert -1e-12 <= ov <= 1.0 + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            projector_mismatch(np.eye(4)[:, :2], np.eye(4)[:, :3], 1.0)


class TestWeightOrdering:
    def test_exact_initializer(self):
        d = bench.edm_from_points(bench.random_points(10, 2, 0))
        res = check_weight_ordering(d, d, 2)
        assert res.precondition_met and res.holds
        assert res.mismatch1 == pytest.approx(0.0, abs=1e-10)
        assert res.mismatch0 == pytest.approx(1 / np.sqrt(2), abs=1e-12)
        assert res.mismatch2 == pytest.approx(1 / np.sqrt(2), abs=1e-10)

    def test_holds_across_seeds(self):
        for seed in range(100):
            d = bench.edm_from_points(bench.random_points(12, 2, seed))
            lam_r = np.linalg.eigvalsh(-double_center(d))[::-1][1]
            d_init = bench.perturbed_initializer(d, 0.4 * lam_r, seed + 1000)
            res = check_weight_ordering(d, d_init, 2)
            assert res.precondition_met and res.holds

    def test_guard_when_too_far(self):
        d = bench.edm_from_points(bench.random_points(10, 2, 3))
        lam_r = np.linalg.eigvalsh(-double_center(d))[::-1][1]
        d_init = bench.perturbed_initializer(d, 0.6 * lam_r, 4)
        res = check_weight_ordering(d, d_init, 2)
        assert not res.precondition_met and res.holds is None


class TestNoiseScaleAndResolution:
    def test_recovers_gaussian_scale(self):
        rng = np.random.default_rng(12)
        d = rng.random(20000) + 1.0
        y = d + 0.07 * rng.standard_normal(d.size)
        assert estimate_noise_scale(y, d) == pytest.approx(0.07, rel=0.05)

    def test_resolution_paths(self):
        obs, basis, _, d_true = make_instance(eta=0.1)
        p = with_resolved_rho1(ModelParams(rank=2, eta=0.1), obs)
        assert p.rho1 is not None and p.rho1 > 0
        with pytest.raises(ValueError):
            with_resolved_rho1(ModelParams(rank=2), obs)
        d_at = np.sqrt(d_true[obs.pairs[:, 0], obs.pairs[:, 1]])
        p2 = with_resolved_rho1(ModelParams(rank=2), obs, d_at)
        assert p2.eta is not None and p2.rho1 is not None


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ModelParams(rank=0)
        with pytest.raises(ValueError):
            ModelParams(rank=2, kappa=1.0)
        with pytest.raises(ValueError):
            ModelParams(rank=2, rho2=-0.5)
        with pytest.raises(ValueError):
            ModelParams(rank=2, tol=0.0)

    def test_config_parsing(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text(
            "# solver settings\n"
            "rho2 = 1.0\n"
            "kappa 2.5\n"
            "eta = 0.05\n"
            "rank = 3\n"
            "tol = 1e-4\n"
            "max_iter = 500\n"
            "seed = 7\n"
        )
        cfg = parse_config(p)
        assert cfg == {
            "rho2": 1.0,
            "kappa": 2.5,
            "eta": 0.05,
            "rank": 3,
            "tol": 1e-4,
            "max_iter": 500,
            "seed": 7,
        }
        params = params_from_config(cfg)
        assert params.rank == 3 and params.kappa == 2.5 and params.max_iter == 500

    def test_config_rejects_unknown_key(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("momentum = 3\n")
        with pytest.raises(ValueError):
            parse_config(p)
