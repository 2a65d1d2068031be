"""The three sampling rules and the entrywise observation operator.

Shows which pairs each rule selects on a small configuration, how noisy
observations are generated, and the algebraic identities the operator and
its adjoint satisfy.
"""

import numpy as np

from edmkit import bench, sampling

pts = bench.random_points(8, 2, seed=7)
d_sq = bench.edm_from_points(pts)
dist = np.sqrt(d_sq)
n = 8

print("uniform rule: 12 draws with replacement (duplicates are kept)")
pairs = sampling.sample_uniform(n, 12, seed=1)
print(pairs.T)

print()
print("k-NN rule with k=2: union of each row's two nearest neighbors")
pairs = sampling.sample_knn(dist, 2)
print(f"{pairs.shape[0]} pairs:", pairs.tolist())

print()
print("unit-ball rule at three radii (monotone):")
for eps in (0.2, 0.4, 0.8):
    print(f"  eps={eps}: {sampling.sample_unit_ball(dist, eps).shape[0]} pairs")

print()
print("noisy observation of true (unsquared) distances, eta = 0.1:")
spec = sampling.NoiseSpec("gaussian", seed=5)
obs = sampling.observe(sampling.sample_uniform(n, 6, 2), d_sq, 0.1, spec)
truth = np.sqrt(d_sq[obs.pairs[:, 0], obs.pairs[:, 1]])
for (i, j), y, t in zip(obs.pairs, obs.y, truth):
    print(f"  ({i},{j}): observed {y:.4f}, true {t:.4f}")

print()
print("operator/adjoint identity <O(A), z> = <A, O*(z)>:")
rng = np.random.default_rng(3)
a = rng.standard_normal((n, n))
a = (a + a.T) / 2
np.fill_diagonal(a, 0.0)
z = rng.standard_normal(obs.m)
lhs = float(sampling.apply_observation(obs, a) @ z)
rhs = float(np.tensordot(a, sampling.apply_observation_adjoint(obs, z)))
print(f"  lhs = {lhs:.12f}, rhs = {rhs:.12f}, gap = {abs(lhs - rhs):.2e}")

print()
print("second-moment law: E <A, X>^2 = ||A||^2 / (2 |pairs|) under uniform draws")
pairs = sampling.sample_uniform(n, 200000, seed=9)
vals = a[pairs[:, 0], pairs[:, 1]] ** 2
target = np.linalg.norm(a) ** 2 / (2 * sampling.num_pairs(n))
print(f"  Monte Carlo {vals.mean():.6f} vs closed form {target:.6f}")
