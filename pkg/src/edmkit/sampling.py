"""Index-pair sampling rules, the entrywise observation operator and its
adjoint, and the noise model producing observed distances.

Pairs are rows ``(i, j)`` with ``0 <= i < j < n`` of an integer array.
Uniform sampling draws with replacement, so a pair may repeat; the
operator and its adjoint count such duplicates with multiplicity.
Observed values are plain (unsquared) distances; the squared-distance
convention applies only to matrices.
"""

import numpy as np
from dataclasses import dataclass

NOISE_KINDS = ("gaussian", "rademacher", "uniform")

_SQRT3 = np.sqrt(3.0)


def num_pairs(n):
    """Number of unordered off-diagonal pairs, n(n-1)/2."""
    return n * (n - 1) // 2


def all_pairs(n):
    """All pairs (i, j) with i < j in lexicographic order, shape (n(n-1)/2, 2)."""
    iu = np.triu_indices(n, k=1)
    return np.column_stack(iu).astype(np.int64)


def check_pairs(pairs, n):
    """Validate a pair array: integer, shape (m, 2), 0 <= i < j < n."""
    pairs = np.asarray(pairs)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError(f"pairs must have shape (m, 2), got {pairs.shape}")
    if not np.issubdtype(pairs.dtype, np.integer):
        raise ValueError("pairs must be integers")
    pairs = pairs.astype(np.int64)
    if pairs.shape[0] and not (
        (pairs[:, 0] >= 0).all()
        and (pairs[:, 0] < pairs[:, 1]).all()
        and (pairs[:, 1] < n).all()
    ):
        raise ValueError("every pair must satisfy 0 <= i < j < n")
    return pairs


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean, unit-variance noise family with an explicit seed.

    ``uniform`` means the symmetric uniform distribution on
    [-sqrt(3), sqrt(3)], scaled analytically to unit variance.
    """

    kind: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")

    def variates(self, m):
        """Draw ``m`` i.i.d. variates; deterministic for a fixed seed."""
        rng = np.random.default_rng(self.seed)
        if self.kind == "gaussian":
            return rng.standard_normal(m)
        if self.kind == "rademacher":
            return rng.integers(0, 2, size=m) * 2.0 - 1.0
        return rng.uniform(-_SQRT3, _SQRT3, size=m)


@dataclass(frozen=True)
class ObservationSet:
    """Sampled index pairs with observed (unsquared) distance values.

    ``pairs`` may contain duplicates when sampling was done with
    replacement. ``y`` holds the observed distances, clamped at zero from
    below, and ``eta`` records the noise magnitude used.
    """

    n: int
    pairs: np.ndarray
    y: np.ndarray
    eta: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("observation set needs n >= 2")
        pairs = check_pairs(self.pairs, self.n)
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.shape[0] != pairs.shape[0]:
            raise ValueError("pairs and values must have matching length")
        if pairs.shape[0] < 1:
            raise ValueError("observation set must be nonempty")
        if (y < 0).any():
            raise ValueError("observed distances must be nonnegative")
        if self.eta < 0:
            raise ValueError("noise scale must be nonnegative")
        pairs = pairs.copy()
        y = y.copy()
        pairs.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "y", y)

    @property
    def m(self):
        return self.pairs.shape[0]


def sample_uniform(n, m, seed):
    """Draw ``m`` pairs i.i.d. uniformly (with replacement) over all pairs."""
    if n < 2:
        raise ValueError("need n >= 2")
    if m < 1:
        raise ValueError("need m >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, num_pairs(n), size=m)
    return all_pairs(n)[idx]


def sample_knn(dist, k):
    """Pairs whose distance ranks among the k smallest in either endpoint's row.

    ``dist`` is a hollow nonnegative matrix of (unsquared) distances. Ties
    are broken toward the smaller column index; the result is the union of
    the row-wise neighbor sets, normalized to i < j without duplicates.
    With k = 1 mutual nearest neighbors collapse to a single pair, so the
    output can be as small as ceil(n/2) pairs; k >= 2 always yields a
    superset of n - 1 pairs for generic distances.
    """
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if (dist < 0).any():
        raise ValueError("distances must be nonnegative")
    from .linalg import check_hollow

    check_hollow(dist, "distance matrix")
    rows = []
    cols = np.arange(n)
    for i in range(n):
        order = np.lexsort((cols, dist[i]))
        order = order[order != i][:k]
        rows.append(np.column_stack([np.full(k, i), order]))
    edges = np.concatenate(rows)
    lo = edges.min(axis=1)
    hi = edges.max(axis=1)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    return pairs.astype(np.int64)


def sample_unit_ball(dist, radius):
    """All pairs (i, j), i < j, with distance at most ``radius``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    dist = np.asarray(dist, dtype=float)
    pairs = all_pairs(dist.shape[0])
    keep = dist[pairs[:, 0], pairs[:, 1]] <= radius
    return pairs[keep]


def observe(pairs, d_true, eta, noise):
    """Observe distances at ``pairs`` from squared-distance matrix ``d_true``.

    Each observation is the true (unsquared) distance plus ``eta`` times a
    noise variate from ``noise``, clamped at zero from below. Passing the
    same :class:`NoiseSpec` reproduces the variates, so the realized noise
    vector is ``noise.variates(m)``.
    """
    from .linalg import check_hollow

    d_true = check_hollow(d_true, "squared-distance matrix")
    if (d_true < 0).any():
        raise ValueError("squared distances must be nonnegative")
    if eta < 0:
        raise ValueError("noise scale must be nonnegative")
    n = d_true.shape[0]
    pairs = check_pairs(pairs, n)
    d = np.sqrt(d_true[pairs[:, 0], pairs[:, 1]])
    xi = noise.variates(pairs.shape[0])
    y = np.maximum(d + eta * xi, 0.0)
    return ObservationSet(n=n, pairs=pairs, y=y, eta=float(eta))


def apply_observation(obs, a):
    """Entrywise observation: component l is <X_l, A> = A at pair l.

    ``X_l = (e_i e_j^T + e_j e_i^T)/2``, so for a symmetric ``a`` this is
    just the sampled off-diagonal entry; the symmetrized form is used so
    the operator/adjoint identity holds exactly for any square input.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (obs.n, obs.n):
        raise ValueError(f"matrix must be {obs.n} x {obs.n}, got {a.shape}")
    i, j = obs.pairs[:, 0], obs.pairs[:, 1]
    return 0.5 * (a[i, j] + a[j, i])


def apply_observation_adjoint(obs, z):
    """Adjoint scatter: sum of z_l X_l, accumulating duplicates additively."""
    z = np.asarray(z, dtype=float)
    if z.shape != (obs.m,):
        raise ValueError(f"vector must have length m={obs.m}, got shape {z.shape}")
    out = np.zeros((obs.n, obs.n))
    i, j = obs.pairs[:, 0], obs.pairs[:, 1]
    np.add.at(out, (i, j), 0.5 * z)
    np.add.at(out, (j, i), 0.5 * z)
    return out


def effective_noise(obs, d_true, xi):
    """Effective noise in the squared observations.

    With observed ``y = d + eta * xi`` the squared values satisfy
    ``y*y - (true squared entries) = eta * zeta`` with
    ``zeta = 2 d xi + eta xi^2`` componentwise; this returns ``zeta``
    for the realized noise ``xi`` used in :func:`observe` (valid when no
    clamping occurred). The scatter norm ``||adjoint(zeta)/m||_2`` feeds
    the penalty-size diagnostics.
    """
    from .linalg import check_hollow

    d_true = check_hollow(d_true, "squared-distance matrix")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (obs.m,):
        raise ValueError(f"noise vector must have length m={obs.m}")
    d = np.sqrt(d_true[obs.pairs[:, 0], obs.pairs[:, 1]])
    return 2.0 * d * xi + obs.eta * xi * xi


def write_observations(obs, path):
    """Write the triplet text format: header ``n m eta`` then ``i j y`` lines.

    Values carry 17 significant digits so write -> read -> write is
    bit-identical.
    """
    lines = [f"{obs.n} {obs.m} {obs.eta:.17g}"]
    for (i, j), y in zip(obs.pairs, obs.y):
        lines.append(f"{i} {j} {y:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_observations(path):
    """Read the triplet text format written by :func:`write_observations`."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty observation file")
    head = raw[0].split()
    if len(head) != 3:
        raise ValueError(f"{path}: header must be 'n m eta'")
    n, m, eta = int(head[0]), int(head[1]), float(head[2])
    if len(raw) - 1 != m:
        raise ValueError(f"{path}: header promises m={m} rows, found {len(raw) - 1}")
    pairs = np.empty((m, 2), dtype=np.int64)
    y = np.empty(m)
    for l, ln in enumerate(raw[1:]):
        tok = ln.split()
        if len(tok) != 3:
            raise ValueError(f"{path}: malformed observation line {ln!r}")
        pairs[l] = (int(tok[0]), int(tok[1]))
        y[l] = float(tok[2])
    return ObservationSet(n=n, pairs=pairs, y=y, eta=eta)
