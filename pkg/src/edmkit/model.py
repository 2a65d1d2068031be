"""The convex distance-learning estimator as a generic constrained
quadratic problem, plus its parameter theory.

The estimator seeks a squared-distance matrix ``D`` that fits the squared
observations while a trace penalty shrinks the total variance and a
subspace-attraction term pushes variance back into the leading
eigenvectors of the initializer. In the solver's variable ``X = -D`` the
objective becomes

    f(X) = 1/2 ||O(X) - a||^2 + <C, X>       a = -(y o y),
    C = m rho1 J (I - rho2 P P^T) J,

minimized over hollow ``X`` whose doubly centered part is PSD. ``rho1``
scales the whole spectral penalty and ``rho2`` balances shrinkage against
subspace attraction (``rho2 = 0`` is pure trace/nuclear-norm shrinkage,
``rho2 = 2`` the eigen-gap flavor; ``rho2 = 1`` is the default and is
provably the better of the three whenever the initializer is close).
"""

import numpy as np
from dataclasses import dataclass, replace

from .linalg import check_symmetric, double_center, spectrum_of, symmetrize
from .sampling import apply_observation, apply_observation_adjoint

_CONFIG_KEYS = {
    "rho1": float,
    "rho2": float,
    "kappa": float,
    "c_rho": float,
    "eta": float,
    "rank": int,
    "tol": float,
    "max_iter": int,
    "seed": int,
}


@dataclass(frozen=True)
class ModelParams:
    """Estimator and solver parameters.

    ``rho1`` or ``eta`` left as None mean "derive me": ``eta`` from
    initializer residuals, ``rho1`` from :func:`penalty_weight`.
    """

    rank: int = 2
    rho1: float | None = None
    rho2: float = 1.0
    kappa: float = 2.0
    c_rho: float = 1.0
    eta: float | None = None
    tol: float = 1e-3
    max_iter: int = 2000

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.rho1 is not None and self.rho1 < 0:
            raise ValueError("rho1 must be >= 0")
        if self.rho2 < 0:
            raise ValueError("rho2 must be >= 0")
        if self.kappa <= 1:
            raise ValueError("kappa must be > 1")
        if self.c_rho <= 0:
            raise ValueError("c_rho must be > 0")
        if self.eta is not None and self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def parse_config(path):
    """Parse a flat key-value parameter file.

    One ``key = value`` pair per line (a bare ``key value`` also works);
    blank lines and ``#`` comments are ignored. Known keys: rho1, rho2,
    kappa, c_rho, eta, rank, tol, max_iter, seed.
    """
    out = {}
    with open(path) as fh:
        for ln in fh:
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            tok = [t for t in ln.replace("=", " ").split() if t]
            if len(tok) != 2:
                raise ValueError(f"{path}: malformed config line {ln!r}")
            key, val = tok
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}: unknown config key {key!r}")
            out[key] = _CONFIG_KEYS[key](val)
    return out


def params_from_config(cfg, **overrides):
    """Build :class:`ModelParams` from a parsed config dict (seed ignored)."""
    kwargs = {k: v for k, v in cfg.items() if k != "seed"}
    kwargs.update(overrides)
    return ModelParams(**kwargs)


@dataclass(frozen=True)
class QuadraticProblem:
    """Data of the constrained quadratic program in the variable X = -D.

    The linear map is the observation operator of ``obs``; the constraint
    is ``diag(X) = 0`` with the almost-PSD cone membership handled by the
    projection subproblem. ``c_norm`` caches ||C|| for residual scaling.
    """

    obs: "ObservationSet"
    a: np.ndarray
    C: np.ndarray
    c_norm: float

    @property
    def n(self):
        return self.obs.n

    @property
    def m(self):
        return self.obs.m


def build_problem(obs, subspace_basis, params):
    """Assemble the quadratic problem from observations and the initializer basis.

    ``subspace_basis`` must be orthonormal with ``params.rank`` columns.
    The cost matrix ``C = m rho1 J(I - rho2 P P^T)J`` is doubly centered
    by construction; evaluating the quadratic objective at ``X = -D``
    reproduces m times the estimator objective at ``D``.
    """
    p = np.asarray(subspace_basis, dtype=float)
    if p.ndim != 2 or p.shape != (obs.n, params.rank):
        raise ValueError(
            f"subspace basis must be {obs.n} x {params.rank}, got {p.shape}"
        )
    ortho = np.abs(p.T @ p - np.eye(params.rank)).max()
    if ortho > 1e-8:
        raise ValueError(f"subspace basis is not orthonormal (error {ortho:.3e})")
    if params.rho1 is None:
        raise ValueError("rho1 must be resolved before building the problem")
    a = -(obs.y * obs.y)
    core = np.eye(obs.n) - params.rho2 * (p @ p.T)
    C = obs.m * params.rho1 * double_center(symmetrize(core))
    return QuadraticProblem(obs=obs, a=a, C=C, c_norm=float(np.linalg.norm(C)))


def objective_and_gradient(problem, x):
    """Objective value and (symmetric) gradient of f at X."""
    x = check_symmetric(x, "X")
    r = apply_observation(problem.obs, x) - problem.a
    f = 0.5 * float(r @ r) + float(np.tensordot(problem.C, x))
    g = apply_observation_adjoint(problem.obs, r) + problem.C
    return f, g


def estimate_noise_scale(y, d_init):
    """Robust noise-scale estimate from residuals against initializer distances.

    Median absolute deviation of ``y - d_init`` times 1.4826 (the normal
    consistency factor). A heuristic stand-in when the noise magnitude is
    not known.
    """
    r = np.asarray(y, dtype=float) - np.asarray(d_init, dtype=float)
    return float(1.4826 * np.median(np.abs(r - np.median(r))))


def penalty_weight(obs, kappa=2.0, c_rho=1.0, eta=None):
    """Spectral penalty size rho1 = c_rho * kappa * eta * w * sqrt(log(2n)/(m n)).

    ``w`` proxies the largest true observed distance with ``max(y)`` (the
    bias is at most eta times the largest noise variate). ``eta`` must be
    supplied here; use :func:`estimate_noise_scale` when unknown. With
    ``eta = 0`` the penalty vanishes and the model is pure least squares.
    """
    if obs.m < 1:
        raise ValueError("need at least one observation")
    if eta is None:
        raise ValueError("eta is required (estimate it first if unknown)")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    w = float(obs.y.max())
    return float(c_rho * kappa * eta * w * np.sqrt(np.log(2.0 * obs.n) / (obs.m * obs.n)))


def _check_basis_pair(p_ref, p_est):
    p_ref = np.asarray(p_ref, dtype=float)
    p_est = np.asarray(p_est, dtype=float)
    if p_ref.ndim != 2 or p_est.ndim != 2 or p_ref.shape != p_est.shape:
        raise ValueError(
            f"bases must have identical shapes, got {p_ref.shape} and {p_est.shape}"
        )
    return p_ref, p_est


def projector_mismatch(p_ref, p_est, scale):
    """Normalized distance between a reference eigenprojector and a scaled one.

    ``||P_ref P_ref^T - scale * P_est P_est^T|| / sqrt(2r)`` for orthonormal
    n x r bases. This constant multiplies the recovery error bound, so a
    smaller value means a better subspace weight: at ``scale = 0`` it is
    1/sqrt(2) regardless of the bases, and it vanishes only when the bases
    span the same space and ``scale = 1``.
    """
    p_ref, p_est = _check_basis_pair(p_ref, p_est)
    r = p_ref.shape[1]
    diff = p_ref @ p_ref.T - scale * (p_est @ p_est.T)
    return float(np.linalg.norm(diff) / np.sqrt(2.0 * r))


def projector_overlap(p_ref, p_est):
    """Mean overlap <P_ref P_ref^T, P_est P_est^T> / r of two eigenprojectors.

    Lies in [0, 1] and is exactly the scale minimizing
    :func:`projector_mismatch`; values near 1 mean the initializer
    subspace is trustworthy and the default weight 1 is near-optimal.
    """
    p_ref, p_est = _check_basis_pair(p_ref, p_est)
    r = p_ref.shape[1]
    return float(np.linalg.norm(p_ref.T @ p_est) ** 2 / r)


@dataclass(frozen=True)
class WeightOrdering:
    """Outcome of the subspace-weight ordering check.

    ``holds`` is None when the closeness precondition fails (no verdict),
    otherwise whether mismatch(1) < min(mismatch(0), mismatch(2)) strictly.
    """

    precondition_met: bool
    mismatch0: float
    mismatch1: float
    mismatch2: float
    holds: bool | None


def check_weight_ordering(d_true, d_init, r):
    """Check that subspace weight 1 beats weights 0 and 2 for a given initializer.

    The guarantee needs ``||d_init - d_true|| < lam_r / 2`` where ``lam_r``
    is the r-th eigenvalue of ``-J d_true J``; when that fails the result
    carries no verdict.
    """
    d_true = check_symmetric(d_true, "true distance matrix")
    d_init = check_symmetric(d_init, "initial distance matrix")
    spec_true = spectrum_of(-double_center(d_true))
    spec_init = spectrum_of(-double_center(d_init))
    p_true = spec_true.eigenvectors[:, :r]
    p_init = spec_init.eigenvectors[:, :r]
    m0 = projector_mismatch(p_true, p_init, 0.0)
    m1 = projector_mismatch(p_true, p_init, 1.0)
    m2 = projector_mismatch(p_true, p_init, 2.0)
    delta = float(np.linalg.norm(d_init - d_true))
    met = delta < spec_true.eigenvalues[r - 1] / 2.0
    holds = bool(m1 < min(m0, m2)) if met else None
    return WeightOrdering(
        precondition_met=met, mismatch0=m0, mismatch1=m1, mismatch2=m2, holds=holds
    )


def with_resolved_rho1(params, obs, d_init_at_pairs=None):
    """Return params with ``eta`` and ``rho1`` filled in where missing.

    ``d_init_at_pairs`` supplies initializer distances at the observed
    pairs for the noise-scale heuristic; it is only needed when ``eta``
    is absent.
    """
    eta = params.eta
    if eta is None:
        if d_init_at_pairs is None:
            raise ValueError("eta unknown and no initializer residuals supplied")
        eta = estimate_noise_scale(obs.y, d_init_at_pairs)
    rho1 = params.rho1
    if rho1 is None:
        rho1 = penalty_weight(obs, kappa=params.kappa, c_rho=params.c_rho, eta=eta)
    return replace(params, eta=eta, rho1=rho1)
