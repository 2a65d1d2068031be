"""Dense symmetric-matrix substrate: centering, cone projections, EDM tests,
classical scaling and variance scores.

Conventions used throughout the package:

* A distance matrix ``D`` holds *squared* pairwise distances and is hollow
  (zero diagonal).
* ``J = I - 11^T/n`` is the centering projector; ``JAJ`` is the doubly
  centered part of ``A`` and the complement ``A - JAJ`` lives in the
  subspace spanned by ``{a 1^T + 1 a^T}``.
* ``D`` is a Euclidean distance matrix exactly when it is hollow and
  ``-D`` has a positive semidefinite doubly centered part.

All functions are pure and operate on plain ``numpy`` arrays.
"""

import numpy as np
from dataclasses import dataclass


def check_symmetric(a, name="matrix"):
    """Validate that ``a`` is a square symmetric 2-d float array, n >= 2.

    Returns the array as float64. Symmetry must be exact; callers that
    build matrices from noisy arithmetic should symmetrize first.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError(f"{name} must have n >= 2, got n={a.shape[0]}")
    if not np.array_equal(a, a.T):
        raise ValueError(f"{name} must be symmetric")
    return a


def check_hollow(a, name="matrix", tol=1e-12):
    """Validate symmetry plus an (absolute) zero diagonal within ``tol``."""
    a = check_symmetric(a, name)
    dmax = np.abs(np.diag(a)).max()
    if dmax > tol:
        raise ValueError(f"{name} must have a zero diagonal (max |diag| = {dmax:.3e})")
    return a


def symmetrize(a):
    """Exact symmetric part (A + A^T)/2."""
    return (a + a.T) / 2.0


def centering_matrix(n):
    """The projector J = I - 11^T/n onto the subspace orthogonal to 1."""
    return np.eye(n) - np.full((n, n), 1.0 / n)


def double_center(a):
    """Doubly centered part JAJ of a symmetric matrix.

    Computed as ``A - rowmean - colmean + totalmean`` which equals ``JAJ``
    exactly; the result annihilates the all-ones vector on both sides and
    the operation is idempotent.
    """
    a = check_symmetric(a)
    row = a.mean(axis=1, keepdims=True)
    return symmetrize(a - row - row.T + row.mean())


def hollow_complement(x):
    """Complement ``X - JXJ`` of a hollow matrix.

    For hollow ``X`` the complement has the closed rank<=2 form
    ``(d 1^T + 1 d^T)/2`` with ``d = diag(-JXJ)``; this identity is
    verified and a mismatch raises, since it indicates a non-hollow or
    asymmetric input slipping through.
    """
    x = check_hollow(x, "hollow matrix")
    c = x - double_center(x)
    d = np.diag(-double_center(x))
    closed = 0.5 * (np.outer(d, np.ones_like(d)) + np.outer(np.ones_like(d), d))
    err = np.abs(c - closed).max()
    if err > 1e-10 * (1.0 + np.abs(x).max()):
        raise ValueError(f"hollow complement identity violated ({err:.3e})")
    return c


def project_psd(a):
    """Projection onto the positive semidefinite cone by eigenvalue clipping."""
    a = check_symmetric(a)
    try:
        lam, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("eigendecomposition failed in PSD projection") from exc
    return symmetrize((v * np.maximum(lam, 0.0)) @ v.T)


def project_almost_psd(a):
    """Projection onto the cone of matrices with PSD doubly centered part.

    The cone constrains only ``JAJ``; the complement ``A - JAJ`` is free.
    The two parts are orthogonal, so the projection splits into keeping
    the complement and clipping the centered part:
    ``(A - JAJ) + project_psd(JAJ)``.
    """
    a = check_symmetric(a)
    b = double_center(a)
    return (a - b) + project_psd(b)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition with eigenvalues in nonincreasing order.

    ``eigenvectors[:, i]`` is the unit eigenvector for ``eigenvalues[i]``,
    with each vector's largest-magnitude entry made positive (ties broken
    by the lowest index) so decompositions are reproducible.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self):
        return self.eigenvalues.shape[0]


def _fix_signs(v):
    # largest-magnitude entry positive; np.argmax picks the lowest index on ties
    idx = np.argmax(np.abs(v), axis=0)
    flip = v[idx, np.arange(v.shape[1])] < 0
    v = v.copy()
    v[:, flip] *= -1.0
    return v


def spectrum_of(a):
    """Full symmetric eigendecomposition as a :class:`Spectrum`."""
    a = check_symmetric(a)
    try:
        lam, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("eigendecomposition failed") from exc
    lam = lam[::-1]
    v = _fix_signs(v[:, ::-1])
    return Spectrum(eigenvalues=lam, eigenvectors=v)


@dataclass(frozen=True)
class EdmCheck:
    """Result of an EDM membership test."""

    is_edm: bool
    embedding_dim: int


def is_edm(d, tol=1e-8):
    """Test whether ``d`` is a Euclidean distance matrix (squared distances).

    ``d`` qualifies when its diagonal vanishes within ``tol`` and the
    smallest eigenvalue of ``-JDJ`` is above ``-tol * (1 + lam_max)``.
    The embedding dimension is the count of eigenvalues of ``-JDJ``
    exceeding ``tol * lam_max`` (zero when ``lam_max <= tol``).
    """
    d = check_symmetric(d, "distance matrix")
    diag_ok = np.abs(np.diag(d)).max() <= tol
    lam = np.linalg.eigvalsh(-double_center(d))
    lam_max = lam[-1]
    psd_ok = lam[0] >= -tol * (1.0 + max(lam_max, 0.0))
    dim = int(np.count_nonzero(lam > tol * lam_max)) if lam_max > tol else 0
    return EdmCheck(is_edm=bool(diag_ok and psd_ok), embedding_dim=dim)


@dataclass(frozen=True)
class EmbeddingResult:
    """Classical-scaling output.

    ``points`` are n x k coordinates, ``spectrum`` is the decomposition of
    ``-JDJ/2`` (signed eigenvalues kept, so pseudo-Euclidean inputs stay
    visible), and ``edm_scores[k-1]`` is the fraction of total variance
    carried by the leading k eigenvalues (NaN when the total is <= 0).
    """

    points: np.ndarray
    spectrum: Spectrum
    edm_scores: np.ndarray


def cmds_embed(d, k, hollow_tol=1e-6):
    """Embed a distance matrix into k dimensions by classical scaling.

    Eigendecomposes ``-JDJ/2``; coordinates are the leading k eigenvectors
    scaled by the square roots of their eigenvalues, with negative
    eigenvalues clipped to zero for the coordinates only.

    Parameters
    ----------
    d : (n, n) array
        Squared-distance matrix, hollow within ``hollow_tol`` relative to
        its largest entry (solver outputs are hollow only up to their
        feasibility tolerance).
    k : int
        Target dimension, 1 <= k <= n.
    """
    d = check_symmetric(d, "distance matrix")
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"embedding dimension k={k} must satisfy 1 <= k <= n={n}")
    dmax = np.abs(np.diag(d)).max()
    if dmax > hollow_tol * (1.0 + np.abs(d).max()):
        raise ValueError(f"distance matrix is not hollow (max |diag| = {dmax:.3e})")
    spec = spectrum_of(-0.5 * double_center(d))
    lam = spec.eigenvalues
    coords = spec.eigenvectors[:, :k] * np.sqrt(np.maximum(lam[:k], 0.0))
    total = lam.sum()
    if total > 0:
        scores = np.cumsum(lam) / total
    else:
        scores = np.full(n, np.nan)
    return EmbeddingResult(points=coords, spectrum=spec, edm_scores=scores)


def numerical_rank(spectrum, rel_tol=1e-10):
    """Count of eigenvalues exceeding ``rel_tol`` times the largest magnitude."""
    lam = spectrum.eigenvalues
    scale = np.abs(lam).max()
    if scale == 0:
        return 0
    return int(np.count_nonzero(np.abs(lam) > rel_tol * scale))


def edm_score(spectrum, k, tol=1e-8):
    """Fraction of total variance carried by the leading ``k`` eigenvalues.

    Defined for spectra of (near-)EDM Gram parts: the total eigenvalue
    mass must be positive and no eigenvalue may fall below
    ``-tol * (1 + lam_max)``.
    """
    lam = spectrum.eigenvalues
    if not 1 <= k <= lam.shape[0]:
        raise ValueError(f"score order k={k} out of range 1..{lam.shape[0]}")
    total = lam.sum()
    if total <= 0:
        raise ValueError("EDM score undefined: total eigenvalue mass is not positive")
    if lam.min() < -tol * (1.0 + max(lam[0], 0.0)):
        raise ValueError(
            "EDM score undefined: spectrum has a significantly negative eigenvalue"
        )
    return float(lam[:k].sum() / total)
