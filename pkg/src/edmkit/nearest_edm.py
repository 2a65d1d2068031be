"""Projection onto the nearest-EDM set {X : diag(X) = b, JXJ PSD}.

The projection ``min 1/2 ||X - G||^2`` over that set is solved through
its diagonal-multiplier dual: with ``z = G + Diag(y)`` the dual function

    theta(y) = <b, y> + 1/2 ||G||^2 - 1/2 ||P(z)||^2,

where ``P`` is the closed-form cone projection, is concave and
differentiable with ``grad theta(y) = b - diag(P(z))``. The maximizer
makes ``X = P(z)`` feasible, and an approximate maximizer leaves only a
small diagonal infeasibility, which is exactly the inexactness knob the
outer accelerated method wants.

Ascent directions come from a semismooth Newton system built on the
generalized Jacobian of the eigenvalue clipping, solved matrix-free by
conjugate gradients, with an Armijo line search and a gradient-ascent
fallback whenever the Newton direction stalls.
"""

import numpy as np
from dataclasses import dataclass
from scipy.sparse.linalg import LinearOperator, cg

from .linalg import check_symmetric, double_center, symmetrize


class ProjectionError(RuntimeError):
    """Inner dual ascent exhausted its iteration cap.

    Carries the best diagonal residual reached (``best_residual``) and the
    number of iterations spent.
    """

    def __init__(self, message, best_residual, iterations):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


@dataclass(frozen=True)
class ProjectionResult:
    """Approximate nearest-EDM projection.

    ``x`` is exactly the cone projection of ``G + Diag(y)``, so cone
    membership and complementarity hold by construction; only the
    diagonal constraint is inexact, with ``primal_residual`` its norm.
    """

    x: np.ndarray
    y: np.ndarray
    primal_residual: float
    inner_iterations: int


def _centered_eig(z):
    b = double_center(z)
    lam, q = np.linalg.eigh(b)
    return b, lam, q


def _cone_project_parts(z, b_cent, lam, q):
    # P(z) = (z - JzJ) + clip(JzJ) using an already computed decomposition
    clipped = (q * np.maximum(lam, 0.0)) @ q.T
    return symmetrize(z - b_cent + clipped)


def _clip_jacobian_weights(lam):
    """First-divided-difference matrix of t -> max(t, 0) on the spectrum.

    Entry (a, b) is (lam_a^+ - lam_b^+)/(lam_a - lam_b), with the limit
    1{lam > 0} on (near-)coincident eigenvalues; this is one element of
    the clipping map's generalized Jacobian.
    """
    scale = max(1.0, float(np.abs(lam).max()))
    lp = np.maximum(lam, 0.0)
    den = lam[:, None] - lam[None, :]
    close = np.abs(den) <= 1e-14 * scale
    num = lp[:, None] - lp[None, :]
    omega = np.where(close, (lam[:, None] > 0).astype(float), num / np.where(close, 1.0, den))
    return omega


def dual_value_and_gradient(g_mat, y, b=None):
    """Dual objective and gradient at multiplier ``y`` (one cone projection)."""
    g_mat = check_symmetric(g_mat, "G")
    n = g_mat.shape[0]
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"multiplier must have length {n}")
    rhs = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    z = g_mat + np.diag(y)
    b_cent, lam, q = _centered_eig(z)
    x = _cone_project_parts(z, b_cent, lam, q)
    theta = float(rhs @ y) + 0.5 * float(np.sum(g_mat * g_mat)) - 0.5 * float(np.sum(x * x))
    grad = rhs - np.diag(x)
    return theta, grad


def _jacobian_matvec(q, omega, d):
    # diagonal of DP(z)[Diag(d)] where DP = (I - J.J) + clip'(J.J)
    n = d.shape[0]
    s = np.diag(d) - (np.add.outer(d, d)) / n + d.sum() / n**2
    t = (q.T @ s @ q) * omega
    p3 = ((q @ t) * q).sum(axis=1)
    return d - np.diag(s) + p3


def project_hollow_edm_cone(g_mat, eps_inner, y0=None, b=None, max_inner=200):
    """Project ``g_mat`` onto {X : diag(X) = b, JXJ PSD} to accuracy ``eps_inner``.

    Maximizes the diagonal-multiplier dual until the returned
    ``X = P(G + Diag(y))`` satisfies ``||diag(X) - b|| <= eps_inner``.
    ``y0`` warm-starts the multiplier (the natural choice across outer
    accelerated-gradient iterations); ``b`` defaults to the hollow case 0.

    Raises :class:`ProjectionError` when ``max_inner`` iterations do not
    reach the requested accuracy.
    """
    g_mat = check_symmetric(g_mat, "G")
    if eps_inner <= 0:
        raise ValueError("eps_inner must be positive")
    n = g_mat.shape[0]
    rhs = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    if rhs.shape != (n,):
        raise ValueError(f"diagonal target must have length {n}")
    y = np.zeros(n) if y0 is None else np.asarray(y0, dtype=float).copy()
    if y.shape != (n,):
        raise ValueError(f"warm start must have length {n}")

    half_g2 = 0.5 * float(np.sum(g_mat * g_mat))

    def evaluate(yv):
        z = g_mat + np.diag(yv)
        b_cent, lam, q = _centered_eig(z)
        x = _cone_project_parts(z, b_cent, lam, q)
        theta = float(rhs @ yv) + half_g2 - 0.5 * float(np.sum(x * x))
        grad = rhs - np.diag(x)
        return x, theta, grad, lam, q

    x, theta, grad, lam, q = evaluate(y)
    res = float(np.linalg.norm(grad))
    best_res = res
    scale = 1.0 + float(np.linalg.norm(g_mat))

    def line_search(state, step, slope):
        # Accept on sufficient ascent of theta (with a machine-precision
        # slack: near the optimum the true increase ~ res^2 drowns in
        # roundoff of theta) or on plain residual decrease, which is what
        # the local Newton phase actually delivers.
        y, x, theta, grad, lam, q = state
        res = float(np.linalg.norm(grad))
        slack = 1e-13 * (1.0 + abs(theta))
        stepsize = 1.0
        for _ in range(30):
            cand = y + stepsize * step
            x_c, theta_c, grad_c, lam_c, q_c = evaluate(cand)
            res_c = float(np.linalg.norm(grad_c))
            ok = (
                res_c <= eps_inner
                or res_c <= (1.0 - 1e-4 * stepsize) * res
                or theta_c >= theta + 1e-4 * stepsize * slope - slack
            )
            if ok:
                return cand, x_c, theta_c, grad_c, lam_c, q_c
            stepsize *= 0.5
        return None

    it = 0
    while it < max_inner:
        if res <= eps_inner:
            return ProjectionResult(x=x, y=y, primal_residual=res, inner_iterations=it)
        it += 1

        omega = _clip_jacobian_weights(lam)
        tau = 1e-12 * scale + 1e-6 * res

        def matvec(d, q=q, omega=omega, tau=tau):
            return _jacobian_matvec(q, omega, d) + tau * d

        op = LinearOperator((n, n), matvec=matvec, dtype=float)
        rtol = min(0.1, np.sqrt(res / scale))
        step, _ = cg(op, grad, rtol=rtol, atol=0.0, maxiter=4 * n)

        state = (y, x, theta, grad, lam, q)
        slope = float(grad @ step)
        newton_ok = np.isfinite(slope) and slope > 1e-16 * res * float(np.linalg.norm(step))
        accepted = line_search(state, step, slope) if newton_ok else None
        if accepted is None:
            # Newton direction unusable or made no progress: plain ascent
            accepted = line_search(state, grad, res * res)
        if accepted is None:
            break
        y, x, theta, grad, lam, q = accepted
        res = float(np.linalg.norm(grad))
        best_res = min(best_res, res)

    if res <= eps_inner:
        return ProjectionResult(x=x, y=y, primal_residual=res, inner_iterations=it)
    raise ProjectionError(
        f"nearest-EDM dual ascent stalled at residual {best_res:.3e} "
        f"(target {eps_inner:.3e}) after {it} iterations",
        best_residual=best_res,
        iterations=it,
    )
