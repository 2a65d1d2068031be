"""Inexact accelerated proximal gradient loop for the distance estimator.

Each iteration projects the extrapolated gradient step onto the
nearest-EDM set; because the observation operator is 1/2-Lipschitz on
hollow matrices the unit proximal metric suffices and the subproblem is
a plain projection. The projection is solved inexactly under a summable
accuracy schedule ``eps_k = (tol/10) / k^1.2`` and warm-started from the
previous diagonal multiplier. Iterations stop when the primal and dual
infeasibilities both fall below ``tol``.
"""

import time

import numpy as np
from dataclasses import dataclass, field

from .linalg import check_symmetric
from .model import objective_and_gradient
from .nearest_edm import project_hollow_edm_cone


class SolverDivergenceError(RuntimeError):
    """Objective or gradient became non-finite (pathological input data)."""


def momentum_next(t):
    """Momentum recurrence t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2."""
    return (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0


def extrapolate(x_curr, x_prev, t_curr, t_next):
    """Extrapolated point X_k + ((t_k - 1)/t_{k+1}) (X_k - X_{k-1})."""
    return x_curr + ((t_curr - 1.0) / t_next) * (x_curr - x_prev)


def residuals(problem, x, y_dual, base_point):
    """Primal and dual infeasibility of an iterate.

    ``base_point`` is the extrapolation point whose projection produced
    ``x``; the cone multiplier is recovered from the projection identity
    ``Z = X - (Y - grad f(Y)) - Diag(y)``, and the dual residual is
    ``||grad f(X) - Diag(y) - Z|| / (1 + ||C||)`` with the gradient taken
    at ``x`` itself. The primal residual is ``||diag(X)||``.
    """
    r_p = float(np.linalg.norm(np.diag(x)))
    _, grad_x = objective_and_gradient(problem, x)
    _, grad_y = objective_and_gradient(problem, base_point)
    z = x - (base_point - grad_y) - np.diag(y_dual)
    r_d = float(np.linalg.norm(grad_x - np.diag(y_dual) - z)) / (1.0 + problem.c_norm)
    return r_p, r_d


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a solve.

    ``d_star = -X`` is the recovered squared-distance matrix, hollow and
    cone-feasible up to the stopping tolerance.
    """

    d_star: np.ndarray
    iterations: int
    r_p: float
    r_d: float
    converged: bool
    objective_trace: list = field(repr=False)
    wall_seconds: float = 0.0
    y_dual: np.ndarray | None = None


def solve(problem, x0, params, restart=False, log=None):
    """Run the accelerated projection loop from ``x0`` (usually minus the
    initializer matrix).

    Parameters
    ----------
    problem : QuadraticProblem
    x0 : (n, n) array
        Symmetric starting point.
    params : ModelParams
        Supplies ``tol`` and ``max_iter``.
    restart : bool
        Reset the momentum when the objective increases. Off by default;
        the plain loop matches the reference recursion exactly.
    log : file-like or None
        When set, one line per iteration:
        ``k  f  R_p  R_d  inner  seconds``.
    """
    x0 = check_symmetric(x0, "starting point")
    if x0.shape[0] != problem.n:
        raise ValueError(f"starting point must be {problem.n} x {problem.n}")

    start = time.perf_counter()
    eps0 = params.tol / 10.0
    x_prev = x0
    x_curr = x0
    y_point = x0
    t_curr = 1.0
    y_warm = None
    trace = []
    r_p = r_d = np.inf
    converged = False
    k = 0

    for k in range(1, params.max_iter + 1):
        f_y, grad_y = objective_and_gradient(problem, y_point)
        if not np.isfinite(f_y) or not np.isfinite(grad_y).all():
            raise SolverDivergenceError(f"objective diverged at iteration {k}")
        g_step = y_point - grad_y
        eps_k = eps0 / k**1.2
        proj = project_hollow_edm_cone(g_step, eps_k, y0=y_warm)
        x_new = proj.x
        y_warm = proj.y

        r_p = proj.primal_residual
        f_x, grad_x = objective_and_gradient(problem, x_new)
        z = x_new - g_step - np.diag(proj.y)
        r_d = float(np.linalg.norm(grad_x - np.diag(proj.y) - z)) / (1.0 + problem.c_norm)
        trace.append(f_x)
        if log is not None:
            log.write(
                f"{k:5d}  {f_x: .9e}  {r_p:.3e}  {r_d:.3e}  "
                f"{proj.inner_iterations:3d}  {time.perf_counter() - start:.3f}\n"
            )

        if max(r_p, r_d) <= params.tol:
            x_prev, x_curr = x_curr, x_new
            converged = True
            break

        if restart and len(trace) >= 2 and trace[-1] > trace[-2]:
            t_next = 1.0
            y_point = x_new
        else:
            t_next = momentum_next(t_curr)
            y_point = extrapolate(x_new, x_curr, t_curr, t_next)
        x_prev, x_curr = x_curr, x_new
        t_curr = t_next

    return SolveReport(
        d_star=-x_curr,
        iterations=k,
        r_p=r_p,
        r_d=r_d,
        converged=converged,
        objective_trace=trace,
        wall_seconds=time.perf_counter() - start,
        y_dual=y_warm,
    )
