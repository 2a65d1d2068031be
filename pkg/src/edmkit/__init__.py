"""Euclidean distance matrix completion and low-dimensional embedding.

Reconstructs a full squared-distance matrix (and a point configuration)
from a partial, noisy set of pairwise distances by solving a convex
estimator over the cone of Euclidean distance matrices with an inexact
accelerated proximal gradient method.

Typical flow::

    obs     = sampling.observe(pairs, d_true, eta, noise)
    report, d_init, params = bench.solve_observations(obs, ModelParams(rank=2))
    emb     = linalg.cmds_embed(report.d_star, 2)
"""

from . import apg, bench, fileio, graphinit, linalg, model, nearest_edm, sampling
from .apg import SolveReport, extrapolate, momentum_next, residuals, solve
from .bench import edm_from_points, random_points, solve_observations
from .graphinit import (
    GraphDisconnectedError,
    InteractionCounts,
    PartialDistanceGraph,
    initial_subspace,
    jaccard_dissimilarity,
    shortest_path_complete,
    strip_isolated,
)
from .linalg import (
    EmbeddingResult,
    Spectrum,
    cmds_embed,
    double_center,
    edm_score,
    hollow_complement,
    is_edm,
    numerical_rank,
    project_almost_psd,
    project_psd,
    spectrum_of,
)
from .model import (
    ModelParams,
    QuadraticProblem,
    build_problem,
    check_weight_ordering,
    estimate_noise_scale,
    objective_and_gradient,
    penalty_weight,
    projector_mismatch,
    projector_overlap,
)
from .nearest_edm import ProjectionError, ProjectionResult, dual_value_and_gradient
from .nearest_edm import project_hollow_edm_cone
from .sampling import (
    NoiseSpec,
    ObservationSet,
    apply_observation,
    apply_observation_adjoint,
    effective_noise,
    observe,
    sample_knn,
    sample_uniform,
    sample_unit_ball,
)

__version__ = "0.1.0"
