"""Initial distance estimates from raw relational data.

Interaction counts turn into dissimilarities through the Jaccard formula;
a partial distance graph is completed into a full squared-distance matrix
by all-pairs shortest paths; and the leading eigenvectors of the doubly
centered initializer provide the subspace used by the estimator's
attraction term.
"""

import numpy as np
from dataclasses import dataclass
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .linalg import check_symmetric, double_center, spectrum_of


class GraphDisconnectedError(RuntimeError):
    """A distance graph that cannot be completed: two named vertices are
    in different components."""


@dataclass(frozen=True)
class InteractionCounts:
    """Symmetric nonnegative interaction counts on ``n`` actors.

    Stored sparsely: ``pairs[l] = (i, j)`` with ``i < j`` and
    ``counts[l] > 0``; absent pairs mean zero interactions, and the
    diagonal is implicitly zero.
    """

    n: int
    pairs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        from .sampling import check_pairs

        pairs = check_pairs(self.pairs, self.n)
        counts = np.asarray(self.counts)
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("counts must be integers")
        if counts.shape != (pairs.shape[0],):
            raise ValueError("pairs and counts must have matching length")
        if (counts <= 0).any():
            raise ValueError("stored counts must be positive")
        if pairs.shape[0] and np.unique(pairs, axis=0).shape[0] != pairs.shape[0]:
            raise ValueError("each pair may appear at most once")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "counts", counts.astype(np.int64))

    def row_sums(self):
        rs = np.zeros(self.n, dtype=np.int64)
        np.add.at(rs, self.pairs[:, 0], self.counts)
        np.add.at(rs, self.pairs[:, 1], self.counts)
        return rs


@dataclass(frozen=True)
class PartialDistanceGraph:
    """Undirected weighted graph of directly known (unsquared) distances.

    Weights are finite and nonnegative; a zero weight is legitimate (it
    marks maximal similarity) even though distance files only accept
    positive values.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        from .sampling import check_pairs

        edges = check_pairs(self.edges, self.n)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (edges.shape[0],):
            raise ValueError("edges and weights must have matching length")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ValueError("edge weights must be finite and nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", w)


def jaccard_dissimilarity(counts):
    """Jaccard dissimilarities from interaction counts.

    For every stored pair, ``d = sqrt(1 - c / (rowsum_i + rowsum_j - c))``;
    pairs with zero count stay unobserved. Outputs lie in [0, 1], with 0
    exactly when the pair's interactions exhaust both rows.
    """
    rs = counts.row_sums()
    i, j = counts.pairs[:, 0], counts.pairs[:, 1]
    denom = rs[i] + rs[j] - counts.counts
    if (denom <= 0).any():
        raise ValueError("malformed counts: nonpositive Jaccard denominator")
    d = np.sqrt(np.maximum(1.0 - counts.counts / denom, 0.0))
    return PartialDistanceGraph(n=counts.n, edges=counts.pairs, weights=d)


def strip_isolated(graph):
    """Drop vertices with no incident edge.

    Returns the reindexed graph and the kept original indices (new index
    ``t`` corresponds to original vertex ``kept[t]``).
    """
    kept = np.unique(graph.edges)
    if kept.shape[0] == graph.n:
        return graph, np.arange(graph.n)
    remap = np.full(graph.n, -1, dtype=np.int64)
    remap[kept] = np.arange(kept.shape[0])
    edges = remap[graph.edges]
    return PartialDistanceGraph(n=kept.shape[0], edges=edges, weights=graph.weights), kept


def shortest_path_complete(graph):
    """Complete a partial distance graph into a squared-distance matrix.

    Runs nonnegative-weight all-pairs shortest paths over the edge
    weights and returns the hollow matrix of squared path lengths (the
    matrix convention is squared distances). A direct edge survives
    whenever it is itself shortest. Disconnected inputs raise
    :class:`GraphDisconnectedError` naming a separated vertex pair.
    """
    n = graph.n
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    w = coo_matrix((graph.weights, (i, j)), shape=(n, n)).tocsr()
    ncomp, labels = connected_components(w, directed=False)
    if ncomp > 1:
        a = int(np.flatnonzero(labels == labels[0])[0])
        b = int(np.flatnonzero(labels != labels[0])[0])
        raise GraphDisconnectedError(
            f"distance graph is disconnected: vertices {a} and {b} "
            f"are in different components"
        )
    g = shortest_path(w, method="D", directed=False)
    g = (g + g.T) / 2.0
    np.fill_diagonal(g, 0.0)
    return g * g


@dataclass(frozen=True)
class InitialSubspace:
    """Leading eigenvectors of the doubly centered initializer.

    ``basis`` is n x r orthonormal, ``eigenvalues`` is the full spectrum
    of ``-J D J`` in nonincreasing order, and ``gap`` is the spectral gap
    behind the kept block (a smallness diagnostic for how trustworthy the
    subspace is).
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    gap: float


def initial_subspace(d_init, r):
    """Leading ``r``-dimensional eigenspace of ``-J D J`` for an initializer."""
    d_init = check_symmetric(d_init, "initial distance matrix")
    n = d_init.shape[0]
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    spec = spectrum_of(-double_center(d_init))
    lam = spec.eigenvalues
    return InitialSubspace(
        basis=spec.eigenvectors[:, :r],
        eigenvalues=lam,
        gap=float(lam[r - 1] - lam[r]),
    )


def read_counts(path):
    """Read an interaction-counts file: lines ``i j c``, each pair once."""
    pairs, counts = [], []
    seen = set()
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            tok = ln.split()
            if len(tok) != 3:
                raise ValueError(f"{path}: malformed counts line {ln!r}")
            i, j, c = int(tok[0]), int(tok[1]), int(tok[2])
            if i == j:
                raise ValueError(f"{path}: self-interaction at vertex {i}")
            if c <= 0:
                raise ValueError(f"{path}: count must be positive in line {ln!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"{path}: duplicate pair {key}")
            seen.add(key)
            pairs.append(key)
            counts.append(c)
    if not pairs:
        raise ValueError(f"{path}: empty counts file")
    pairs = np.asarray(pairs, dtype=np.int64)
    n = int(pairs.max()) + 1
    return InteractionCounts(n=n, pairs=pairs, counts=np.asarray(counts, dtype=np.int64))


def read_distance_graph(path):
    """Read a distance-graph file: lines ``i j d`` with positive ``d``."""
    edges, weights = [], []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            tok = ln.split()
            if len(tok) != 3:
                raise ValueError(f"{path}: malformed graph line {ln!r}")
            i, j, d = int(tok[0]), int(tok[1]), float(tok[2])
            if i == j:
                raise ValueError(f"{path}: self-loop at vertex {i}")
            if not d > 0 or not np.isfinite(d):
                raise ValueError(f"{path}: edge weight must be positive in line {ln!r}")
            edges.append((min(i, j), max(i, j)))
            weights.append(d)
    if not edges:
        raise ValueError(f"{path}: empty graph file")
    edges = np.asarray(edges, dtype=np.int64)
    n = int(edges.max()) + 1
    return PartialDistanceGraph(n=n, edges=edges, weights=np.asarray(weights))
