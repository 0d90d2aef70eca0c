"""Eigenvector centrality by power iteration and the node ranking built from it."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphError, NodeLabelMap, is_connected

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 1000


@dataclass(frozen=True)
class CentralityRanking:
    """Perron vector of a graph plus the descending order it induces.

    ``order[t]`` is the node at rank ``t`` (0-based); equal scores are ordered
    by ascending node id. ``rank_of`` is the inverse permutation.
    """

    scores: np.ndarray
    order: np.ndarray
    rank_of: np.ndarray
    iterations: int = 0
    converged: bool = True

    @classmethod
    def from_scores(cls, scores, iterations: int = 0, converged: bool = True) -> CentralityRanking:
        scores = np.asarray(scores, dtype=float)
        # lexsort: last key is primary
        order = np.lexsort((np.arange(len(scores)), -scores))
        rank_of = np.empty_like(order)
        rank_of[order] = np.arange(len(order))
        return cls(scores, order, rank_of, iterations, converged)

    def __len__(self) -> int:
        return len(self.scores)


def adjacency_matrix(g: Graph) -> sp.csr_matrix:
    indptr = np.zeros(g.node_count + 1, dtype=np.int64)
    np.cumsum(g.degrees, out=indptr[1:])
    indices = np.fromiter((v for nbrs in g.adjacency for v in nbrs), dtype=np.int64, count=int(indptr[-1]))
    data = np.ones(len(indices))
    return sp.csr_matrix((data, indices, indptr), shape=(g.node_count, g.node_count))


def eigenvector_centrality(
    g: Graph, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS
) -> CentralityRanking:
    """Eigenvector centrality of a connected graph.

    Power iteration on ``A + I`` from the uniform vector, renormalised to
    unit Euclidean norm every step. The shift leaves the Perron vector
    unchanged and stops bipartite graphs from oscillating. Iteration stops
    once successive iterates differ by less than ``tol`` in the max norm; if
    ``max_iters`` runs out first the ranking is returned with
    ``converged=False`` and a warning is logged.

    Raises
    ------
    GraphError
        If ``g`` is empty or disconnected.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not is_connected(g):
        raise GraphError("eigenvector centrality needs a connected graph; extract the largest component first")
    n = g.node_count
    shifted = adjacency_matrix(g) + sp.identity(n, format="csr")
    x = np.full(n, 1.0 / np.sqrt(n))
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        y = shifted @ x
        y /= np.linalg.norm(y)
        delta = np.max(np.abs(y - x))
        x = y
        if delta < tol:
            converged = True
            break
    if not converged:
        logger.warning("power iteration did not converge in %d iterations (last step %.3g)", max_iters, delta)
    np.maximum(x, 0.0, out=x)
    x /= np.linalg.norm(x)
    return CentralityRanking.from_scores(x, it, converged)


def top_k(ranking: CentralityRanking, k: int) -> list[int]:
    if not 0 <= k <= len(ranking):
        raise ValueError(f"k={k} outside 0..{len(ranking)}")
    return [int(i) for i in ranking.order[:k]]


def format_centrality_csv(ranking: CentralityRanking, labels: NodeLabelMap | None = None) -> str:
    """CSV dump ``label,score,rank`` in rank order (rank is 1-based)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "score", "rank"])
    for t, i in enumerate(ranking.order, 1):
        lab = labels.label_of(int(i)) if labels is not None else int(i)
        w.writerow([lab, repr(float(ranking.scores[i])), t])
    return buf.getvalue()
