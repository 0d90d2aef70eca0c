"""Correlated graph pairs with known ground truth.

Two independent edge subsamples of one source graph are cut down to a
common connected core and the second is relabelled by a random permutation.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .alignment import as_rng
from .graph import Graph, connected_components, induced_subgraph, largest_connected_component
from .metrics import GroundTruth, edge_similarity

logger = logging.getLogger(__name__)

MAX_RETRIES = 20


class GenerationError(RuntimeError):
    """The common core of two subsamples collapsed."""


@dataclass
class CorrelatedPair:
    g1: Graph
    g2: Graph
    ground_truth: GroundTruth
    s: float
    seed: int | None
    realized_similarity: float | None
    core_nodes: list[int] = field(default_factory=list)
    source: str = ""
    attempts: int = 1

    def params(self) -> dict:
        return {
            "source": self.source,
            "s": self.s,
            "seed": self.seed,
            "realized_similarity": self.realized_similarity,
            "nodes": self.g1.node_count,
            "g1_edges": self.g1.edge_count,
            "g2_edges": self.g2.edge_count,
            "attempts": self.attempts,
        }


def subsample_edges(g: Graph, s: float, rng: random.Random | int | None = None) -> Graph:
    """Keep each edge independently with probability ``1 - s``; nodes are kept."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    rng = as_rng(rng)
    keep = 1.0 - s
    rand = rng.random
    return Graph.from_edges(g.node_count, [e for e in g.edges() if rand() < keep])


def common_core(t1: Graph, t2: Graph) -> tuple[Graph, Graph, list[int]]:
    """Shrink two graphs on one node set to a common node set on which both are connected.

    Repeats: take each graph's largest component, restrict both graphs to
    the intersection. Returns the two induced graphs (ids renumbered
    consistently) and the surviving original ids.
    """
    if t1.node_count != t2.node_count:
        raise ValueError("graphs must share a node set")
    nodes = list(range(t1.node_count))
    g1, g2 = t1, t2
    while True:
        c1 = largest_connected_component(g1)
        c2 = set(largest_connected_component(g2))
        keep = [t for t in c1 if t in c2]
        if not keep:
            raise GenerationError("common core is empty")
        g1, _ = induced_subgraph(g1, keep)
        g2, _ = induced_subgraph(g2, keep)
        nodes = [nodes[t] for t in keep]
        if len(connected_components(g1)) == 1 and len(connected_components(g2)) == 1:
            return g1, g2, nodes


def make_correlated_pair(
    g: Graph,
    s: float,
    rng: random.Random | int | None = None,
    max_retries: int = MAX_RETRIES,
    source: str = "",
) -> CorrelatedPair:
    """Two correlated copies of ``g`` at edge dropout ``s``.

    The second graph is relabelled uniformly at random; ``ground_truth[i]``
    is the id in the second graph of node ``i`` of the first. The recorded
    similarity is measured on the common core before relabelling. A core
    with fewer than two nodes counts as a failed attempt; after
    ``max_retries`` attempts :class:`GenerationError` is raised.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError("s must lie in [0, 1)")
    seed = rng if isinstance(rng, int) else None
    rng = as_rng(rng)
    for attempt in range(1, max_retries + 1):
        t1 = subsample_edges(g, s, rng)
        t2 = subsample_edges(g, s, rng)
        try:
            g1, g2, nodes = common_core(t1, t2)
        except GenerationError:
            logger.info("attempt %d: empty common core", attempt)
            continue
        if len(nodes) < 2:
            logger.info("attempt %d: common core has %d node(s)", attempt, len(nodes))
            continue
        sim = edge_similarity(g1, g2)
        perm = list(range(g2.node_count))
        rng.shuffle(perm)
        return CorrelatedPair(
            g1=g1,
            g2=g2.relabel(perm),
            ground_truth=GroundTruth.from_sequence(perm),
            s=s,
            seed=seed,
            realized_similarity=sim,
            core_nodes=nodes,
            source=source,
            attempts=attempt,
        )
    raise GenerationError(f"no usable common core after {max_retries} attempts at s={s}")
