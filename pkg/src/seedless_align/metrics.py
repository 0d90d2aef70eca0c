"""Alignment quality: precision and recall against ground truth, EC and ICS from topology.

Undefined values (zero denominators) are ``None``, never 0.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping

from .graph import Graph

Pairs = Iterable[tuple[int, int]]


class GroundTruth(dict):
    """Injective map from first-graph ids to second-graph ids."""

    def __init__(self, mapping: Mapping[int, int] | Pairs = ()):
        super().__init__(mapping)
        if len(set(self.values())) != len(self):
            raise ValueError("ground truth is not injective")

    @classmethod
    def from_sequence(cls, perm) -> GroundTruth:
        return cls({i: int(j) for i, j in enumerate(perm)})

    def inverse(self) -> GroundTruth:
        return GroundTruth({j: i for i, j in self.items()})


def _pairs(m) -> list[tuple[int, int]]:
    return list(m.by_left.items()) if hasattr(m, "by_left") else list(m)


def correct_count(m, gt: Mapping[int, int]) -> int:
    return sum(1 for i, j in _pairs(m) if i in gt and gt[i] == j)


def precision(m, gt: Mapping[int, int]) -> float | None:
    pairs = _pairs(m)
    if not pairs:
        return None
    return correct_count(pairs, gt) / len(pairs)


def recall_denominator(gt: Mapping[int, int], g1: Graph, g2: Graph) -> int:
    d1, d2 = g1.degrees, g2.degrees
    return sum(1 for i, j in gt.items() if d1[i] >= 2 and d2[j] >= 2)


def recall(m, gt: Mapping[int, int], g1: Graph, g2: Graph) -> float | None:
    """Correct pairs over ground-truth nodes with degree at least 2 in both graphs."""
    denom = recall_denominator(gt, g1, g2)
    if denom == 0:
        return None
    return correct_count(m, gt) / denom


def conserved_edges(g1: Graph, g2: Graph, m) -> int:
    """Edges of ``g1`` with both ends matched whose image is an edge of ``g2``."""
    f = dict(_pairs(m))
    nbr2 = g2.neighbor_sets
    count = 0
    for a, b in g1.edges():
        fa = f.get(a)
        if fa is None:
            continue
        fb = f.get(b)
        if fb is not None and fb in nbr2[fa]:
            count += 1
    return count


def induced_edges(g2: Graph, image: Iterable[int]) -> int:
    """Edges of ``g2`` with both ends in ``image``."""
    img = set(image)
    adj = g2.adjacency
    return sum(1 for u in img for v in adj[u] if v > u and v in img)


def edge_correctness(g1: Graph, g2: Graph, m) -> float | None:
    if g1.edge_count == 0:
        return None
    return conserved_edges(g1, g2, m) / g1.edge_count


def ics_score(g1: Graph, g2: Graph, m) -> float | None:
    pairs = _pairs(m)
    denom = induced_edges(g2, (j for _, j in pairs))
    if denom == 0:
        return None
    return conserved_edges(g1, g2, pairs) / denom


def edge_similarity(g1: Graph, g2: Graph) -> float | None:
    """``2 |E1 & E2| / (|E1| + |E2|)`` for graphs over the same node ids."""
    total = g1.edge_count + g2.edge_count
    if total == 0:
        return None
    small, big = (g1, g2) if g1.edge_count <= g2.edge_count else (g2, g1)
    common = sum(1 for u, v in small.edges() if big.has_edge(u, v))
    return 2 * common / total


def mapped_similarity(g1: Graph, g2: Graph, gt: Mapping[int, int]) -> float | None:
    """:func:`edge_similarity` with ``g1`` carried onto ``g2`` by ``gt``.

    Edges with an endpoint outside ``gt`` count as not shared.
    """
    total = g1.edge_count + g2.edge_count
    if total == 0:
        return None
    return 2 * conserved_edges(g1, g2, gt.items()) / total


@dataclass
class MetricReport:
    matching_size: int
    precision: float | None = None
    recall: float | None = None
    edge_correctness: float | None = None
    ics: float | None = None
    correct_pairs: int | None = None
    recall_denominator: int | None = None
    conserved_edges: int = 0
    g1_edges: int = 0
    induced_edges: int = 0
    similarity: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def evaluate(g1: Graph, g2: Graph, m, gt: Mapping[int, int] | None = None) -> MetricReport:
    """All metrics in one pass.

    Precision, recall and the edge similarity of the two graphs under the
    ground-truth identification are only filled in when ``gt`` is given.
    """
    pairs = _pairs(m)
    conserved = conserved_edges(g1, g2, pairs)
    induced = induced_edges(g2, (j for _, j in pairs))
    rep = MetricReport(
        matching_size=len(pairs),
        edge_correctness=conserved / g1.edge_count if g1.edge_count else None,
        ics=conserved / induced if induced else None,
        conserved_edges=conserved,
        g1_edges=g1.edge_count,
        induced_edges=induced,
    )
    if gt is not None:
        rep.correct_pairs = correct_count(pairs, gt)
        rep.recall_denominator = recall_denominator(gt, g1, g2)
        rep.precision = rep.correct_pairs / len(pairs) if pairs else None
        rep.recall = rep.correct_pairs / rep.recall_denominator if rep.recall_denominator else None
        rep.similarity = mapped_similarity(g1, g2, gt)
    return rep
