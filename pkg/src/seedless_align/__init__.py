"""Seedless network alignment from eigenvector-centrality seeds and bootstrap percolation."""

from .alignment import (
    ExpandTrace,
    Matching,
    RunStats,
    ScoreTable,
    estimate_seeds,
    loose_expand,
    safe_expand,
    spectre,
    spread,
)
from .centrality import CentralityRanking, eigenvector_centrality, top_k
from .datagen import CorrelatedPair, GenerationError, common_core, make_correlated_pair, subsample_edges
from .graph import (
    Graph,
    GraphError,
    NodeLabelMap,
    induced_subgraph,
    largest_connected_component,
    pair_neighbors,
    parse_edge_list,
)
from .metrics import GroundTruth, MetricReport, edge_correctness, edge_similarity, evaluate, ics_score, precision, recall

__version__ = "0.1.0"
