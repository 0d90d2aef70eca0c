"""Bundled benchmark graphs.

The public benchmark networks (adjnoun, USAir97, yeast, polblogs, the
HitPredict PPI networks) cannot be shipped here. The package bundles
synthetic stand-ins with the same node count, edge count and maximum degree
instead, generated by :func:`standin_graph`: heavy-tailed Chung-Lu edges
plus triadic closure, cut to the largest component.

Real copies are picked up from the directory named by the
``SEEDLESS_ALIGN_DATA`` environment variable (see :data:`REAL_FILES`).
"""

from __future__ import annotations

import bisect
import os
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import accumulate
from pathlib import Path

from .graph import Graph, NodeLabelMap, ParsedEdgeList, induced_subgraph, largest_connected_component, parse_edge_list

DATA_ENV = "SEEDLESS_ALIGN_DATA"


@dataclass(frozen=True)
class StandinSpec:
    nodes: int
    edges: int
    max_degree: int
    closure: float = 0.3
    seed: int = 0


# sizes from the published benchmark table
STANDINS: dict[str, StandinSpec] = {
    "adjnoun_like": StandinSpec(112, 425, 49, seed=11),
    "usair_like": StandinSpec(332, 2126, 139, seed=12),
    "yeast_like": StandinSpec(2284, 6646, 64, seed=13),
    "polblogs_like": StandinSpec(1224, 19087, 468, seed=14),
}

# ladder used for runtime scaling, in the published order
LADDER = ("adjnoun_like", "usair_like", "yeast_like", "polblogs_like")

REAL_FILES: dict[str, str] = {
    "adjnoun": "adjnoun.edges",
    "usair": "usair97.edges",
    "yeast": "yeast.edges",
    "polblogs": "polblogs.edges",
    "cjejuni": "cjejuni.edges",
    "ecoli": "ecoli.edges",
}


def _weight_exponent(n: int, edges: int, max_degree: int) -> float:
    # expected degree of node i under endpoint sampling is 2m w_i / W with w_i = (i+1)^-a
    target = max_degree / (2 * edges)
    lo, hi = 0.0, 3.0
    for _ in range(60):
        a = (lo + hi) / 2
        share = 1.0 / sum((i + 1) ** -a for i in range(n))
        if share < target:
            lo = a
        else:
            hi = a
    return (lo + hi) / 2


def standin_graph(nodes: int, edges: int, max_degree: int, closure: float = 0.3, seed: int = 0) -> Graph:
    """Connected heavy-tailed graph with roughly the requested size.

    ``(1 - closure) * edges`` edges join endpoints drawn with power-law
    weights tuned so the top node's expected degree is ``max_degree``; the
    rest close random open triangles. Only the largest component is kept;
    the raw size is inflated by what the cut removed, a few times over, so
    the result lands close to the request.
    """
    n_raw, m_raw = nodes, edges
    g = _standin_raw(n_raw, m_raw, max_degree, closure, seed)
    for _ in range(8):
        if g.node_count >= nodes:
            break
        n_raw += nodes - g.node_count
        m_raw += edges - g.edge_count
        g = _standin_raw(n_raw, m_raw, max_degree, closure, seed)
    return g


def _standin_raw(nodes: int, edges: int, max_degree: int, closure: float, seed: int) -> Graph:
    rng = random.Random(seed)
    n_random = round(edges * (1 - closure))
    a = _weight_exponent(nodes, n_random, max_degree)
    cum = list(accumulate((i + 1) ** -a for i in range(nodes)))
    total = cum[-1]
    perm = list(range(nodes))
    rng.shuffle(perm)
    nbrs: list[set[int]] = [set() for _ in range(nodes)]
    count = 0

    def draw() -> int:
        return perm[min(bisect.bisect_left(cum, rng.random() * total), nodes - 1)]

    while count < n_random:
        u, v = draw(), draw()
        if u != v and v not in nbrs[u]:
            nbrs[u].add(v)
            nbrs[v].add(u)
            count += 1
    stalls = 0
    while count < edges and stalls < 100 * edges:
        u = rng.randrange(nodes)
        if len(nbrs[u]) < 2:
            stalls += 1
            continue
        v, x = rng.sample(sorted(nbrs[u]), 2)
        if x in nbrs[v]:
            stalls += 1
            continue
        nbrs[v].add(x)
        nbrs[x].add(v)
        count += 1
    g = Graph([sorted(s) for s in nbrs])
    core, _ = induced_subgraph(g, largest_connected_component(g))
    return core


@lru_cache(maxsize=None)
def load_standin(name: str) -> ParsedEdgeList:
    """A bundled stand-in graph by name (see :data:`STANDINS`)."""
    if name not in STANDINS:
        raise KeyError(f"unknown stand-in {name!r}; choose from {sorted(STANDINS)}")
    text = resources.files(__package__).joinpath("data", f"{name}.edges").read_text(encoding="utf-8")
    return parse_edge_list(text)


def real_dataset_path(name: str) -> Path | None:
    """Path of a real benchmark graph if the data directory provides it."""
    root = os.environ.get(DATA_ENV)
    if not root:
        return None
    path = Path(root) / REAL_FILES[name]
    return path if path.is_file() else None


def write_standins(out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in STANDINS.items():
        g = standin_graph(spec.nodes, spec.edges, spec.max_degree, spec.closure, spec.seed)
        labels = NodeLabelMap.identity(g.node_count)
        body = "".join(f"{labels.backward[u]} {labels.backward[v]}\n" for u, v in g.edges())
        header = (
            f"# synthetic stand-in for a {spec.nodes}-node / {spec.edges}-edge benchmark graph\n"
            f"# generated by seedless_align.datasets.standin_graph(seed={spec.seed})\n"
        )
        (out / f"{name}.edges").write_text(header + body, encoding="utf-8")


if __name__ == "__main__":
    import sys

    write_standins(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data")
