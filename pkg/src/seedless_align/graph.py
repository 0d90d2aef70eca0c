"""Simple undirected graphs over dense integer ids.

Every algorithm in the package works on :class:`Graph` objects whose nodes
are ``0..n-1``. External labels (strings read from edge-list files) live in a
separate :class:`NodeLabelMap` and are only consulted when reading or writing
files.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

logger = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class GraphError(ValueError):
    """Invalid graph construction or query."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str):
        super().__init__(f"line {lineno}: expected two labels, got {line!r}")
        self.lineno = lineno


class Graph:
    """Immutable simple undirected graph.

    ``adjacency[i]`` is the sorted tuple of neighbours of node ``i``. Use
    :meth:`from_edges` to build one; the constructor trusts its input.
    """

    __slots__ = ("adjacency", "edge_count", "__dict__")

    def __init__(self, adjacency: Sequence[Sequence[int]]):
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(a) for a in adjacency)
        self.edge_count: int = sum(len(a) for a in self.adjacency) // 2

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> Graph:
        """Build a graph, collapsing duplicate edges.

        Self-loops and ids outside ``0..node_count-1`` raise :class:`GraphError`.
        """
        nbrs: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"edge ({u}, {v}) outside 0..{node_count - 1}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls([sorted(s) for s in nbrs])

    @classmethod
    def empty(cls, node_count: int = 0) -> Graph:
        return cls([()] * node_count)

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    def __len__(self) -> int:
        return len(self.adjacency)

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash(self.adjacency)

    def _check(self, i: int) -> None:
        if not 0 <= i < len(self.adjacency):
            raise GraphError(f"node {i} not in graph with {len(self.adjacency)} nodes")

    def neighbors(self, i: int) -> tuple[int, ...]:
        self._check(i)
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        self._check(i)
        return len(self.adjacency[i])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < len(self.adjacency) and v in self.neighbor_sets[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each edge once as ``(u, v)`` with ``u < v``, in lexicographic order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if v > u:
                    yield u, v

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges())

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Graph in which node ``i`` becomes ``perm[i]``; ``perm`` must be a permutation."""
        n = self.node_count
        if sorted(perm) != list(range(n)):
            raise GraphError("relabel requires a permutation of 0..n-1")
        new: list[list[int]] = [[] for _ in range(n)]
        for i, nbrs in enumerate(self.adjacency):
            new[perm[i]] = sorted(perm[v] for v in nbrs)
        return Graph(new)

    def validate(self) -> None:
        """Raise :class:`GraphError` unless the simple-graph invariants hold."""
        total = 0
        for i, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"adjacency of {i} is not sorted and duplicate free")
            for v in nbrs:
                if v == i:
                    raise GraphError(f"self-loop on node {i}")
                if not 0 <= v < self.node_count or i not in self.neighbor_sets[v]:
                    raise GraphError(f"asymmetric edge ({i}, {v})")
            total += len(nbrs)
        if total != 2 * self.edge_count:
            raise GraphError("edge_count inconsistent with adjacency")


@dataclass
class NodeLabelMap:
    """Bijection between external labels and dense ids ``0..n-1``."""

    backward: list = field(default_factory=list)
    forward: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.forward:
            self.forward = {lab: i for i, lab in enumerate(self.backward)}
        if len(self.forward) != len(self.backward):
            raise GraphError("duplicate labels")

    @classmethod
    def identity(cls, n: int) -> NodeLabelMap:
        return cls([str(i) for i in range(n)])

    def __len__(self) -> int:
        return len(self.backward)

    def id_of(self, label) -> int:
        try:
            return self.forward[label]
        except KeyError:
            raise GraphError(f"unknown node label {label!r}") from None

    def label_of(self, i: int):
        return self.backward[i]

    def restrict(self, ids: Sequence[int]) -> NodeLabelMap:
        """Labels for a subgraph whose node ``t`` was node ``ids[t]`` here."""
        return NodeLabelMap([self.backward[i] for i in ids])


class ParsedEdgeList(NamedTuple):
    graph: Graph
    labels: NodeLabelMap
    self_loops: int


def _label_sort_key(labels: Iterable[str]):
    labels = list(labels)
    try:
        keys = [int(x) for x in labels]
    except ValueError:
        return sorted(labels)
    return [lab for _, lab in sorted(zip(keys, labels))]


def parse_edge_list(text: str | Iterable[str]) -> ParsedEdgeList:
    """Parse a whitespace separated edge list.

    Lines starting with ``#`` or ``%`` and blank lines are skipped. Self-loop
    lines are dropped and counted. Labels get ids in numeric order when every
    label is an integer and in string order otherwise, so a graph written by
    :func:`format_edge_list` with integer labels reads back with the same ids.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    raw: list[tuple[str, str]] = []
    seen: set[str] = set()
    self_loops = 0
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIXES):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise EdgeListParseError(lineno, line.rstrip("\n"))
        a, b = tokens
        seen.add(a)
        seen.add(b)
        if a == b:
            self_loops += 1
            continue
        raw.append((a, b))
    if self_loops:
        logger.warning("dropped %d self-loop line(s)", self_loops)
    labels = NodeLabelMap(_label_sort_key(seen))
    fwd = labels.forward
    graph = Graph.from_edges(len(labels), ((fwd[a], fwd[b]) for a, b in raw))
    return ParsedEdgeList(graph, labels, self_loops)


def format_edge_list(g: Graph, labels: NodeLabelMap | None = None) -> str:
    """Inverse of :func:`parse_edge_list` for graphs without isolated nodes."""
    lab = labels.backward if labels is not None else range(g.node_count)
    return "".join(f"{lab[u]} {lab[v]}\n" for u, v in g.edges())


def pair_neighbors(g1: Graph, g2: Graph, pair: tuple[int, int]) -> Iterator[tuple[int, int]]:
    """Neighbours of ``pair`` in the product graph, ``N(i) x N(j)``."""
    i, j = pair
    return product(g1.neighbors(i), g2.neighbors(j))


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted node lists, ordered by their smallest node."""
    seen = bytearray(g.node_count)
    comps = []
    adj = g.adjacency
    for start in range(g.node_count):
        if seen[start]:
            continue
        seen[start] = 1
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    comp.append(v)
                    queue.append(v)
        comp.sort()
        comps.append(comp)
    return comps


def is_connected(g: Graph) -> bool:
    return g.node_count > 0 and len(connected_components(g)) == 1


def largest_connected_component(g: Graph) -> list[int]:
    """Sorted nodes of a largest component.

    Ties go to the component holding the smallest node id; an empty graph
    gives an empty list.
    """
    best: list[int] = []
    for comp in connected_components(g):
        if len(comp) > len(best):
            best = comp
    return best


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> tuple[Graph, NodeLabelMap]:
    """Subgraph on ``nodes``, relabelled by ascending original id.

    The returned map's labels are the original ids.
    """
    ids = sorted(set(nodes))
    for i in ids:
        g._check(i)
    new_id = {old: t for t, old in enumerate(ids)}
    adj = [[new_id[v] for v in g.adjacency[old] if v in new_id] for old in ids]
    return Graph(adj), NodeLabelMap(list(ids))
