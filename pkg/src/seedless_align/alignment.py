"""Seedless alignment by centrality-ranked noisy seeds and percolation.

Pairs ``(i, j)`` pair node ``i`` of the first graph with node ``j`` of the
second. Internally a pair is packed into the integer ``i * n2 + j``.

Scores live either in a dense ``int32`` array over all ``n1 * n2`` pairs
(vectorised spreading, used while the product fits in :data:`DENSE_LIMIT`)
or in a dict holding only the pairs ever touched. Both backends index the
buckets in the same order, so a run is reproduced exactly whichever backend
serves it.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import asdict, dataclass, field
from heapq import heappop, heappush
from typing import Iterable, Iterator, Sequence

import numpy as np

from .centrality import DEFAULT_MAX_ITERS, DEFAULT_TOL, CentralityRanking, eigenvector_centrality
from .graph import Graph, GraphError, is_connected

Pair = tuple[int, int]
PairSet = list[Pair]

DENSE_LIMIT = 25_000_000
COMPACT_AFTER = 16


def as_rng(rng: random.Random | int | None) -> random.Random:
    if isinstance(rng, random.Random):
        return rng
    return random.Random(0 if rng is None else rng)


def _use_dense(g1: Graph, g2: Graph, dense: bool | None) -> bool:
    if dense is None:
        return g1.node_count * g2.node_count <= DENSE_LIMIT
    return dense


def _np_adjacency(g: Graph) -> list[np.ndarray]:
    return [np.asarray(a, dtype=np.int64) for a in g.adjacency]


class Matching:
    """Pairs in which every node of either graph occurs at most once.

    Iteration yields pairs in the order they were added.
    """

    __slots__ = ("by_left", "by_right")

    def __init__(self, pairs: Iterable[Pair] = ()):
        self.by_left: dict[int, int] = {}
        self.by_right: dict[int, int] = {}
        for i, j in pairs:
            self.add(i, j)

    def add(self, i: int, j: int) -> None:
        if i in self.by_left or j in self.by_right:
            raise ValueError(f"pair ({i}, {j}) reuses a matched node")
        self.by_left[i] = j
        self.by_right[j] = i

    def __len__(self) -> int:
        return len(self.by_left)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.by_left.items())

    def __contains__(self, pair) -> bool:
        i, j = pair
        return i in self.by_left and self.by_left[i] == j

    def __eq__(self, other) -> bool:
        return isinstance(other, Matching) and self.by_left == other.by_left

    def __repr__(self) -> str:
        return f"Matching({len(self)} pairs)"

    @property
    def pairs(self) -> PairSet:
        return list(self.by_left.items())

    def check(self) -> None:
        if len(self.by_left) != len(self.by_right):
            raise AssertionError("matching is not injective")
        for i, j in self.by_left.items():
            if self.by_right.get(j) != i:
                raise AssertionError(f"by_left/by_right disagree on ({i}, {j})")


class _SortedRuns:
    """Min-queue over batches that arrive already sorted by ``(priority, key)``."""

    __slots__ = ("heap", "size")

    def __init__(self):
        self.heap: list = []
        self.size = 0

    def __bool__(self) -> bool:
        return bool(self.heap)

    def __len__(self) -> int:
        return self.size

    def clear(self) -> None:
        self.heap = []
        self.size = 0

    def add_run(self, prios: list, keys: list) -> None:
        if keys:
            heappush(self.heap, (prios[0], keys[0], 0, prios, keys))
            self.size += len(keys)

    def push(self, prio: float, key: int) -> None:
        heappush(self.heap, (prio, key, 0, [prio], [key]))
        self.size += 1

    def peek_prio(self) -> float:
        return self.heap[0][0]

    def pop(self) -> tuple[float, int]:
        prio, key, pos, prios, keys = heappop(self.heap)
        self.size -= 1
        pos += 1
        if pos < len(keys):
            heappush(self.heap, (prios[pos], keys[pos], pos, prios, keys))
        return prio, key

    def keys(self) -> Iterator[int]:
        for _, _, pos, _, keys in self.heap:
            yield from keys[pos:]


class ScoreTable:
    """Pair scores with a bucket index for max-score selection.

    A pair is indexed in the bucket of each score it reaches at or above
    ``min_level``. Entries go stale when the score moves on or a node of the
    pair is blocked (matched), and are dropped when a selection meets them.

    With ``left_key``/``right_key`` given, the top-score pair with the
    smallest ``|left_key[i] - right_key[j]|`` is selected (exact ties drawn
    at random); otherwise the choice is uniform over the top-score pairs.

    ``dense=None`` picks the dense backend when ``n1 * n2 <= DENSE_LIMIT``.
    """

    def __init__(
        self,
        g1: Graph,
        g2: Graph,
        min_level: int = 1,
        left_key: Sequence[float] | None = None,
        right_key: Sequence[float] | None = None,
        dense: bool | None = None,
    ):
        if min_level < 1:
            raise ValueError("min_level must be at least 1")
        if (left_key is None) != (right_key is None):
            raise ValueError("left_key and right_key go together")
        self.g1 = g1
        self.g2 = g2
        self.n2 = max(g2.node_count, 1)
        self.min_level = min_level
        self.dense = _use_dense(g1, g2, dense)
        self.buckets: dict[int, list | _SortedRuns] = {}
        self._misses: dict[int, int] = {}
        self.top = 0
        self.left_blocked = bytearray(g1.node_count)
        self.right_blocked = bytearray(g2.node_count)
        self._keyed = left_key is not None
        if self._keyed:
            self._lk = np.asarray(left_key, dtype=float)
            self._rk = np.asarray(right_key, dtype=float)
            self._lk_list = self._lk.tolist()
            self._rk_list = self._rk.tolist()
        if self.dense:
            self.scores = np.zeros(g1.node_count * self.n2, dtype=np.int32)
            self._adj1 = _np_adjacency(g1)
            self._adj2 = _np_adjacency(g2)
            self._lb = np.frombuffer(self.left_blocked, dtype=bool) if g1.node_count else np.zeros(0, bool)
            self._rb = np.frombuffer(self.right_blocked, dtype=bool) if g2.node_count else np.zeros(0, bool)
        else:
            self.scores = {}

    def score(self, i: int, j: int) -> int:
        k = i * self.n2 + j
        if self.dense:
            return int(self.scores[k])
        return self.scores.get(k, 0)

    def total(self) -> int:
        if self.dense:
            return int(self.scores.sum(dtype=np.int64))
        return sum(self.scores.values())

    def items(self) -> Iterator[tuple[Pair, int]]:
        """``((i, j), score)`` for every pair with a positive score."""
        n2 = self.n2
        if self.dense:
            nz = np.flatnonzero(self.scores)
            for k, s in zip(nz.tolist(), self.scores[nz].tolist()):
                yield divmod(k, n2), s
        else:
            for k, s in self.scores.items():
                yield divmod(k, n2), s

    def block(self, i: int, j: int) -> None:
        """Mark ``i`` and ``j`` as matched; pairs using either stop being selectable."""
        self.left_blocked[i] = 1
        self.right_blocked[j] = 1

    def is_eligible(self, i: int, j: int) -> bool:
        return not self.left_blocked[i] and not self.right_blocked[j]

    def spread(self, i: int, j: int) -> None:
        """Add one to the score of every pair in ``N(i) x N(j)``."""
        nbr1 = self.g1.neighbors(i)
        nbr2 = self.g2.neighbors(j)
        if not nbr1 or not nbr2:
            return
        if self.dense:
            self._spread_dense(i, j)
        else:
            self._spread_sparse(nbr1, nbr2)

    def _spread_dense(self, i: int, j: int) -> None:
        a = self._adj1[i]
        b = self._adj2[j]
        keys = (a[:, None] * self.n2 + b[None, :]).ravel()
        sc = self.scores
        sc[keys] += 1
        vals = sc[keys]
        mask = vals >= self.min_level
        if not mask.any():
            return
        mask &= ~(self._lb[a][:, None] | self._rb[b][None, :]).ravel()
        if not mask.any():
            return
        keys = keys[mask]
        vals = vals[mask]
        hi = int(vals.max())
        lo = int(vals.min())
        if lo == hi:
            self._index(hi, keys)
        else:
            for level in range(lo, hi + 1):
                sel = keys[vals == level]
                if len(sel):
                    self._index(level, sel)

    def _spread_sparse(self, nbr1: Sequence[int], nbr2: Sequence[int]) -> None:
        scores = self.scores
        n2 = self.n2
        lvl = self.min_level
        lb = self.left_blocked
        rb = self.right_blocked
        fresh: dict[int, list[int]] = {}
        for u in nbr1:
            base = u * n2
            if lb[u]:
                for v in nbr2:
                    k = base + v
                    scores[k] = scores.get(k, 0) + 1
                continue
            for v in nbr2:
                k = base + v
                s = scores.get(k, 0) + 1
                scores[k] = s
                if s >= lvl and not rb[v]:
                    got = fresh.get(s)
                    if got is None:
                        fresh[s] = [k]
                    else:
                        got.append(k)
        for level in sorted(fresh):
            self._index(level, fresh[level])

    def _index(self, level: int, keys) -> None:
        """Add pairs that just reached ``level`` to its bucket (keys in row-major order)."""
        if level > self.top:
            self.top = level
        b = self.buckets.get(level)
        if not self._keyed:
            if b is None:
                self.buckets[level] = b = []
            b.extend(keys.tolist() if isinstance(keys, np.ndarray) else keys)
            return
        if b is None:
            self.buckets[level] = b = _SortedRuns()
        keys = np.asarray(keys, dtype=np.int64)
        u, v = np.divmod(keys, self.n2)
        prio = np.abs(self._lk[u] - self._rk[v])
        order = np.lexsort((keys, prio))
        b.add_run(prio[order].tolist(), keys[order].tolist())

    def _valid(self, k: int, level: int) -> bool:
        u, v = divmod(k, self.n2)
        return self.scores[k] == level and not self.left_blocked[u] and not self.right_blocked[v]

    def _valid_mask(self, keys: np.ndarray, level: int) -> np.ndarray:
        u, v = np.divmod(keys, self.n2)
        return (self.scores[keys] == level) & ~self._lb[u] & ~self._rb[v]

    def _compact(self, level: int) -> None:
        """Drop every stale entry of one bucket, keeping the order of the rest."""
        self._misses[level] = 0
        b = self.buckets[level]
        if isinstance(b, _SortedRuns):
            if not b.heap:
                return
            if self.dense:
                prios = np.concatenate([np.asarray(run[3][run[2]:]) for run in b.heap])
                keys = np.concatenate([np.asarray(run[4][run[2]:], dtype=np.int64) for run in b.heap])
                ok = self._valid_mask(keys, level)
                prios, keys = prios[ok], keys[ok]
                order = np.lexsort((keys, prios))
                prios, keys = prios[order].tolist(), keys[order].tolist()
            else:
                entries = sorted(e for run in b.heap for e in zip(run[3][run[2]:], run[4][run[2]:]))
                entries = [e for e in entries if self._valid(e[1], level)]
                prios = [e[0] for e in entries]
                keys = [e[1] for e in entries]
            b.clear()
            b.add_run(prios, keys)
        elif self.dense:
            arr = np.asarray(b, dtype=np.int64)
            b[:] = arr[self._valid_mask(arr, level)].tolist()
        else:
            b[:] = [k for k in b if self._valid(k, level)]

    def _miss(self, level: int, b) -> bool:
        """Count a stale hit; True when the bucket should be compacted now."""
        m = self._misses.get(level, 0) + 1
        self._misses[level] = m
        # vectorised compaction costs far less per entry than a Python-level discard
        return m >= COMPACT_AFTER and m >= len(b) // 32

    def pop_max(self, rng: random.Random) -> tuple[Pair, int] | None:
        """Remove and return a selectable top-score pair together with its score.

        Returns ``None`` when no unblocked pair has score ``>= min_level``.
        """
        buckets = self.buckets
        while self.top >= self.min_level:
            level = self.top
            b = buckets.get(level)
            if b:
                k = self._pop_keyed(b, level, rng) if self._keyed else self._pop_uniform(b, level, rng)
                if k is not None:
                    return divmod(k, self.n2), level
            buckets.pop(level, None)
            self._misses.pop(level, None)
            self.top -= 1
        return None

    def _pop_uniform(self, b: list, level: int, rng: random.Random) -> int | None:
        # rejection sampling is uniform over valid entries; a streak of stale
        # hits triggers a full compaction instead of more one-by-one discards
        while b:
            idx = rng.randrange(len(b))
            k = b[idx]
            b[idx] = b[-1]
            b.pop()
            if self._valid(k, level):
                return k
            if self._miss(level, b):
                self._compact(level)
        return None

    def _pop_keyed(self, b: _SortedRuns, level: int, rng: random.Random) -> int | None:
        while b:
            prio, k = b.pop()
            if not self._valid(k, level):
                if self._miss(level, b):
                    self._compact(level)
                continue
            ties = [k]
            while b and b.peek_prio() == prio:
                _, k2 = b.pop()
                if self._valid(k2, level):
                    ties.append(k2)
            if len(ties) == 1:
                return k
            ties.sort()
            pick = ties[rng.randrange(len(ties))]
            for other in ties:
                if other != pick:
                    b.push(prio, other)
            return pick
        return None

    def max_pairs(self) -> tuple[int, list[Pair]]:
        """Brute-force scan: the top selectable score and every pair holding it."""
        best, out = 0, []
        for (u, v), s in self.items():
            if s < self.min_level or not self.is_eligible(u, v):
                continue
            if s > best:
                best, out = s, [(u, v)]
            elif s == best:
                out.append((u, v))
        return best, sorted(out)

    def check_buckets(self) -> None:
        """Raise ``AssertionError`` unless every selectable pair sits in the bucket of its score."""
        indexed = {
            level: set(b.keys()) if isinstance(b, _SortedRuns) else set(b) for level, b in self.buckets.items()
        }
        for (u, v), s in self.items():
            if s >= self.min_level and self.is_eligible(u, v):
                if s > self.top:
                    raise AssertionError(f"pair {(u, v)} above top level {self.top}")
                if u * self.n2 + v not in indexed.get(s, ()):
                    raise AssertionError(f"pair {(u, v)} with score {s} missing from its bucket")


def spread(table: ScoreTable, pair: Pair) -> ScoreTable:
    table.spread(*pair)
    return table


class UsedSet:
    """Pairs that have already spread, as packed keys."""

    def __init__(self, n1: int, n2: int, dense: bool):
        self.n2 = max(n2, 1)
        self.dense = dense
        self._mask = np.zeros(n1 * self.n2, dtype=bool) if dense else None
        self._set: set[int] = set()

    def add(self, i: int, j: int) -> None:
        k = i * self.n2 + j
        if self.dense:
            self._mask[k] = True
        else:
            self._set.add(k)

    def __contains__(self, pair) -> bool:
        k = pair[0] * self.n2 + pair[1]
        return bool(self._mask[k]) if self.dense else k in self._set

    def __len__(self) -> int:
        return int(self._mask.sum()) if self.dense else len(self._set)

    def pairs(self) -> frozenset[Pair]:
        keys = np.flatnonzero(self._mask).tolist() if self.dense else self._set
        return frozenset(divmod(k, self.n2) for k in keys)


@dataclass
class ExpandTrace:
    """Optional record of an expansion, for inspection and tests.

    ``matched`` holds ``(i, j, score_at_match)``. Each ``rebuilds`` entry is
    ``(seed_pairs, matched_so_far, used_before)``.
    """

    matched: list[tuple[int, int, int]] = field(default_factory=list)
    rebuilds: list[tuple[PairSet, int, frozenset]] = field(default_factory=list)


def estimate_seeds(k: int, w: int, c1: CentralityRanking, c2: CentralityRanking) -> PairSet:
    """Noisy seed pairs from the two centrality rankings.

    The node at rank ``t`` of the first graph (``t < k``) is paired with the
    nodes at ranks ``t-w .. t+w`` of the second, clipped to the top ``k``.
    That gives ``(2w+1)k - w(w+1)`` pairs whenever ``w < k``.
    """
    if k < 0 or w < 0:
        raise ValueError("k and w must be non-negative")
    n = min(len(c1), len(c2))
    if k + w > n:
        raise ValueError(f"k + w = {k + w} exceeds the smaller graph ({n} nodes)")
    o1 = c1.order
    o2 = c2.order
    seeds: PairSet = []
    for t in range(k):
        i = int(o1[t])
        for t2 in range(max(0, t - w), min(k, t + w + 1)):
            seeds.append((i, int(o2[t2])))
    return seeds


def seed_count(k: int, w: int) -> int:
    return (2 * w + 1) * k - w * (w + 1)


def _dedupe(pairs: Iterable[Pair]) -> PairSet:
    return list(dict.fromkeys((int(i), int(j)) for i, j in pairs))


def safe_expand(
    g1: Graph,
    g2: Graph,
    seeds: Iterable[Pair],
    r: int = 4,
    rng: random.Random | int | None = None,
    trace: ExpandTrace | None = None,
    dense: bool | None = None,
) -> Matching:
    """Confident percolation from a noisy seed set.

    Every seed spreads once. Then, while some pair of unmatched nodes has a
    score of at least ``r``, one of the top-score pairs is drawn uniformly,
    matched, and spreads in turn.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    rng = as_rng(rng)
    table = ScoreTable(g1, g2, min_level=r, dense=dense)
    for i, j in _dedupe(seeds):
        table.spread(i, j)
    m = Matching()
    while (hit := table.pop_max(rng)) is not None:
        (i, j), s = hit
        m.add(i, j)
        table.block(i, j)
        if trace is not None:
            trace.matched.append((i, j, s))
        table.spread(i, j)
    return m


def _rebuild_dense(frontier: PairSet, table: ScoreTable, used: UsedSet) -> PairSet:
    lb, rb = table._lb, table._rb
    n2 = table.n2
    chunks = []
    for i, j in frontier:
        a = table._adj1[i]
        a = a[~lb[a]]
        if not len(a):
            continue
        b = table._adj2[j]
        b = b[~rb[b]]
        if not len(b):
            continue
        keys = (a[:, None] * n2 + b[None, :]).ravel()
        keys = keys[~used._mask[keys]]
        if len(keys):
            chunks.append(keys)
    if not chunks:
        return []
    allk = np.concatenate(chunks)
    _, first = np.unique(allk, return_index=True)
    keys = allk[np.sort(first)]
    return list(zip(*(x.tolist() for x in np.divmod(keys, n2))))


def _rebuild_sparse(frontier: PairSet, table: ScoreTable, used: UsedSet) -> PairSet:
    adj1, adj2 = table.g1.adjacency, table.g2.adjacency
    lb, rb = table.left_blocked, table.right_blocked
    n2 = table.n2
    seen = used._set
    fresh: dict[int, None] = {}
    for i, j in frontier:
        us = [u for u in adj1[i] if not lb[u]]
        if not us:
            continue
        vs = [v for v in adj2[j] if not rb[v]]
        for u in us:
            base = u * n2
            for v in vs:
                k = base + v
                if k not in seen:
                    fresh[k] = None
    return [divmod(k, n2) for k in fresh]


def loose_expand(
    g1: Graph,
    g2: Graph,
    seeds: Iterable[Pair],
    c1: CentralityRanking,
    c2: CentralityRanking,
    rng: random.Random | int | None = None,
    trace: ExpandTrace | None = None,
    dense: bool | None = None,
) -> Matching:
    """Relaxed percolation with seed-set rebuilding.

    Pairs need a score of two to be matched; among the top-score pairs the
    one whose centralities differ least wins (exact ties drawn from
    ``rng``). A pair spreads at most once over the whole call. When nothing
    is selectable the seed set is rebuilt from the unused product-graph
    neighbours of matched pairs whose nodes are both still free.
    """
    rng = as_rng(rng)
    table = ScoreTable(g1, g2, min_level=2, left_key=c1.scores, right_key=c2.scores, dense=dense)
    used = UsedSet(g1.node_count, g2.node_count, table.dense)
    rebuild = _rebuild_dense if table.dense else _rebuild_sparse
    m = Matching()
    frontier: PairSet = []
    seeds = _dedupe(seeds)
    while seeds:
        for i, j in seeds:
            table.spread(i, j)
            used.add(i, j)
        while (hit := table.pop_max(rng)) is not None:
            (i, j), s = hit
            m.add(i, j)
            table.block(i, j)
            frontier.append((i, j))
            if trace is not None:
                trace.matched.append((i, j, s))
            if (i, j) not in used:
                table.spread(i, j)
                used.add(i, j)
        # once a matched pair has fed one rebuild, all its candidates are used,
        # so only pairs matched since the last rebuild need scanning
        seeds = rebuild(frontier, table, used)
        frontier = []
        if trace is not None and seeds:
            trace.rebuilds.append((seeds, len(m), used.pairs()))
    return m


@dataclass
class RoundStats:
    round: int
    safe_size: int
    loose_size: int
    safe_ms: float
    loose_ms: float


@dataclass
class RunStats:
    k: int
    w: int
    r: int
    f: float
    max_rounds: int
    seed_pairs: int = 0
    centrality_ms: float = 0.0
    centrality_converged: bool = True
    rounds: list[RoundStats] = field(default_factory=list)
    total_ms: float = 0.0

    @property
    def final_size(self) -> int:
        return self.rounds[-1].loose_size if self.rounds else 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def default_k(n: int, w: int = 1) -> int:
    """``ceil(10 ln n)``, capped so that ``k + w <= n``."""
    k = math.ceil(10 * math.log(n)) if n > 1 else 1
    return max(0, min(k, n - w))


def spectre(
    g1: Graph,
    g2: Graph,
    k: int | None = None,
    w: int = 1,
    r: int = 4,
    f: float = 0.75,
    max_rounds: int = 5,
    rng: random.Random | int | None = None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    rankings: tuple[CentralityRanking, CentralityRanking] | None = None,
    dense: bool | None = None,
) -> tuple[Matching, RunStats]:
    """Align two connected graphs without seeds.

    Seeds come from :func:`estimate_seeds`. Each round runs
    :func:`safe_expand` on the current seed set and :func:`loose_expand` on
    its output, and the round's matching seeds the next round. Rounds repeat
    until the matching covers ``f`` times the smaller node count or
    ``max_rounds`` have run; the first round always runs.

    ``k`` defaults to :func:`default_k` of the smaller node count.
    """
    for name, g in (("first", g1), ("second", g2)):
        if not is_connected(g):
            raise GraphError(f"{name} graph is not connected; align its largest connected component")
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    if f < 0:
        raise ValueError("f must be non-negative")
    n = min(g1.node_count, g2.node_count)
    if k is None:
        k = default_k(n, w)
    rng = as_rng(rng)
    stats = RunStats(k=k, w=w, r=r, f=f, max_rounds=max_rounds)
    t_start = time.perf_counter()
    if rankings is None:
        c1 = eigenvector_centrality(g1, tol, max_iters)
        c2 = eigenvector_centrality(g2, tol, max_iters)
    else:
        c1, c2 = rankings
    stats.centrality_converged = c1.converged and c2.converged
    stats.centrality_ms = (time.perf_counter() - t_start) * 1e3
    seeds: PairSet = estimate_seeds(k, w, c1, c2)
    stats.seed_pairs = len(seeds)
    m = Matching()
    target = f * n
    while not stats.rounds or (len(m) < target and len(stats.rounds) < max_rounds):
        t0 = time.perf_counter()
        m0 = safe_expand(g1, g2, seeds, r, rng, dense=dense)
        t1 = time.perf_counter()
        m = loose_expand(g1, g2, m0.pairs, c1, c2, rng, dense=dense)
        t2 = time.perf_counter()
        seeds = m.pairs
        stats.rounds.append(
            RoundStats(len(stats.rounds) + 1, len(m0), len(m), (t1 - t0) * 1e3, (t2 - t1) * 1e3)
        )
    stats.total_ms = (time.perf_counter() - t_start) * 1e3
    return m, stats
