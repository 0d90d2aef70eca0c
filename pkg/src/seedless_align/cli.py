"""Command-line interface: ``generate``, ``align``, ``evaluate``, ``sweep``, ``centrality``.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .alignment import spectre
from .centrality import DEFAULT_MAX_ITERS, DEFAULT_TOL, eigenvector_centrality, format_centrality_csv
from .datagen import GenerationError, make_correlated_pair
from .datasets import STANDINS, load_standin
from .graph import Graph, GraphError, NodeLabelMap, induced_subgraph, is_connected, largest_connected_component
from .io import PAIR_FILES, FormatError, parse_pairs, read_edge_list, write_correlated_pair
from .metrics import GroundTruth, evaluate

logger = logging.getLogger("seedless_align")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

SWEEP_COLUMNS = (
    "dataset", "s", "k", "w", "r", "seed",
    "precision", "recall", "ec", "ics", "matching_size", "runtime_ms",
    "similarity", "error",
)
ALIGN_FILES = ("matching.tsv", "run_stats.json", "metrics.json")


class UsageError(Exception):
    """Bad input files or parameters (exit code 2)."""


@dataclass(frozen=True)
class LoadedGraph:
    graph: Graph
    labels: NodeLabelMap
    # labels of the file as read, before any component cut
    all_labels: NodeLabelMap
    name: str


def load_graph(source: str, *, lcc: bool = True) -> LoadedGraph:
    """Read an edge list, or a bundled stand-in by name when no such file exists.

    Disconnected graphs are cut to their largest component with a notice.
    """
    path = Path(source)
    if not path.is_file() and source in STANDINS:
        parsed = load_standin(source)
        name = source
    else:
        try:
            parsed = read_edge_list(path)
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc.strerror or exc}") from None
        except GraphError as exc:
            raise UsageError(f"{source}: {exc}") from None
        name = path.stem
    g, labels = parsed.graph, parsed.labels
    if g.node_count == 0:
        raise UsageError(f"{source}: graph has no edges")
    if lcc and not is_connected(g):
        keep = largest_connected_component(g)
        logger.warning(
            "%s is disconnected; aligning its largest component (%d of %d nodes)", source, len(keep), g.node_count
        )
        g, _ = induced_subgraph(g, keep)
        labels = parsed.labels.restrict(keep)
    return LoadedGraph(g, labels, parsed.labels, name)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_pairs(path: str, a: LoadedGraph, b: LoadedGraph) -> list[tuple[int, int]]:
    """Pairs in ``path`` as ids of ``a`` and ``b``.

    Labels must exist in the files as read; pairs touching nodes cut away with
    a minor component are dropped.
    """
    text = _read_text(path)
    try:
        parse_pairs(text, a.all_labels, b.all_labels, strict=True)
    except FormatError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return parse_pairs(text, a.labels, b.labels, strict=False)


def load_ground_truth(path: str, a: LoadedGraph, b: LoadedGraph) -> GroundTruth:
    try:
        return GroundTruth(load_pairs(path, a, b))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _pairs_tsv(pairs, l1: NodeLabelMap, l2: NodeLabelMap) -> str:
    return "".join(f"{l1.label_of(i)}\t{l2.label_of(j)}\n" for i, j in pairs)


def _align_kwargs(args) -> dict:
    return dict(
        w=args.w, r=args.r, f=args.f, max_rounds=args.max_rounds, tol=args.tol, max_iters=args.max_power_iters
    )


def _run_spectre(g1: Graph, g2: Graph, k, seed: int, kw: dict):
    try:
        return spectre(g1, g2, k=k, rng=seed, **kw)
    except ValueError as exc:
        # parameter outside what the graphs allow, e.g. k + w > n
        if isinstance(exc, GraphError):
            raise
        raise UsageError(str(exc)) from None


def cmd_generate(args) -> int:
    src = load_graph(args.graph)
    pair = make_correlated_pair(src.graph, args.dropout, args.seed, source=src.name)
    for path in write_correlated_pair(args.out, pair):
        logger.info("wrote %s", path)
    print(json.dumps(pair.params(), indent=2))
    return EXIT_OK


def cmd_align(args) -> int:
    a = load_graph(args.graph1)
    b = load_graph(args.graph2)
    gt = load_ground_truth(args.ground_truth, a, b) if args.ground_truth else None
    m, stats = _run_spectre(a.graph, b.graph, args.k, args.seed, _align_kwargs(args))
    if not stats.centrality_converged:
        logger.warning("eigenvector centrality hit --max-power-iters before --tol")
    outputs = {
        "matching.tsv": _pairs_tsv(sorted(m.pairs), a.labels, b.labels),
        "run_stats.json": stats.to_json() + "\n",
    }
    report = None
    if gt is not None:
        report = evaluate(a.graph, b.graph, m, gt)
        outputs["metrics.json"] = report.to_json() + "\n"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (out / name).write_text(text, encoding="utf-8")
    summary = {"matching_size": len(m), "rounds": len(stats.rounds), "total_ms": round(stats.total_ms, 3)}
    if report is not None:
        summary.update(precision=report.precision, recall=report.recall)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    a = load_graph(args.graph1, lcc=False)
    b = load_graph(args.graph2, lcc=False)
    pairs = load_pairs(args.matching, a, b)
    if len({i for i, _ in pairs}) != len(pairs) or len({j for _, j in pairs}) != len(pairs):
        raise UsageError(f"{args.matching}: matching reuses a node")
    gt = load_ground_truth(args.ground_truth, a, b) if args.ground_truth else None
    text = evaluate(a.graph, b.graph, pairs, gt).to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_centrality(args) -> int:
    a = load_graph(args.graph)
    ranking = eigenvector_centrality(a.graph, args.tol, args.max_power_iters)
    if not ranking.converged:
        logger.warning("eigenvector centrality hit --max-power-iters before --tol")
    text = format_centrality_csv(ranking, a.labels)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---- sweep ---------------------------------------------------------------


def trial_seeds(master: int, trials: int) -> list[int]:
    """One 32-bit seed per trial, derived from the master seed.

    A row's seed drives both the pair generation and the alignment, so
    ``generate --seed X`` followed by ``align --seed X`` reproduces it.
    """
    return [int(ss.generate_state(1)[0]) for ss in np.random.SeedSequence(master).spawn(trials)]


@lru_cache(maxsize=4)
def _cached_graph(source: str) -> LoadedGraph:
    return load_graph(source)


@lru_cache(maxsize=8)
def _cached_pair(source: str, s: float, seed: int):
    return make_correlated_pair(_cached_graph(source).graph, s, seed, source=_cached_graph(source).name)


@lru_cache(maxsize=8)
def _cached_rankings(key: tuple, tol: float, max_iters: int):
    g1, g2 = _cell_graphs(*key)[:2]
    return eigenvector_centrality(g1, tol, max_iters), eigenvector_centrality(g2, tol, max_iters)


def _cell_graphs(source: str, source2: str | None, s: float | None, seed: int):
    if source2 is not None:
        return _cached_graph(source).graph, _cached_graph(source2).graph, None, None
    pair = _cached_pair(source, s, seed)
    return pair.g1, pair.g2, pair.ground_truth, pair.realized_similarity


@dataclass(frozen=True)
class SweepCell:
    source: str
    source2: str | None
    dataset: str
    s: float | None
    k: int | None
    w: int
    seed: int
    r: int
    f: float
    max_rounds: int
    tol: float
    max_iters: int


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(round(x, 10))
    return str(x)


def run_cell(cell: SweepCell) -> dict:
    """One sweep row; failures land in the ``error`` column."""
    row = dict.fromkeys(SWEEP_COLUMNS)
    row.update(dataset=cell.dataset, s=cell.s, k=cell.k, w=cell.w, r=cell.r, seed=cell.seed)
    try:
        key = (cell.source, cell.source2, cell.s, cell.seed)
        g1, g2, gt, sim = _cell_graphs(*key)
        row["similarity"] = sim
        rankings = _cached_rankings(key, cell.tol, cell.max_iters)
        m, stats = spectre(
            g1, g2, k=cell.k, w=cell.w, r=cell.r, f=cell.f, max_rounds=cell.max_rounds,
            rng=cell.seed, rankings=rankings,
        )
        rep = evaluate(g1, g2, m, gt)
        row.update(
            k=stats.k, precision=rep.precision, recall=rep.recall, ec=rep.edge_correctness, ics=rep.ics,
            matching_size=rep.matching_size, runtime_ms=round(stats.total_ms, 3),
        )
    except (GenerationError, UsageError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return {c: _fmt(row[c]) for c in SWEEP_COLUMNS}


def sweep_cells(args) -> list[SweepCell]:
    a = _cached_graph(args.graph)
    if args.graph2:
        _cached_graph(args.graph2)
        dataset = f"{a.name}~{Path(args.graph2).stem}"
        s_grid: list = [None]
    else:
        dataset, s_grid = a.name, args.dropout
    seeds = trial_seeds(args.seed, args.trials)
    return [
        SweepCell(
            args.graph, args.graph2, dataset, s, k, w, seed,
            args.r, args.f, args.max_rounds, args.tol, args.max_power_iters,
        )
        for s in s_grid
        for seed in seeds
        for k in args.k
        for w in args.w
    ]


def format_sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cells = sweep_cells(args)
    t0 = time.perf_counter()
    jobs = args.jobs or os.cpu_count() or 1
    if jobs == 1 or len(cells) == 1:
        rows = [run_cell(c) for c in cells]
    else:
        # cells sharing a pair are adjacent, so chunks keep the per-process cache warm
        chunk = max(1, len(args.k) * len(args.w))
        with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
            rows = list(pool.map(run_cell, cells, chunksize=chunk))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_sweep_csv(rows), encoding="utf-8")
    failed = sum(1 for r in rows if r["error"])
    logger.info("%d rows (%d failed) in %.1fs -> %s", len(rows), failed, time.perf_counter() - t0, out)
    return EXIT_OK


# ---- argument parsing ----------------------------------------------------


def _bounded(kind, lo=None, hi=None, lo_open=False, hi_open=False):
    def parse(text: str):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}") from None
        if lo is not None and (x < lo or (lo_open and x == lo)):
            raise argparse.ArgumentTypeError(f"{text} is out of range")
        if hi is not None and (x > hi or (hi_open and x == hi)):
            raise argparse.ArgumentTypeError(f"{text} is out of range")
        return x

    return parse


count = _bounded(int, lo=0)
positive = _bounded(int, lo=1)
dropout = _bounded(float, lo=0.0, hi=1.0, hi_open=True)


def _add_centrality_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=_bounded(float, lo=0.0, lo_open=True), default=DEFAULT_TOL,
                   help="power-iteration tolerance (default %(default)g)")
    p.add_argument("--max-power-iters", type=positive, default=DEFAULT_MAX_ITERS,
                   help="power-iteration cap (default %(default)d)")


def _add_align_flags(p: argparse.ArgumentParser, grids: bool = False) -> None:
    if grids:
        p.add_argument("--k", type=count, nargs="+", default=[None],
                       help="seed-band sizes (default ceil(10 ln n))")
        p.add_argument("--w", type=count, nargs="+", default=[1], help="window half-widths (default 1)")
    else:
        p.add_argument("--k", type=count, default=None, help="seed-band size (default ceil(10 ln n))")
        p.add_argument("--w", type=count, default=1, help="window half-width (default 1)")
    p.add_argument("--r", type=_bounded(int, lo=2), default=4, help="safe-expansion threshold (default 4)")
    p.add_argument("--f", type=_bounded(float, lo=0.0), default=0.75,
                   help="target matched fraction of the smaller graph (default 0.75)")
    p.add_argument("--max-rounds", type=positive, default=5, help="round cap (default 5)")
    p.add_argument("--seed", type=count, default=0, help="rng seed (default 0)")
    _add_centrality_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seedless-align", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a correlated pair with ground truth")
    p.add_argument("graph", help="edge list, or the name of a bundled stand-in")
    p.add_argument("--dropout", "-s", type=dropout, required=True, help="edge dropout probability s")
    p.add_argument("--seed", type=count, default=0, help="rng seed (default 0)")
    p.add_argument("--out", required=True, help=f"output directory ({', '.join(PAIR_FILES)})")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("align", help="align two graphs")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--ground-truth", help="TSV of true pairs; adds metrics.json")
    p.add_argument("--out", required=True, help=f"output directory ({', '.join(ALIGN_FILES)})")
    _add_align_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("evaluate", help="score a matching")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("matching", help="TSV of matched label pairs")
    p.add_argument("--ground-truth", help="TSV of true pairs; adds precision and recall")
    p.add_argument("--out", help="JSON report path (default stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid of generate + align + evaluate runs, one CSV row each")
    p.add_argument("graph", help="edge list, or the name of a bundled stand-in")
    p.add_argument("--graph2", help="align graph against this graph instead of generated copies")
    p.add_argument("--dropout", "-s", type=dropout, nargs="+", default=[0.0], help="dropout grid (default 0)")
    p.add_argument("--trials", type=positive, default=1, help="trials per cell (default 1)")
    p.add_argument("--jobs", type=count, default=0, help="worker processes (default: all cores)")
    p.add_argument("--out", required=True, help="CSV path")
    _add_align_flags(p, grids=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("centrality", help="dump eigenvector centrality as label,score,rank")
    p.add_argument("graph")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_centrality_flags(p)
    p.set_defaults(func=cmd_centrality)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s"
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        logger.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
