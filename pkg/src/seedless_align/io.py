"""Readers and writers for the on-disk formats.

* edge lists: ``<label> <label>`` per line, ``#``/``%`` comments
* node sets: one label per line
* matchings and ground truth: ``<label_g1>\\t<label_g2>`` per line
* correlated pairs: ``g1.edges``, ``g2.edges``, ``ground_truth.tsv`` and ``pair.json``
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .datagen import CorrelatedPair
from .graph import COMMENT_PREFIXES, GraphError, NodeLabelMap, ParsedEdgeList, format_edge_list, parse_edge_list

PAIR_FILES = ("g1.edges", "g2.edges", "ground_truth.tsv", "pair.json")


class FormatError(GraphError):
    pass


def read_edge_list(path) -> ParsedEdgeList:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def write_edge_list(path, g, labels: NodeLabelMap | None = None) -> None:
    Path(path).write_text(format_edge_list(g, labels), encoding="utf-8")


def _data_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s and not s.startswith(COMMENT_PREFIXES):
            yield lineno, s.split()


def read_node_set(path, labels: NodeLabelMap) -> list[int]:
    out = []
    for lineno, tokens in _data_lines(Path(path).read_text(encoding="utf-8")):
        if len(tokens) != 1:
            raise FormatError(f"{path}:{lineno}: expected one label")
        out.append(labels.id_of(tokens[0]))
    return sorted(set(out))


def format_pairs(pairs: Iterable[tuple[int, int]], labels1: NodeLabelMap, labels2: NodeLabelMap) -> str:
    return "".join(f"{labels1.label_of(i)}\t{labels2.label_of(j)}\n" for i, j in pairs)


def parse_pairs(text: str, labels1: NodeLabelMap, labels2: NodeLabelMap, *, strict: bool = True) -> list[tuple[int, int]]:
    """Pairs of ids from ``label1<TAB>label2`` lines.

    Unknown labels raise :class:`FormatError` unless ``strict`` is false, in
    which case such lines are skipped.
    """
    out = []
    for lineno, tokens in _data_lines(text):
        if len(tokens) != 2:
            raise FormatError(f"line {lineno}: expected two labels")
        a, b = tokens
        if a not in labels1.forward or b not in labels2.forward:
            if strict:
                raise FormatError(f"line {lineno}: unknown label in {a!r} {b!r}")
            continue
        out.append((labels1.forward[a], labels2.forward[b]))
    return out


def write_pairs(path, pairs, labels1: NodeLabelMap, labels2: NodeLabelMap) -> None:
    Path(path).write_text(format_pairs(pairs, labels1, labels2), encoding="utf-8")


def read_pairs(path, labels1: NodeLabelMap, labels2: NodeLabelMap, *, strict: bool = True):
    return parse_pairs(Path(path).read_text(encoding="utf-8"), labels1, labels2, strict=strict)


def write_correlated_pair(out_dir, pair: CorrelatedPair) -> list[Path]:
    """Write the four pair files; node labels are the integer ids."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    l1 = NodeLabelMap.identity(pair.g1.node_count)
    l2 = NodeLabelMap.identity(pair.g2.node_count)
    paths = [out / name for name in PAIR_FILES]
    write_edge_list(paths[0], pair.g1, l1)
    write_edge_list(paths[1], pair.g2, l2)
    write_pairs(paths[2], sorted(pair.ground_truth.items()), l1, l2)
    paths[3].write_text(json.dumps(pair.params(), indent=2) + "\n", encoding="utf-8")
    return paths
