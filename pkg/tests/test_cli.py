from __future__ import annotations

import csv
import json
import logging
import subprocess
import sys

import pytest

from seedless_align.alignment import spectre
from seedless_align.cli import ALIGN_FILES, SWEEP_COLUMNS, main, trial_seeds
from seedless_align.datagen import make_correlated_pair
from seedless_align.datasets import load_standin
from seedless_align.io import PAIR_FILES, read_edge_list, read_pairs
from seedless_align.metrics import evaluate

SRC = "adjnoun_like"


@pytest.fixture(autouse=True)
def _reset_logging():
    # main() configures the root logger once; keep runs independent
    yield
    for h in logging.root.handlers[:]:
        logging.root.removeHandler(h)


@pytest.fixture
def pair_dir(tmp_path):
    out = tmp_path / "pair"
    assert main(["generate", SRC, "--dropout", "0.05", "--seed", "4", "--out", str(out)]) == 0
    return out


def _align(pair_dir, out, *extra):
    return main([
        "align", str(pair_dir / "g1.edges"), str(pair_dir / "g2.edges"),
        "--ground-truth", str(pair_dir / "ground_truth.tsv"), "--out", str(out), *extra,
    ])


def check_matching_tsv(path, g1_labels, g2_labels):
    lefts, rights = [], []
    for line in path.read_text().splitlines():
        a, b = line.split("\t")
        assert a in g1_labels.forward and b in g2_labels.forward
        lefts.append(a)
        rights.append(b)
    assert len(set(lefts)) == len(lefts) and len(set(rights)) == len(rights)
    return len(lefts)


# ---- generate ------------------------------------------------------------


def test_generate_s0_gives_isomorphic_pair(tmp_path, capsys):
    out = tmp_path / "p"
    assert main(["generate", SRC, "-s", "0", "--seed", "1", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == sorted(PAIR_FILES)
    a, b = read_edge_list(out / "g1.edges"), read_edge_list(out / "g2.edges")
    gt = dict(read_pairs(out / "ground_truth.tsv", a.labels, b.labels))
    assert len(gt) == a.graph.node_count == b.graph.node_count
    assert sorted(gt.values()) == list(range(b.graph.node_count))
    mapped = {tuple(sorted((gt[u], gt[v]))) for u, v in a.graph.edges()}
    assert mapped == set(b.graph.edges())
    meta = json.loads((out / "pair.json").read_text())
    assert meta["realized_similarity"] == 1.0 and meta["s"] == 0.0 and meta["seed"] == 1
    assert json.loads(capsys.readouterr().out) == meta


def test_generate_failure_is_clean(tmp_path, capsys):
    edges = tmp_path / "sparse.edges"
    edges.write_text("".join(f"{2 * i} {2 * i + 1}\n" for i in range(10)))
    code = main(["generate", str(edges), "-s", "0.99", "--out", str(tmp_path / "o")])
    err = capsys.readouterr().err
    assert code == 1
    assert err.startswith("error:") and "Traceback" not in err


def test_similarity_sidecar_matches_evaluate(pair_dir, capsys):
    capsys.readouterr()
    gt = pair_dir / "ground_truth.tsv"
    assert main(["evaluate", str(pair_dir / "g1.edges"), str(pair_dir / "g2.edges"), str(gt),
                 "--ground-truth", str(gt)]) == 0
    rep = json.loads(capsys.readouterr().out)
    meta = json.loads((pair_dir / "pair.json").read_text())
    assert rep["similarity"] == meta["realized_similarity"]
    assert rep["precision"] == 1.0


# ---- align ---------------------------------------------------------------


def test_align_outputs_and_determinism(pair_dir, tmp_path):
    assert _align(pair_dir, tmp_path / "a", "--seed", "7") == 0
    assert _align(pair_dir, tmp_path / "b", "--seed", "7") == 0
    a, b = tmp_path / "a", tmp_path / "b"
    assert sorted(p.name for p in a.iterdir()) == sorted(ALIGN_FILES)
    assert (a / "matching.tsv").read_bytes() == (b / "matching.tsv").read_bytes()
    assert (a / "metrics.json").read_bytes() == (b / "metrics.json").read_bytes()

    g1, g2 = read_edge_list(pair_dir / "g1.edges"), read_edge_list(pair_dir / "g2.edges")
    size = check_matching_tsv(a / "matching.tsv", g1.labels, g2.labels)
    stats = json.loads((a / "run_stats.json").read_text())
    assert stats["rounds"][-1]["loose_size"] == size
    assert {"k", "w", "r", "f", "max_rounds", "seed_pairs", "rounds", "total_ms"} <= set(stats)

    # the CLI report equals the library report on the same inputs
    gt = dict(read_pairs(pair_dir / "ground_truth.tsv", g1.labels, g2.labels))
    m, _ = spectre(g1.graph, g2.graph, rng=7)
    lib = evaluate(g1.graph, g2.graph, m, gt).to_dict()
    assert json.loads((a / "metrics.json").read_text()) == lib


def test_align_without_ground_truth(pair_dir, tmp_path):
    out = tmp_path / "o"
    assert main(["align", str(pair_dir / "g1.edges"), str(pair_dir / "g2.edges"), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["matching.tsv", "run_stats.json"]


def test_align_missing_input(pair_dir, tmp_path, capsys):
    out = tmp_path / "never"
    code = main(["align", str(tmp_path / "missing.edges"), str(pair_dir / "g2.edges"), "--out", str(out)])
    assert code == 2
    assert not out.exists()
    assert "missing.edges" in capsys.readouterr().err


def test_align_bad_input_and_parameters(pair_dir, tmp_path):
    bad = tmp_path / "bad.edges"
    bad.write_text("1 2 3\n")
    g2 = str(pair_dir / "g2.edges")
    assert main(["align", str(bad), g2, "--out", str(tmp_path / "x")]) == 2
    assert main(["align", g2, g2, "--r", "1", "--out", str(tmp_path / "x")]) == 2
    assert main(["align", g2, g2, "--f", "-1", "--out", str(tmp_path / "x")]) == 2
    assert main(["align", g2, g2, "--k", "100000", "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_align_reduces_disconnected_input(tmp_path, caplog):
    g = tmp_path / "g.edges"
    # a 6-cycle with chords plus a stray edge
    g.write_text("a b\nb c\nc d\nd e\ne f\nf a\na d\nb e\nx y\n")
    with caplog.at_level(logging.WARNING):
        assert main(["align", str(g), str(g), "--out", str(tmp_path / "o")]) == 0
    assert "largest component" in caplog.text
    labels = {line.split("\t")[0] for line in (tmp_path / "o" / "matching.tsv").read_text().splitlines()}
    assert labels <= set("abcdef")


def test_align_rigid_s0_precision_one(tmp_path):
    out = tmp_path / "p"
    assert main(["generate", "usair_like", "-s", "0", "--seed", "2", "--out", str(out)]) == 0
    assert _align(out, tmp_path / "r", "--seed", "2") == 0
    rep = json.loads((tmp_path / "r" / "metrics.json").read_text())
    assert rep["precision"] >= 0.99


# ---- evaluate ------------------------------------------------------------


def test_evaluate_identity(tmp_path, capsys):
    g = tmp_path / "g.edges"
    g.write_text("a b\nb c\nc a\nc d\n")
    m = tmp_path / "m.tsv"
    m.write_text("a\ta\nb\tb\nc\tc\nd\td\n")
    out = tmp_path / "r.json"
    assert main(["evaluate", str(g), str(g), str(m), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["edge_correctness"] == 1.0 and rep["ics"] == 1.0 and rep["precision"] is None


def test_evaluate_rejects_unknown_labels(tmp_path, capsys):
    g = tmp_path / "g.edges"
    g.write_text("a b\nb c\n")
    m = tmp_path / "m.tsv"
    m.write_text("a\tz\n")
    assert main(["evaluate", str(g), str(g), str(m)]) == 2
    assert "unknown label" in capsys.readouterr().err
    m.write_text("a\ta\nb\ta\n")
    assert main(["evaluate", str(g), str(g), str(m)]) == 2


# ---- sweep ---------------------------------------------------------------


def _rows(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == SWEEP_COLUMNS
        return list(reader)


def _strip_timing(rows):
    return [{k: v for k, v in r.items() if k != "runtime_ms"} for r in rows]


def test_sweep_grid_and_determinism(tmp_path):
    args = ["sweep", SRC, "-s", "0.05", "0.1", "--k", "10", "20", "--w", "1", "2", "--trials", "2", "--seed", "3"]
    assert main([*args, "--jobs", "1", "--out", str(tmp_path / "a.csv")]) == 0
    assert main([*args, "--jobs", "3", "--out", str(tmp_path / "b.csv")]) == 0
    a, b = _rows(tmp_path / "a.csv"), _rows(tmp_path / "b.csv")
    assert len(a) == 2 * 2 * 2 * 2
    assert _strip_timing(a) == _strip_timing(b)
    for r in a:
        assert r["error"] == ""
        for col in ("precision", "recall", "ec", "ics"):
            assert 0.0 <= float(r[col]) <= 1.0
        assert int(r["matching_size"]) >= 0 and float(r["runtime_ms"]) > 0
    assert {r["seed"] for r in a} == {str(s) for s in trial_seeds(3, 2)}


def test_sweep_single_cell_equals_composed_commands(tmp_path):
    assert main(["sweep", SRC, "-s", "0.1", "--k", "15", "--w", "2", "--seed", "9", "--out",
                 str(tmp_path / "s.csv")]) == 0
    (row,) = _rows(tmp_path / "s.csv")
    seed = row["seed"]
    assert main(["generate", SRC, "-s", "0.1", "--seed", seed, "--out", str(tmp_path / "p")]) == 0
    assert _align(tmp_path / "p", tmp_path / "r", "--k", "15", "--w", "2", "--seed", seed) == 0
    rep = json.loads((tmp_path / "r" / "metrics.json").read_text())
    assert float(row["precision"]) == pytest.approx(rep["precision"], abs=1e-9)
    assert float(row["recall"]) == pytest.approx(rep["recall"], abs=1e-9)
    assert float(row["ec"]) == pytest.approx(rep["edge_correctness"], abs=1e-9)
    assert float(row["ics"]) == pytest.approx(rep["ics"], abs=1e-9)
    assert int(row["matching_size"]) == rep["matching_size"]
    meta = json.loads((tmp_path / "p" / "pair.json").read_text())
    assert float(row["similarity"]) == pytest.approx(meta["realized_similarity"], abs=1e-9)


def test_sweep_records_cell_errors(tmp_path):
    assert main(["sweep", SRC, "--k", "10", "5000", "--jobs", "1", "--out", str(tmp_path / "e.csv")]) == 0
    ok, bad = _rows(tmp_path / "e.csv")
    assert ok["error"] == "" and ok["precision"] != ""
    assert bad["error"].startswith("ValueError") and bad["precision"] == "" and bad["k"] == "5000"


def test_sweep_two_graph_mode(tmp_path):
    p = make_correlated_pair(load_standin(SRC).graph, 0.05, 1)
    from seedless_align.io import write_correlated_pair

    write_correlated_pair(tmp_path, p)
    assert main(["sweep", str(tmp_path / "g1.edges"), "--graph2", str(tmp_path / "g2.edges"),
                 "--k", "10", "20", "--trials", "2", "--jobs", "1", "--out", str(tmp_path / "t.csv")]) == 0
    rows = _rows(tmp_path / "t.csv")
    assert len(rows) == 4
    assert all(r["s"] == "" and r["precision"] == "" and r["ec"] != "" for r in rows)


def test_usage_errors_exit_2(tmp_path):
    assert main([]) == 2
    assert main(["generate", SRC, "-s", "1.0", "--out", str(tmp_path)]) == 2
    assert main(["sweep", SRC, "--trials", "0", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["align", "--bogus"]) == 2


def test_centrality_dump(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["centrality", SRC, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "label,score,rank"
    assert len(lines) == load_standin(SRC).graph.node_count + 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "seedless_align", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep" in res.stdout
