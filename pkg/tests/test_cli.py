"""Command-line interface tests: exit codes, stdout contracts, config
file plumbing, and end-to-end pipelines over temporary corpora and the
mock completion server."""

from __future__ import annotations

import json
import os
import shutil

import pytest

from golden_filter import GOLDEN, baseline, materialize
from sketchkit.cli import main
from sketchkit.mockserve import MockCompletionServer


def _write_manifest(tmp_path, rels):
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text(
        "\n".join(json.dumps({"path": rel}) for rel in rels) + "\n"
    )
    return str(manifest)


def _write_problems(tmp_path, rows):
    path = tmp_path / "problems.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return str(path)


ADD_PROBLEM = {
    "task_id": "demo/add",
    "context": "def add(a, b):\n",
    "canonical_solution": "    return a + b\n",
    "tests": ["assert add(1, 2) == 3", "assert add(-1, 1) == 0"],
    "check_kind": "function",
    "entry_point": "add",
}


# ------------------------------------------------------------ exit codes


def test_version_mentions_backend(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert out.startswith("sketchkit ")
    assert "scanner:" in out


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["corpus", "filter"])  # missing required flags
    assert exc.value.code == 2


def test_domain_error_exits_1(capsys):
    rc = main(["eval", "passk", "--n", "5", "--c", "9", "--k", "1"])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_file_exits_1(capsys):
    rc = main(["corpus", "stats", "--manifest", "/no/such/manifest.jsonl"])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_passk_prints_six_decimals(capsys):
    rc = main(["eval", "passk", "--n", "10", "--c", "3", "--k", "4"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "0.833333"


# ------------------------------------------------------------ sketching


def test_sketch_file_stdout(tmp_path, capsys):
    src = tmp_path / "m.py"
    src.write_text("x = 42\ny = '名前'\n")
    rc = main(["sketch", "file", "--path", str(src)])
    assert rc == 0
    assert capsys.readouterr().out == "x = number\ny = string\n"


def test_sketch_file_names_mode(tmp_path, capsys):
    src = tmp_path / "m.py"
    src.write_text("def add(a, b):\n    return a + b\n")
    rc = main(["sketch", "file", "--path", str(src), "--mode", "names-only"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out == "def function(variable, variable):\n    return variable + variable\n"


def test_sketch_corpus_writes_mirror_tree(tmp_path, capsys):
    root = tmp_path / "src"
    root.mkdir()
    (root / "a.py").write_text("v = 7\n")
    (root / "sub").mkdir()
    (root / "sub" / "b.py").write_text("w = 'x'\n")
    manifest = _write_manifest(tmp_path, ["a.py", "sub/b.py"])
    out_dir = tmp_path / "sketched"
    rc = main(["sketch", "corpus", "--manifest", manifest,
               "--src-root", str(root), "--out-dir", str(out_dir)])
    assert rc == 0
    assert (out_dir / "a.py").read_text() == "v = number\n"
    assert (out_dir / "sub" / "b.py").read_text() == "w = string\n"


# ------------------------------------------------------------ corpus


def test_corpus_filter_report_and_clean(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    materialize(str(root))
    manifest = _write_manifest(tmp_path, [rel for rel, _, _ in GOLDEN])
    report = tmp_path / "report.jsonl"
    stats = tmp_path / "stats.json"
    clean = tmp_path / "clean"
    rc = main(["corpus", "filter", "--manifest", manifest,
               "--src-root", str(root), "--report", str(report),
               "--stats", str(stats), "--clean-dir", str(clean)])
    assert rc == 0
    rows = [json.loads(line) for line in report.read_text().splitlines()]
    assert len(rows) == len(GOLDEN)
    by_path = {r["path"]: r for r in rows}
    for rel, _, reasons in GOLDEN:
        assert by_path[rel]["kept"] == (reasons == []), rel
        assert by_path[rel]["reasons"] == reasons, rel
    summary = json.loads(stats.read_text())
    kept = sum(1 for _, _, reasons in GOLDEN if not reasons)
    assert summary["total"] == len(GOLDEN)
    assert summary["kept"] == kept
    # cleaned outputs exist for kept files only
    assert (clean / "pass_baseline.py").exists()
    assert not (clean / "fail_minlines.py").exists()
    # license header must be stripped from the cleaned copy
    cleaned = (clean / "clean_license_pass.py").read_text()
    assert "Copyright" not in cleaned


@pytest.mark.skipif(shutil.which("sandbox-harness") is None,
                    reason="external sandbox harness not installed")
def test_corpus_filter_with_external_syntax_engine(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    (root / "ok.py").write_text(baseline("hrx"))
    manifest = _write_manifest(tmp_path, ["ok.py"])
    report = tmp_path / "report.jsonl"
    rc = main(["corpus", "filter", "--manifest", manifest,
               "--src-root", str(root), "--report", str(report),
               "--syntax-engine", "harness"])
    assert rc == 0
    row = json.loads(report.read_text().splitlines()[0])
    assert row["kept"] is True


def test_corpus_filter_dry_run_writes_nothing(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    (root / "ok.py").write_text(baseline("dry"))
    manifest = _write_manifest(tmp_path, ["ok.py"])
    report = tmp_path / "report.jsonl"
    rc = main(["--dry-run", "corpus", "filter", "--manifest", manifest,
               "--src-root", str(root), "--report", str(report)])
    assert rc == 0
    assert not report.exists()


def test_corpus_dedup(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    materialize(str(root))
    manifest = _write_manifest(tmp_path, [rel for rel, _, _ in GOLDEN])
    out = tmp_path / "unique.txt"
    rc = main(["corpus", "dedup", "--manifest", manifest,
               "--src-root", str(root), "--out", str(out)])
    assert rc == 0
    uniques = out.read_text().splitlines()
    assert "dup_a.py" in uniques
    assert "dup_b.py" not in uniques
    assert "dup_ws.py" not in uniques
    assert "uniq_c.py" in uniques


def test_corpus_extract(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    (root / "uses.py").write_text("import numpy as np\nv = np.eye(3)\n")
    (root / "skips.py").write_text("import os\np = os.getcwd()\n")
    manifest = _write_manifest(tmp_path, ["uses.py", "skips.py"])
    out = tmp_path / "numpy.txt"
    rc = main(["corpus", "extract", "--manifest", manifest,
               "--src-root", str(root), "--library", "numpy",
               "--out", str(out)])
    assert rc == 0
    assert out.read_text().splitlines() == ["uses.py"]


def test_corpus_stats(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    (root / "a.py").write_text("x = 1\ny = 2\n")
    manifest = _write_manifest(tmp_path, ["a.py"])
    out = tmp_path / "stats.json"
    rc = main(["corpus", "stats", "--manifest", manifest,
               "--src-root", str(root), "--out", str(out)])
    assert rc == 0
    stats = json.loads(out.read_text())
    assert stats["files"] == 1
    assert stats["lines"] == 2


def test_corpus_plan(tmp_path, capsys):
    manifest = tmp_path / "manifest.jsonl"
    rows = [
        {"path": "a.py", "stars": 100, "unit_test_rate": 0.0},
        {"path": "b.py", "stars": 0, "unit_test_rate": 1.0},
    ]
    manifest.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    out = tmp_path / "plan.json"
    rc = main(["corpus", "plan", "--manifest", str(manifest),
               "--extra-draws", "10", "--seed", "3", "--out", str(out)])
    assert rc == 0
    plan = out.read_text().splitlines()
    assert len(plan) == 12
    assert set(plan) == {"a.py", "b.py"}


# ------------------------------------------------------------ traindata


def test_traindata_sketcher_emits_shards(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    (root / "mod.py").write_text(
        "def add(a, b):\n    return a + b\n\n\n"
        "def sub(a, b):\n    return a - b\n"
    )
    manifest = _write_manifest(tmp_path, ["mod.py"])
    out_dir = tmp_path / "docs"
    rc = main(["traindata", "sketcher", "--manifest", manifest,
               "--src-root", str(root), "--out-dir", str(out_dir)])
    assert rc == 0
    meta = json.loads((out_dir / "sketcher-manifest.json").read_text())
    assert meta["documents"] == 1
    shard = out_dir / meta["shards"][0]["path"]
    assert "def add" in shard.read_text()


def test_traindata_generator_emits_shards(tmp_path, capsys):
    root = tmp_path / "raw"
    root.mkdir()
    (root / "mod.py").write_text(
        "x = 41\n\n\ndef add(a, b):\n    return a + b\n"
    )
    manifest = _write_manifest(tmp_path, ["mod.py"])
    out_dir = tmp_path / "docs"
    rc = main(["traindata", "generator", "--manifest", manifest,
               "--src-root", str(root), "--out-dir", str(out_dir)])
    assert rc == 0
    meta = json.loads((out_dir / "generator-manifest.json").read_text())
    assert meta["documents"] == 1
    text = (out_dir / meta["shards"][0]["path"]).read_text()
    assert "number" in text  # sketched halves anonymize the constant
    assert "x = 41" in text  # original halves keep it


# ------------------------------------------------------------ inference


@pytest.fixture(scope="module")
def mock_url():
    transcript = {
        "models": {
            "gen": {"mode": "rules", "rules": [],
                    "default": ["    return a + b\n"]},
            "sk": {"mode": "rules", "rules": [],
                   "default": ["    return a + number\n"]},
        }
    }
    with MockCompletionServer(transcript) as url:
        yield url


def test_infer_baseline_then_eval_run(tmp_path, capsys, mock_url):
    problems = _write_problems(tmp_path, [ADD_PROBLEM])
    cands = tmp_path / "cands.jsonl"
    rc = main(["infer", "baseline", "--url", mock_url, "--model", "gen",
               "--problems", problems, "--out", str(cands), "--n", "3",
               "--temperature", "0.4"])
    assert rc == 0
    assert len(cands.read_text().splitlines()) == 3
    capsys.readouterr()

    report_path = tmp_path / "report.json"
    rc = main(["--jobs", "2", "eval", "run", "--problems", problems,
               "--candidates", str(cands), "--ks", "1,3",
               "--runner", "inprocess", "--out", str(report_path)])
    assert rc == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["pass_at_k"]["1"] == pytest.approx(1.0)
    report = json.loads(report_path.read_text())
    assert report["pass_at_k"]["1"] == pytest.approx(1.0)
    assert report["pass_at_k"]["3"] == pytest.approx(1.0)


def test_infer_two_stage_cli(tmp_path, capsys, mock_url):
    problems = _write_problems(tmp_path, [ADD_PROBLEM])
    cands = tmp_path / "two.jsonl"
    rc = main(["infer", "two-stage",
               "--sketcher-url", mock_url, "--sketcher-model", "sk",
               "--generator-url", mock_url, "--generator-model", "gen",
               "--problems", problems, "--out", str(cands),
               "--n-sketch", "3", "--n-final", "2"])
    assert rc == 0
    rows = [json.loads(l) for l in cands.read_text().splitlines()]
    assert len(rows) == 2
    assert all(r["stage"] == "two-stage" for r in rows)


def test_infer_sweep_cli_resumes(tmp_path, capsys, mock_url):
    problems = _write_problems(tmp_path, [ADD_PROBLEM])
    out_dir = tmp_path / "sweep"
    argv = ["infer", "sweep", "--url", mock_url, "--model", "gen",
            "--problems", problems, "--out-dir", str(out_dir),
            "--temperatures", "0.2,0.8", "--n", "2"]
    assert main(argv) == 0
    first = sorted(p.name for p in out_dir.iterdir())
    assert first == ["demo_add__t0.2.jsonl", "demo_add__t0.8.jsonl"]
    capsys.readouterr()
    assert main(argv) == 0
    assert "wrote 0 candidate files" in capsys.readouterr().out
    # resume left the original two files untouched, nothing new
    assert sorted(p.name for p in out_dir.iterdir()) == first


def test_endpoint_from_config_file(tmp_path, capsys, mock_url):
    config = tmp_path / "sketchkit.toml"
    config.write_text(
        f'[endpoint]\nurl = "{mock_url}"\nmodel = "gen"\n'
    )
    problems = _write_problems(tmp_path, [ADD_PROBLEM])
    cands = tmp_path / "cands.jsonl"
    rc = main(["--config", str(config), "infer", "baseline",
               "--problems", problems, "--out", str(cands), "--n", "1"])
    assert rc == 0
    assert len(cands.read_text().splitlines()) == 1


def test_endpoint_missing_exits_1(tmp_path, capsys):
    problems = _write_problems(tmp_path, [ADD_PROBLEM])
    rc = main(["infer", "baseline", "--problems", problems,
               "--out", str(tmp_path / "x.jsonl")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------------ evaluation


def test_eval_sketch_em(tmp_path, capsys):
    preds = tmp_path / "preds.json"
    refs = tmp_path / "refs.json"
    preds.write_text(json.dumps(["x = number\n", "y = number\n"]))
    refs.write_text(json.dumps(["x = 42\n", "y = 'a'\n"]))
    rc = main(["eval", "sketch-em", "--predictions", str(preds),
               "--references", str(refs)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "0.5" in out


def test_eval_buckets(tmp_path, capsys):
    rows = []
    bodies = ["np.a()", "np.a()\nnp.b()", "np.a()\nnp.b()\nnp.c()",
              "np.a()\nnp.b()\nnp.c()\nnp.d()"]
    for i, body in enumerate(bodies):
        rows.append({
            "task_id": f"t{i}", "context": "import numpy as np\n",
            "canonical_solution": body + "\n", "tests": ["assert True"],
            "check_kind": "function", "entry_point": "f",
            "library": "numpy",
        })
    problems = _write_problems(tmp_path, rows)
    rc = main(["eval", "buckets", "--problems", problems,
               "--n-buckets", "2"])
    assert rc == 0
    buckets = json.loads(capsys.readouterr().out)
    assert buckets["t0"] == "q1"
    assert buckets["t3"] == "q2"


def test_eval_report_pretty_print(tmp_path, capsys):
    report = {"problems": {"t": {"n": 2, "c": 1}},
              "pass_at_k": {"1": 0.5}, "by_temperature": {},
              "temperature_best": {}, "groups": {}, "error_histogram": {}}
    path = tmp_path / "report.json"
    path.write_text(json.dumps(report))
    rc = main(["eval", "report", "--report", str(path)])
    assert rc == 0
    assert "pass@1" in capsys.readouterr().out
