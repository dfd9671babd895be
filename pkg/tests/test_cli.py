"""Command-line behavior: exit codes, outputs, batch mode."""

import json

import pytest

from grasp.cli import main


def _synth(tmp_path, name="corpus", **overrides):
    args = {"types": 3, "pages": 8, "separation": 4.0, "homophily": 1.0,
            "noise": 0, "seed": 5}
    args.update(overrides)
    out = tmp_path / name
    code = main([
        "synth",
        "--types", str(args["types"]),
        "--pages-per-type", str(args["pages"]),
        "--separation", str(args["separation"]),
        "--homophily", str(args["homophily"]),
        "--noise-edges", str(args["noise"]),
        "--seed", str(args["seed"]),
        "--out", str(out),
    ])
    assert code == 0
    return out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "grasp" in capsys.readouterr().out


def test_missing_corpus_exits_2_without_outputs(tmp_path):
    report = tmp_path / "report.json"
    code = main(["sample", "--corpus", str(tmp_path / "nowhere"),
                 "--report-out", str(report), "--no-metrics"])
    assert code == 2
    assert not report.exists()


def test_synth_sample_eval_happy_path(tmp_path, capsys):
    corpus = _synth(tmp_path)
    report = tmp_path / "report.json"
    metrics = tmp_path / "metrics.json"
    code = main(["sample", "--corpus", str(corpus), "--k", "3",
                 "--seed", "1", "--report-out", str(report),
                 "--metrics-out", str(metrics)])
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["sample"]["counts"]["collective"] == 3
    rows = json.loads(metrics.read_text())["rows"]
    assert {r["space"] for r in rows} == {"text", "visual"}

    out = tmp_path / "eval.json"
    code = main(["eval", "--report", str(report), "--out", str(out),
                 "--methods", "grasp,random,sdc_tags+pca8",
                 "--spaces", "text,visual"])
    assert code == 0
    rows = json.loads(out.read_text())["rows"]
    assert len(rows) == 6
    labels = {r["method_label"] for r in rows}
    assert any("PCA" in label for label in labels)
    assert capsys.readouterr().out  # human-readable summary printed


def test_eval_unknown_method_exits_2(tmp_path):
    corpus = _synth(tmp_path)
    report = tmp_path / "report.json"
    assert main(["sample", "--corpus", str(corpus), "--k", "3",
                 "--seed", "1", "--report-out", str(report),
                 "--no-metrics"]) == 0
    code = main(["eval", "--report", str(report),
                 "--out", str(tmp_path / "e.json"), "--methods", "sorcery"])
    assert code == 2


def test_iters_zero_matches_iters_five_when_thresholds_inert(tmp_path):
    corpus = _synth(tmp_path)
    samples = {}
    for iters in ("0", "5"):
        report = tmp_path / f"report{iters}.json"
        code = main(["sample", "--corpus", str(corpus), "--k", "3",
                     "--seed", "2", "--iters", iters,
                     "--gamma", "-1", "--beta", "1",
                     "--report-out", str(report), "--no-metrics"])
        assert code == 0
        samples[iters] = json.loads(report.read_text())["sample"]["entries"]
    assert samples["0"] == samples["5"]


def test_ci_mode_requires_seed(tmp_path):
    code = main(["synth", "--types", "2", "--pages-per-type", "2",
                 "--ci", "--out", str(tmp_path / "c")])
    assert code == 2
    corpus = _synth(tmp_path)
    code = main(["sample", "--corpus", str(corpus), "--ci",
                 "--report-out", str(tmp_path / "r.json"), "--no-metrics"])
    assert code == 2


def test_validate_ok_and_broken(tmp_path, capsys):
    corpus = _synth(tmp_path)
    assert main(["validate", "--corpus", str(corpus)]) == 0
    (corpus / "dom" / "0000.html").unlink()
    assert main(["validate", "--corpus", str(corpus)]) == 2
    assert "error" in capsys.readouterr().err


def test_batch_mode_parallel(tmp_path):
    a = _synth(tmp_path, "a", seed=1)
    b = _synth(tmp_path, "b", seed=2)
    code = main(["sample", "--corpus", str(a), "--corpus", str(b),
                 "--out-dir", str(tmp_path / "oa"),
                 "--out-dir", str(tmp_path / "ob"),
                 "--parallel-sites", "2", "--k", "3", "--seed", "0"])
    assert code == 0
    for name in ("oa", "ob"):
        assert (tmp_path / name / "report.json").exists()
        assert (tmp_path / name / "metrics.json").exists()


def test_batch_mode_out_dir_count_mismatch(tmp_path):
    a = _synth(tmp_path, "a")
    code = main(["sample", "--corpus", str(a), "--corpus", str(a),
                 "--out-dir", str(tmp_path / "only-one"),
                 "--k", "3", "--seed", "0"])
    assert code == 2


def test_structured_ids_flow_through(tmp_path):
    corpus = _synth(tmp_path)
    ids_file = tmp_path / "structured.txt"
    ids_file.write_text("# header comment\n0\n5\n\n17\n")
    report = tmp_path / "report.json"
    code = main(["sample", "--corpus", str(corpus), "--k", "3", "--seed", "4",
                 "--structured", str(ids_file),
                 "--report-out", str(report), "--no-metrics"])
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["sample"]["counts"]["structured"] == 3
    assert doc["sample"]["counts"]["random"] == 1  # ceil(0.1 * 3)


def test_structured_file_garbage_exits_2(tmp_path):
    corpus = _synth(tmp_path)
    ids_file = tmp_path / "structured.txt"
    ids_file.write_text("zero\n")
    code = main(["sample", "--corpus", str(corpus), "--k", "3", "--seed", "4",
                 "--structured", str(ids_file),
                 "--report-out", str(tmp_path / "r.json"), "--no-metrics"])
    assert code == 2


def test_oversized_k_exits_2(tmp_path):
    corpus = _synth(tmp_path, types=2, pages=2)
    code = main(["sample", "--corpus", str(corpus), "--k", "50", "--seed", "0",
                 "--report-out", str(tmp_path / "r.json"), "--no-metrics"])
    assert code == 2
