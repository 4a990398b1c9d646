import json
from pathlib import Path

import pytest

from opinionmon import data_path
from opinionmon.cli import ARTIFACTS, STAGES, PipelineConfig, load_config, main
from opinionmon.frontier import BloomFilter

GOLDEN = Path(__file__).parent / "golden" / "pipeline"


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    return path


def records(n=10, dup_of=(2, 5)):
    rows = [{"id": f"r{i}", "fetched_at": "2020-02-01T10:00:00+08:00", "raw": f"希望疫情早日结束{i}"}
            for i in range(n - len(dup_of))]
    rows += [dict(rows[i]) for i in dup_of]
    return rows


def stats_line(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_ingest_counts_and_rerun(tmp_path, capsys):
    src = write_jsonl(tmp_path / "in.jsonl", records())
    out = tmp_path / "out"
    assert main(["ingest", str(src), "--out", str(out)]) == 0
    assert stats_line(capsys) == {"accepted": 8, "duplicates": 2}
    assert main(["ingest", str(src), "--out", str(out)]) == 0
    assert stats_line(capsys) == {"accepted": 0, "duplicates": 10}
    docs = (out / ARTIFACTS["documents"]).read_text(encoding="utf-8").splitlines()
    assert len(docs) == 8


def test_ingest_corrupt_line(tmp_path, capsys):
    lines = [json.dumps(r, ensure_ascii=False) for r in records(6, ())]
    lines[4] = '{"id": "r4", "raw": '
    src = tmp_path / "in.jsonl"
    src.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert main(["ingest", str(src), "--out", str(tmp_path / "o")]) == 2
    assert ":5:" in capsys.readouterr().err


def test_ingest_unreadable_input(tmp_path, capsys):
    assert main(["ingest", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o")]) != 0
    assert "nope.jsonl" in capsys.readouterr().err


def test_ingest_record_without_id(tmp_path, capsys):
    src = write_jsonl(tmp_path / "in.jsonl", [{"raw": "x"}])
    assert main(["ingest", str(src), "--out", str(tmp_path / "o")]) == 2


def test_seed_flag_reaches_bloom(tmp_path):
    src = write_jsonl(tmp_path / "in.jsonl", records())
    assert main(["ingest", str(src), "--out", str(tmp_path), "--seed", "99"]) == 0
    assert BloomFilter.load(tmp_path / ARTIFACTS["bloom"]).seed == 99
    # a snapshot built with another seed is a config conflict
    assert main(["ingest", str(src), "--out", str(tmp_path), "--seed", "7"]) == 4


@pytest.mark.parametrize("stage,missing", [
    ("segment", "documents.jsonl"), ("classify", "tokens.jsonl"), ("trend", "results.jsonl"),
    ("mine-words", "documents.jsonl"), ("score", "documents.jsonl"),
])
def test_missing_upstream_artifact(tmp_path, capsys, stage, missing):
    assert main([stage, "--out", str(tmp_path)]) == 3
    assert missing in capsys.readouterr().err


def test_score_without_nb_model(tmp_path, capsys):
    out = str(tmp_path)
    for stage in ("ingest", "train-hmm", "segment", "expand-lexicon"):
        assert main([stage, "--out", out]) == 0
    assert main(["score", "--out", out]) == 3
    assert "nb.json" in capsys.readouterr().err


def test_score_without_nb_when_fallback_disabled(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[scorer]\nfallback_enabled = false\n", encoding="utf-8")
    out = str(tmp_path / "o")
    for stage in ("ingest", "train-hmm", "segment", "expand-lexicon", "score"):
        assert main([stage, "--out", out, "--config", str(cfg)]) == 0
    rows = [json.loads(x) for x in (tmp_path / "o" / "results.jsonl").read_text(encoding="utf-8").splitlines()]
    assert rows and all(r["label"] is None for r in rows)
    assert not any("FALLBACK" in r["flags"] for r in rows)


def test_trend_on_empty_results(tmp_path):
    (tmp_path / "results.jsonl").write_text("", encoding="utf-8")
    assert main(["trend", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "trends.json").read_text(encoding="utf-8"))
    assert payload == {"schema": "trends-v1", "series": []}
    assert json.loads((tmp_path / "hotwords.json").read_text(encoding="utf-8"))["words"] == []


@pytest.mark.parametrize("text", [
    "[bloom]\nm = 0\n",
    "[bloom]\nbogus = 1\n",
    "[nowhere]\n",
    "[paths]\nstopwords = \"missing.txt\"\n",
    "[nb]\nweighting = \"log\"\n",
    "[scorer]\nfallback_positive_emotion = \"Bored\"\n",
    "[expand]\npos_seeds = [\"好\"]\nneg_seeds = [\"好\"]\n",
    "[miner]\nmin_n = 1\n",
    "not toml ===",
])
def test_invalid_config(tmp_path, text):
    cfg = tmp_path / "c.toml"
    cfg.write_text(text, encoding="utf-8")
    assert main(["train-hmm", "--out", str(tmp_path), "--config", str(cfg)]) == 4


def test_config_paths_relative_to_file(tmp_path):
    (tmp_path / "sw.txt").write_text("的\n", encoding="utf-8")
    cfg = tmp_path / "c.toml"
    cfg.write_text("[paths]\nstopwords = \"sw.txt\"\n[export]\ncsv = true\n", encoding="utf-8")
    loaded = load_config(cfg, seed=5)
    assert loaded.paths.stopwords == tmp_path / "sw.txt"
    assert loaded.paths.hmm_corpus == data_path("hmm_corpus.txt")
    assert loaded.bloom.seed == 5 and loaded.eval.seed == 5
    assert loaded.export.csv is True


def test_csv_mirrors(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[export]\ncsv = true\n", encoding="utf-8")
    assert main(["run", "--out", str(tmp_path / "o"), "--config", str(cfg)]) == 0
    assert (tmp_path / "o" / "trends.csv").is_file() and (tmp_path / "o" / "hotwords.csv").is_file()


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["run", "--out", str(out)]) == 0
    return out


def test_full_pipeline_matches_golden(full_run):
    golden = sorted(p.name for p in GOLDEN.iterdir())
    assert golden, "golden tree is empty"
    for name in golden:
        assert (full_run / name).read_bytes() == (GOLDEN / name).read_bytes(), name


def test_stage_by_stage_equals_run(tmp_path, full_run):
    for stage in STAGES:
        assert main([stage, "--out", str(tmp_path)]) == 0
    for name in sorted(p.name for p in GOLDEN.iterdir()):
        assert (tmp_path / name).read_bytes() == (full_run / name).read_bytes(), name


def test_rerunning_a_stage_is_byte_identical(tmp_path, full_run):
    for name in ("documents", "hmm", "new_words", "lexicon"):
        src = full_run / ARTIFACTS[name]
        (tmp_path / src.name).write_bytes(src.read_bytes())
    for stage, art in (("segment", "tokens"), ("score", "results")):
        if stage == "score":
            (tmp_path / "nb.json").write_bytes((full_run / "nb.json").read_bytes())
        assert main([stage, "--out", str(tmp_path)]) == 0
        first = (tmp_path / ARTIFACTS[art]).read_bytes()
        assert main([stage, "--out", str(tmp_path)]) == 0
        assert (tmp_path / ARTIFACTS[art]).read_bytes() == first == (full_run / ARTIFACTS[art]).read_bytes()


def test_pipeline_content_sanity(full_run):
    stats = json.loads((full_run / "ingest_stats.json").read_text())
    assert stats == {"accepted": 101, "duplicates": 4}
    mined = [json.loads(x) for x in (full_run / "new_words.jsonl").read_text(encoding="utf-8").splitlines()]
    assert "方舱" in {m["ngram"] for m in mined}
    trends = json.loads((full_run / "trends.json").read_text())["series"]
    # c0101 has no timestamp and is skipped
    assert sum(s["n_docs"] for s in trends) == 100
    report = json.loads((full_run / "report.json").read_text())
    assert report["system"]["unjudgeable_rate"] == pytest.approx(2 / 80)


def test_example_config_is_the_defaults():
    cfg = load_config(Path(__file__).parents[1] / "configs" / "example.toml")
    assert cfg == PipelineConfig()
