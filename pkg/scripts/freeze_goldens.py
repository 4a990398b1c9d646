"""Rewrite tests/golden/* from the shipped fixtures.

Run only after a deliberate behaviour change; review the diff before
committing.
"""

import json
import tempfile
from pathlib import Path

from opinionmon import data_path
from opinionmon.segmenter import hmm_train, read_corpus, segment_pipeline
from opinionmon.textprep import Document, StopwordList

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

PIPELINE_TEXTS = [
    "武汉加油，中国加油！",
    "我非常担心家人的健康",
    "COVID很可怕",
    "看到病人出院我很开心",
    "第一家方舱医院开始收治病人",
    "这种行为让人非常愤怒!",
]


def _dump(name, obj):
    (GOLDEN / name).write_text(json.dumps(obj, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def segment_golden():
    model = hmm_train(read_corpus(data_path("hmm_corpus.txt")))
    stops = StopwordList.load(data_path("stopwords.txt"))
    out = {}
    for text in PIPELINE_TEXTS:
        doc = Document.from_raw("g", text)
        out[doc.clean_text] = segment_pipeline(doc, model, stops)
    _dump("segment_pipeline.json", out)


def pipeline_golden():
    from opinionmon.cli import main

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "run"
        assert main(["run", "--out", str(out)]) == 0
        target = GOLDEN / "pipeline"
        target.mkdir(exist_ok=True)
        for f in sorted(out.iterdir()):
            if f.is_file() and f.suffix in (".jsonl", ".json", ".txt", ".tsv", ".csv"):
                (target / f.name).write_bytes(f.read_bytes())


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    segment_golden()
    try:
        pipeline_golden()
    except ImportError:
        pass
