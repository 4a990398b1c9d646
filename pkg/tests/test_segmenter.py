import json
import math
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_best, compositions, lengths_to_tags, random_hmm, score, well_formed
from opinionmon import data_path
from opinionmon.segmenter import (
    FORBIDDEN,
    NEG_INF,
    B, E, M, S,
    HmmModel,
    InvalidInput,
    hmm_train,
    read_corpus,
    segment_pipeline,
    split_runs,
    tags_to_words,
    viterbi_decode,
    viterbi_segment,
    viterbi_trellis,
    word_f1,
)
from opinionmon.textprep import Document, StopwordList

GOLDEN = Path(__file__).parent / "golden"
ALPHABET = list("疫情口罩武汉加油医生护士希望健康平安病毒隔离新闻春天城市")


@pytest.fixture(scope="module")
def fixture_model():
    return hmm_train(read_corpus(data_path("hmm_corpus.txt")))


def _rows_normalized(model):
    assert math.fsum(math.exp(v) for v in model.initial) == pytest.approx(1, abs=1e-9)
    for row in model.transition:
        assert math.fsum(math.exp(v) for v in row) == pytest.approx(1, abs=1e-9)


def test_train_single_char():
    m = hmm_train([["好"]])
    _rows_normalized(m)
    assert m.initial[S] == 0.0
    assert m.initial[B] == NEG_INF
    em = m.emission["好"]
    assert em[S] == max(em)
    assert em[S] > m.emission["好"][B] + 10


def test_train_two_char_forced_structure():
    m = hmm_train([["你好"]])
    _rows_normalized(m)
    assert m.transition[B][E] == 0.0  # probability exactly 1
    assert m.transition[B][M] == NEG_INF


def test_train_rejects_empty():
    with pytest.raises(InvalidInput):
        hmm_train([])
    with pytest.raises(InvalidInput):
        hmm_train([["a", ""]])


def test_forbidden_transitions_always_neg_inf(fixture_model):
    _rows_normalized(fixture_model)
    for a, b in FORBIDDEN:
        assert fixture_model.transition[a][b] == NEG_INF
    assert len(FORBIDDEN) == 8


def test_two_word_model_hand_trellis():
    m = hmm_train([["你好"], ["世界"]])
    # per-state emission for a seen char: (1 + lam) / (N + n1 + 1e-6*N),
    # N = 2 chars, n1 = 2 singletons, lam = 1e-6*2/(4 vocab + 1)
    p = (1 + 1e-6 * 2 / 5) / (2 + 2 + 1e-6 * 2)
    expected = 4 * math.log(p) + math.log(0.5)  # E->B after an unseen-successor row
    tags, logp = viterbi_decode(m, "你好世界")
    assert tags == [B, E, B, E]
    assert logp == pytest.approx(expected, rel=1e-12)
    assert viterbi_segment(m, "你好世界") == ["你好", "世界"]


def test_trellis_recurrence(fixture_model):
    text = "武汉加油"
    tr = viterbi_trellis(fixture_model, text)
    em = fixture_model.emit
    for s in range(4):
        assert tr.weight[0][s] == fixture_model.initial[s] + em(text[0])[s]
    for t in range(1, len(text)):
        for s in range(4):
            best = max(tr.weight[t - 1][p] + fixture_model.transition[p][s] for p in range(4))
            assert tr.weight[t][s] == best + em(text[t])[s]


def test_single_char():
    m = hmm_train([["你好"], ["世界"], ["好"]])
    assert viterbi_segment(m, "好") == ["好"]


def test_compositions_cover_all_well_formed():
    import itertools
    for n in range(1, 7):
        from_comp = {tuple(lengths_to_tags(c)) for c in compositions(n)}
        from_product = {t for t in itertools.product(range(4), repeat=n) if well_formed(t)}
        assert from_comp == from_product


def test_viterbi_matches_brute_force_short_fixture_texts(fixture_model):
    rng = random.Random(3)
    for _ in range(200):
        text = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 8)))
        best, _ = brute_force_best(fixture_model, text)
        tags, logp = viterbi_decode(fixture_model, text)
        assert logp == best
        assert score(fixture_model, text, tags) == best


def test_infeasible_model_falls_back_to_singles():
    m = hmm_train([["你好"]])  # initial mass only on B
    tags, logp = viterbi_decode(m, "好")
    assert logp == NEG_INF and tags == [S]
    assert viterbi_segment(m, "好") == ["好"]


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet=st.sampled_from(ALPHABET), min_size=1, max_size=12),
       st.floats(min_value=-50, max_value=50))
def test_scaling_invariance(text, offset):
    m = random_hmm(random.Random(len(text)), ALPHABET)
    assert viterbi_decode(m, text)[0] == viterbi_decode(m.shifted(offset), text)[0]


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.sampled_from(ALPHABET + list("ab1 ,😀")), max_size=30))
def test_reconstruction_and_no_forbidden(text):
    m = random_hmm(random.Random(7), ALPHABET)
    assert "".join(viterbi_segment(m, text)) == text
    for run, cjk in split_runs(text):
        if cjk:
            tags, _ = viterbi_decode(m, run)
            assert well_formed(tags)
            assert all((a, b) not in FORBIDDEN for a, b in zip(tags, tags[1:]))


def test_split_runs_atomic_non_cjk():
    assert split_runs("COVID很可怕!") == [("COVID", False), ("很可怕", True), ("!", False)]
    assert split_runs("a1 b") == [("a1", False), (" ", False), ("b", False)]


def test_tags_to_words():
    assert tags_to_words("武汉加油", [B, E, B, E]) == ["武汉", "加油"]
    assert tags_to_words("好人", [S, S]) == ["好", "人"]


def test_training_self_consistency(fixture_model):
    corpus = read_corpus(data_path("hmm_corpus.txt"))
    assert len(corpus) >= 50
    scores = [word_f1(s, viterbi_segment(fixture_model, "".join(s))) for s in corpus]
    gold = sum(len(s) for s in corpus)
    # micro F1 over all words
    hits = sum(f * len(s) for f, s in zip(scores, corpus))
    assert hits / gold >= 0.95


def test_word_f1():
    assert word_f1(["ab", "c"], ["ab", "c"]) == 1.0
    assert word_f1(["ab"], ["a", "b"]) == 0.0


def test_model_json_round_trip(tmp_path, fixture_model):
    path = tmp_path / "hmm.json"
    fixture_model.save(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw["version"] == "hmm-v1" and raw["states"] == ["B", "E", "M", "S"]
    assert raw["transition"][B][B] is None
    again = HmmModel.load(path)
    assert again == fixture_model


def test_pipeline_stopwords_only(fixture_model):
    stops = StopwordList(frozenset({"的", "了"}))
    doc = Document("d", "", "", "", clean_text="的了的")
    assert segment_pipeline(doc, fixture_model, stops) == []


def test_pipeline_mixed_ascii(fixture_model):
    doc = Document("d", "", "", "", clean_text="COVID很可怕")
    toks = segment_pipeline(doc, fixture_model, StopwordList())
    assert toks[0] == "COVID"
    assert "".join(toks) == "COVID很可怕"


def test_pipeline_golden(fixture_model):
    stops = StopwordList.load(data_path("stopwords.txt"))
    golden = json.loads((GOLDEN / "segment_pipeline.json").read_text(encoding="utf-8"))
    for text, expected in golden.items():
        doc = Document("g", "", "", "", clean_text=text)
        assert segment_pipeline(doc, fixture_model, stops) == expected


def test_protected_words_cut_first(fixture_model):
    text = "第一家方舱医院开始收治病人"
    plain = viterbi_segment(fixture_model, text)
    assert "方舱" not in plain
    got = viterbi_segment(fixture_model, text, protected=["方舱"])
    assert "方舱" in got and "".join(got) == text


@given(st.text(alphabet=st.sampled_from(ALPHABET + list("ab ")), max_size=20),
       st.lists(st.text(alphabet=st.sampled_from(ALPHABET), min_size=1, max_size=3), max_size=3))
def test_protected_reconstruction(text, protected):
    m = random_hmm(random.Random(1), ALPHABET)
    assert "".join(viterbi_segment(m, text, protected)) == text
