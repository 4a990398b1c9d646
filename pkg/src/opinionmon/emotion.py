"""Seven-emotion scoring by a weighted left-to-right lexicon walk.

A running weight W starts at 1. Negation words flip its sign and degree
adverbs multiply it; each sentiment word then adds
``W * sign(polarity) * intensity`` to every emotion it carries, after which
W resets to 1 (or carries over when ``carry_weight`` is set).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .lexicon import EMOTIONS, FunctionWordTables, SentimentEntry
from .polarity import NbModel, PolarityResult, nb_classify
from .segmenter import HmmModel, segment_pipeline
from .textprep import Document, StopwordList

LEXICON_SILENT = "LEXICON_SILENT"
FALLBACK = "FALLBACK"


@dataclass(frozen=True)
class EmotionVector:
    scores: dict[str, float]
    total_polarity: float = 0.0
    flags: tuple[str, ...] = ()

    @property
    def silent(self) -> bool:
        return not any(self.scores.values())

    @property
    def dominant(self) -> str | None:
        """Emotion with the largest absolute score; ties go to the earlier emotion."""
        if self.silent:
            return None
        return max(EMOTIONS, key=lambda e: (abs(self.scores[e]), -EMOTIONS.index(e)))

    @classmethod
    def zero(cls) -> "EmotionVector":
        return cls({e: 0.0 for e in EMOTIONS}, 0.0, (LEXICON_SILENT,))

    def to_dict(self) -> dict:
        return {"emotions": {e: self.scores[e] for e in EMOTIONS},
                "dominant": self.dominant,
                "total_polarity": self.total_polarity,
                "flags": list(self.flags)}


@dataclass(frozen=True)
class ScorerConfig:
    fallback_enabled: bool = True
    fallback_positive_emotion: str = "Hopeful"
    fallback_negative_emotion: str = "Depressed"
    negation_scope: str = "until_next_sentiment_word"
    carry_weight: bool = False

    def __post_init__(self):
        for e in (self.fallback_positive_emotion, self.fallback_negative_emotion):
            if e not in EMOTIONS:
                raise ValueError(f"unknown fallback emotion {e!r}")
        if self.negation_scope != "until_next_sentiment_word":
            raise ValueError(f"unsupported negation_scope {self.negation_scope!r}")


def score_emotions(tokens: Sequence[str], lex: Mapping[str, SentimentEntry],
                   fw: FunctionWordTables, carry_weight: bool = False) -> EmotionVector:
    scores = {e: 0.0 for e in EMOTIONS}
    total = 0.0
    w = 1.0
    for tok in tokens:
        entry = lex.get(tok)
        if entry is not None:
            for emo, level in entry.emotions.items():
                if level:
                    contrib = w * entry.sign * level
                    scores[emo] += contrib
                    total += contrib
            if not carry_weight:
                w = 1.0
        elif tok in fw.negations:
            w *= -1.0
        elif tok in fw.degree_adverbs:
            w *= fw.degree_adverbs[tok]
    vec = EmotionVector(scores, total)
    return EmotionVector(scores, total, (LEXICON_SILENT,)) if vec.silent else vec


def fallback_vector(result: PolarityResult, cfg: ScorerConfig) -> EmotionVector:
    scores = {e: 0.0 for e in EMOTIONS}
    if result.label == "positive":
        value = result.confidence
        scores[cfg.fallback_positive_emotion] = value
    else:
        value = -result.confidence
        scores[cfg.fallback_negative_emotion] = value
    return EmotionVector(scores, value, (FALLBACK,))


def score_with_fallback(tokens: Sequence[str], lex: Mapping[str, SentimentEntry],
                        fw: FunctionWordTables, nb: NbModel | None,
                        cfg: ScorerConfig = ScorerConfig()) -> EmotionVector:
    vec = score_emotions(tokens, lex, fw, carry_weight=cfg.carry_weight)
    # an empty token list gives NB nothing but the prior; stay silent
    if not vec.silent or not cfg.fallback_enabled or not tokens:
        return vec
    if nb is None:
        raise ValueError("fallback enabled but no NB model supplied")
    return fallback_vector(nb_classify(nb, tokens), cfg)


@dataclass(frozen=True)
class DocumentResult:
    id: str
    fetched_at: str
    polarity: PolarityResult
    emotions: EmotionVector
    tokens: tuple[str, ...] = field(default=(), compare=False)

    def to_record(self) -> dict:
        emo = self.emotions
        return {
            "id": self.id,
            "fetched_at": self.fetched_at,
            "label": self.polarity.label,
            "confidence": self.polarity.confidence,
            "emotions": {e: emo.scores[e] for e in EMOTIONS},
            "dominant": emo.dominant,
            "total_polarity": emo.total_polarity,
            "flags": list(emo.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False)


def document_emotion(doc: Document, model: HmmModel, stops: StopwordList,
                     lex: Mapping[str, SentimentEntry], fw: FunctionWordTables,
                     nb: NbModel, cfg: ScorerConfig = ScorerConfig(),
                     protected: Iterable[str] = ()) -> DocumentResult:
    tokens = segment_pipeline(doc, model, stops, protected)
    return DocumentResult(
        id=doc.id,
        fetched_at=doc.fetched_at,
        polarity=nb_classify(nb, tokens),
        emotions=score_with_fallback(tokens, lex, fw, nb, cfg),
        tokens=tuple(tokens),
    )


def vector_from_record(rec: Mapping) -> EmotionVector:
    scores = {e: float(rec["emotions"].get(e, 0.0)) for e in EMOTIONS}
    return EmotionVector(scores, float(rec.get("total_polarity", sum(scores.values()))),
                         tuple(rec.get("flags", ())))
