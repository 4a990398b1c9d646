"""Daily emotion series and hot-word rankings for dashboard export."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .emotion import FALLBACK, EmotionVector, vector_from_record
from .lexicon import EMOTIONS, SentimentEntry

log = logging.getLogger(__name__)

SCHEMA_VERSION = "trends-v1"
HOTWORDS_SCHEMA_VERSION = "hotwords-v1"


def to_utc_day(ts) -> date | None:
    """UTC calendar day of an ISO-8601 string or datetime; naive means UTC."""
    if ts is None or ts == "":
        return None
    if isinstance(ts, datetime):
        dt = ts
    elif isinstance(ts, date):
        return ts
    else:
        try:
            dt = datetime.fromisoformat(str(ts).replace("Z", "+00:00"))
        except ValueError:
            return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).date()


@dataclass
class TrendSeries:
    bucket: date
    counts: dict[str, int] = field(default_factory=lambda: {e: 0 for e in EMOTIONS})
    mean_scores: dict[str, float] = field(default_factory=lambda: {e: 0.0 for e in EMOTIONS})
    n_docs: int = 0
    n_fallback: int = 0
    n_lexicon_silent: int = 0

    def to_dict(self) -> dict:
        return {
            "bucket": self.bucket.isoformat(),
            "counts": {e: self.counts[e] for e in EMOTIONS},
            "mean_scores": {e: self.mean_scores[e] for e in EMOTIONS},
            "n_docs": self.n_docs,
            "n_fallback": self.n_fallback,
            "n_lexicon_silent": self.n_lexicon_silent,
        }


def _timestamp(rec) -> object:
    if isinstance(rec, Mapping):
        return rec.get("fetched_at") or rec.get("timestamp")
    return getattr(rec, "fetched_at", None)


def _vector(rec) -> EmotionVector:
    if isinstance(rec, Mapping):
        return vector_from_record(rec)
    return rec.emotions


def aggregate_counted(results: Iterable) -> tuple[list[TrendSeries], int]:
    """Bucket per-document results by UTC day; also return the skipped count.

    Mean absolute scores cover lexicon-scored documents only: fallback
    vectors are in confidence units and are tallied in ``n_fallback``.
    """
    skipped = 0
    buckets: dict[date, list[EmotionVector]] = {}
    for rec in results:
        day = to_utc_day(_timestamp(rec))
        if day is None:
            skipped += 1
            continue
        buckets.setdefault(day, []).append(_vector(rec))

    series = []
    for day in sorted(buckets):
        ts = TrendSeries(day)
        sums = {e: [] for e in EMOTIONS}
        n_scored = 0
        for vec in buckets[day]:
            ts.n_docs += 1
            dom = vec.dominant
            if dom is None:
                ts.n_lexicon_silent += 1
            else:
                ts.counts[dom] += 1
            if FALLBACK in vec.flags:
                ts.n_fallback += 1
            elif dom is not None:
                n_scored += 1
                for e in EMOTIONS:
                    sums[e].append(abs(vec.scores[e]))
        if n_scored:
            ts.mean_scores = {e: math.fsum(sorted(sums[e])) / n_scored for e in EMOTIONS}
        series.append(ts)
    return series, skipped


def aggregate(results: Iterable) -> list[TrendSeries]:
    series, skipped = aggregate_counted(results)
    if skipped:
        log.warning("skipped %d record(s) without a usable timestamp", skipped)
    return series


@dataclass
class HotWord:
    word: str
    freq: int
    tfidf: float
    emotion_profile: EmotionVector

    def to_dict(self) -> dict:
        return {"word": self.word, "freq": self.freq, "tfidf": self.tfidf,
                "emotion_profile": {e: self.emotion_profile.scores[e] for e in EMOTIONS}}


def _profile(entry: SentimentEntry | None) -> EmotionVector:
    if entry is None:
        return EmotionVector.zero()
    scores = {e: float(entry.sign * entry.emotions.get(e, 0)) for e in EMOTIONS}
    return EmotionVector(scores, sum(scores.values()))


def hot_words(tokens_by_doc: Sequence[Sequence[str]], k: int, stops: Iterable[str] = (),
              lex: Mapping[str, SentimentEntry] | None = None) -> list[HotWord]:
    """Top-k words by corpus tf times smoothed idf ``ln((N+1)/(df+1)) + 1``.

    Ranked by tfidf desc, then freq desc, then the word itself.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    stops = set(stops)
    tf, df = Counter(), Counter()
    for toks in tokens_by_doc:
        toks = [t for t in toks if t not in stops and t.strip()]
        tf.update(toks)
        df.update(set(toks))
    n = len(tokens_by_doc)
    lex = lex or {}
    ranked = sorted(
        ((w, tf[w], tf[w] * (math.log((n + 1) / (df[w] + 1)) + 1)) for w in tf),
        key=lambda x: (-x[2], -x[1], x[0]),
    )
    return [HotWord(w, f, s, _profile(lex.get(w))) for w, f, s in ranked[:k]]


def _dump(payload, path: Path) -> None:
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def export_trends(series: Sequence[TrendSeries], out_dir: str | Path, csv_mirror: bool = False) -> Path:
    out_dir = Path(out_dir)
    path = out_dir / "trends.json"
    _dump({"schema": SCHEMA_VERSION, "series": [s.to_dict() for s in series]}, path)
    if csv_mirror:
        with open(out_dir / "trends.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bucket", "n_docs", "n_fallback", "n_lexicon_silent"]
                       + [f"count_{e}" for e in EMOTIONS] + [f"mean_{e}" for e in EMOTIONS])
            for s in series:
                d = s.to_dict()
                w.writerow([d["bucket"], d["n_docs"], d["n_fallback"], d["n_lexicon_silent"]]
                           + [d["counts"][e] for e in EMOTIONS]
                           + [repr(d["mean_scores"][e]) for e in EMOTIONS])
    return path


def export_hot_words(words: Sequence[HotWord], out_dir: str | Path, csv_mirror: bool = False) -> Path:
    out_dir = Path(out_dir)
    path = out_dir / "hotwords.json"
    _dump({"schema": HOTWORDS_SCHEMA_VERSION, "words": [h.to_dict() for h in words]}, path)
    if csv_mirror:
        with open(out_dir / "hotwords.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["word", "freq", "tfidf"] + list(EMOTIONS))
            for h in words:
                w.writerow([h.word, h.freq, repr(h.tfidf)]
                           + [h.emotion_profile.scores[e] for e in EMOTIONS])
    return path
