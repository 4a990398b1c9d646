"""Compare a scorer and a baseline against hand-labeled truth.

Two error views are reported per scorer:

* per sample, half the L1 distance between the mean normalized |emotion|
  distribution of the scorer and the truth's one-hot proportions;
* per comment, ``|p - t|`` where p is the positive share of the scorer's
  absolute emotion mass (0.5 when silent) and t is 1 for positive truth,
  0 for negative; these are bucketed at 0.2.

Comments whose truth is UNJUDGEABLE, or on which the scorer raises, are
counted in ``unjudgeable_rate`` and nowhere else.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .emotion import EmotionVector, score_emotions
from .lexicon import EMOTIONS
from .textprep import Document

UNJUDGEABLE = "UNJUDGEABLE"
GRADIENT_BOUNDARY = 0.2
N_SAMPLES = 8
REPORT_VERSION = "eval-v1"

Scorer = Callable[[Document], EmotionVector]

METRIC_NOTES = {
    "sample_error": "0.5 * L1 between mean normalized |emotion| vectors and truth proportions",
    "comment_error": "|positive share of |emotion| mass - truth polarity (1 pos, 0 neg)|",
    "boundary": GRADIENT_BOUNDARY,
}


@dataclass(frozen=True)
class TruthLabel:
    polarity: str
    dominant_emotion: str

    @property
    def judgeable(self) -> bool:
        return self.dominant_emotion != UNJUDGEABLE

    @property
    def target(self) -> float:
        return {"positive": 1.0, "negative": 0.0}.get(self.polarity, 0.5)


@dataclass
class SamplePartition:
    samples: list[list[Document]]
    truth_labels: dict[str, TruthLabel]

    def __post_init__(self):
        seen = set()
        for sample in self.samples:
            for doc in sample:
                if doc.id in seen:
                    raise ValueError(f"comment {doc.id!r} appears in more than one sample")
                if doc.id not in self.truth_labels:
                    raise ValueError(f"comment {doc.id!r} has no truth label")
                seen.add(doc.id)


def make_partition(docs: Sequence[Document], truth: Mapping[str, TruthLabel],
                   n_samples: int = N_SAMPLES, seed: int = 0) -> SamplePartition:
    """Shuffle with a seeded RNG and deal into ``n_samples`` near-equal samples."""
    order = sorted(docs, key=lambda d: d.id)
    random.Random(seed).shuffle(order)
    samples = [order[i::n_samples] for i in range(n_samples)]
    return SamplePartition(samples, dict(truth))


def emotion_distribution(vec: EmotionVector) -> list[float]:
    mags = [abs(vec.scores[e]) for e in EMOTIONS]
    total = math.fsum(mags)
    return [m / total for m in mags] if total else [0.0] * len(EMOTIONS)


def positive_share(vec: EmotionVector) -> float:
    pos = math.fsum(max(vec.scores[e], 0.0) for e in EMOTIONS)
    total = math.fsum(abs(vec.scores[e]) for e in EMOTIONS)
    return pos / total if total else 0.5


def _mean(rows: list[list[float]]) -> list[float]:
    if not rows:
        return [0.0] * len(EMOTIONS)
    return [math.fsum(sorted(col)) / len(rows) for col in zip(*rows)]


@dataclass
class ErrorReport:
    per_sample_error: list[float] = field(default_factory=list)
    per_sample_proportions: list[list[float]] = field(default_factory=list)
    gradient_buckets: dict[str, int] = field(default_factory=lambda: {"lt_0.2": 0, "ge_0.2": 0})
    unjudgeable_rate: float = 0.0
    n_comments: int = 0
    n_judged: int = 0
    n_unjudgeable: int = 0


@dataclass
class ComparisonReport:
    system: ErrorReport
    baseline: ErrorReport
    truth_proportions: list[list[float]]
    metrics: dict = field(default_factory=lambda: dict(METRIC_NOTES))
    version: str = REPORT_VERSION

    def to_dict(self) -> dict:
        return {"version": self.version, "metrics": self.metrics, "emotions": list(EMOTIONS),
                "truth_proportions": self.truth_proportions,
                "system": asdict(self.system), "baseline": asdict(self.baseline)}

    def to_text(self) -> str:
        rows = [
            ("error < 0.2", self.system.gradient_buckets["lt_0.2"],
             self.baseline.gradient_buckets["lt_0.2"]),
            ("error >= 0.2", self.system.gradient_buckets["ge_0.2"],
             self.baseline.gradient_buckets["ge_0.2"]),
            ("unjudgeable", self.system.n_unjudgeable, self.baseline.n_unjudgeable),
        ]
        lines = [f"{'bucket':<14}{'system':>10}{'baseline':>10}"]
        lines += [f"{name:<14}{a:>10}{b:>10}" for name, a, b in rows]
        lines.append("")
        lines.append(f"{'sample':<14}{'system':>10}{'baseline':>10}")
        for i, (a, b) in enumerate(zip(self.system.per_sample_error, self.baseline.per_sample_error)):
            lines.append(f"{i + 1:<14}{a:>10.4f}{b:>10.4f}")
        lines.append("")
        lines.append(f"unjudgeable rate: system {self.system.unjudgeable_rate:.4f}, "
                     f"baseline {self.baseline.unjudgeable_rate:.4f}")
        return "\n".join(lines) + "\n"


def _truth_proportions(partition: SamplePartition) -> list[list[float]]:
    out = []
    for sample in partition.samples:
        rows = []
        for doc in sample:
            label = partition.truth_labels[doc.id]
            if label.judgeable:
                rows.append([1.0 if e == label.dominant_emotion else 0.0 for e in EMOTIONS])
        out.append(_mean(rows))
    return out


def evaluate(partition: SamplePartition, scorer: Scorer,
             truth_props: list[list[float]] | None = None) -> ErrorReport:
    truth_props = truth_props or _truth_proportions(partition)
    report = ErrorReport()
    for sample, tprop in zip(partition.samples, truth_props):
        rows = []
        for doc in sample:
            report.n_comments += 1
            label = partition.truth_labels[doc.id]
            if not label.judgeable:
                report.n_unjudgeable += 1
                continue
            try:
                vec = scorer(doc)
            except Exception:
                report.n_unjudgeable += 1
                continue
            report.n_judged += 1
            rows.append(emotion_distribution(vec))
            err = abs(positive_share(vec) - label.target)
            report.gradient_buckets["lt_0.2" if err < GRADIENT_BOUNDARY else "ge_0.2"] += 1
        prop = _mean(rows)
        report.per_sample_proportions.append(prop)
        report.per_sample_error.append(0.5 * math.fsum(abs(a - b) for a, b in zip(prop, tprop)))
    if report.n_comments:
        report.unjudgeable_rate = report.n_unjudgeable / report.n_comments
    return report


def run_comparison(partition: SamplePartition, system: Scorer, baseline: Scorer) -> ComparisonReport:
    truth_props = _truth_proportions(partition)
    return ComparisonReport(
        system=evaluate(partition, system, truth_props),
        baseline=evaluate(partition, baseline, truth_props),
        truth_proportions=truth_props,
    )


# --- stock scorers ---------------------------------------------------------

def uniform_baseline(doc: Document) -> EmotionVector:
    return EmotionVector({e: 1 / len(EMOTIONS) for e in EMOTIONS}, 1.0)


class TruthOracle:
    """Scorer that echoes the truth label; for self-comparison checks."""

    def __init__(self, truth: Mapping[str, TruthLabel]):
        self.truth = truth

    def __call__(self, doc: Document) -> EmotionVector:
        label = self.truth[doc.id]
        sign = {"positive": 1.0, "negative": -1.0}.get(label.polarity)
        if sign is None or not label.judgeable:
            raise ValueError(f"no usable truth for {doc.id!r}")
        scores = {e: (sign if e == label.dominant_emotion else 0.0) for e in EMOTIONS}
        return EmotionVector(scores, sign)


class LexiconBaseline:
    """Lexicon walk with no NB fallback."""

    def __init__(self, tokenize: Callable[[Document], list[str]], lex, fw):
        self.tokenize, self.lex, self.fw = tokenize, lex, fw

    def __call__(self, doc: Document) -> EmotionVector:
        return score_emotions(self.tokenize(doc), self.lex, self.fw)


def read_truth(path: str | Path) -> tuple[list[Document], dict[str, TruthLabel]]:
    """Truth JSONL: {id, text, polarity, dominant_emotion | "UNJUDGEABLE"}."""
    docs, truth = [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            emo = rec.get("dominant_emotion", UNJUDGEABLE)
            if emo not in EMOTIONS and emo != UNJUDGEABLE:
                raise ValueError(f"unknown emotion {emo!r} for {rec['id']!r}")
            truth[rec["id"]] = TruthLabel(rec.get("polarity", ""), emo)
            text = rec.get("text", "")
            docs.append(Document.from_raw(rec["id"], text, source="truth",
                                          fetched_at=rec.get("fetched_at", "")))
    return docs, truth
