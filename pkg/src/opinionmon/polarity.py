"""Naive Bayes positive/negative classifier with bool word weights.

Word weight in a class is the number of that class's documents containing
the word. Conditional probabilities use additive smoothing with
delta = 1/V, V being the total weight over both classes:

    P(w|c) = (weight(w, c) + delta) / (sum_w weight(w, c) + delta * V)
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

CLASSES = ("positive", "negative")
MODEL_VERSION = "nb-v1"


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class PolarityResult:
    label: str
    log_score: dict[str, float]
    confidence: float


@dataclass
class NbModel:
    prior: dict[str, float]
    cond_weight: dict[str, dict[str, float]]  # word -> class -> weight
    class_weight_sum: dict[str, float]
    V: float
    doc_count: dict[str, int] = field(default_factory=dict)
    weighting: str = "bool"
    classes: tuple[str, ...] = CLASSES

    @property
    def delta(self) -> float:
        return 1.0 / self.V

    def weight(self, word: str, cls: str) -> float:
        return self.cond_weight.get(word, {}).get(cls, 0.0)

    def cond_prob(self, word: str, cls: str) -> float:
        d = self.delta
        return (self.weight(word, cls) + d) / (self.class_weight_sum[cls] + d * self.V)

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "classes": list(self.classes),
            "weighting": self.weighting,
            "priors": self.prior,
            "doc_count": self.doc_count,
            "class_weight_sum": self.class_weight_sum,
            "V": self.V,
            "delta": self.delta,
            "vocab": {w: [self.weight(w, c) for c in self.classes] for w in sorted(self.cond_weight)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NbModel":
        if d.get("version") != MODEL_VERSION:
            raise InvalidInput(f"unsupported model version {d.get('version')!r}")
        classes = tuple(d["classes"])
        cond = {w: {c: float(x) for c, x in zip(classes, ws) if x} for w, ws in d["vocab"].items()}
        return cls(prior=dict(d["priors"]), cond_weight=cond,
                   class_weight_sum={c: float(v) for c, v in d["class_weight_sum"].items()},
                   V=float(d["V"]), doc_count=dict(d.get("doc_count", {})),
                   weighting=d.get("weighting", "bool"), classes=classes)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NbModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def nb_train(labeled: Iterable[tuple[Sequence[str], str]], weighting: str = "bool") -> NbModel:
    if weighting not in ("bool", "tf"):
        raise InvalidInput(f"unknown weighting {weighting!r}")
    docs = Counter()
    cond: dict[str, Counter] = {}
    for tokens, label in labeled:
        if label not in CLASSES:
            raise InvalidInput(f"unknown label {label!r}")
        docs[label] += 1
        counts = Counter(tokens) if weighting == "tf" else Counter(set(tokens))
        for w, n in counts.items():
            cond.setdefault(w, Counter())[label] += n
    missing = [c for c in CLASSES if docs[c] == 0]
    if missing:
        raise InvalidInput(f"no training documents for class(es) {missing}")
    n_docs = sum(docs.values())
    sums = {c: float(sum(cw[c] for cw in cond.values())) for c in CLASSES}
    V = sums["positive"] + sums["negative"]
    if V == 0:
        raise InvalidInput("training documents contain no tokens")
    return NbModel(
        prior={c: docs[c] / n_docs for c in CLASSES},
        cond_weight={w: {c: float(n) for c, n in cw.items()} for w, cw in cond.items()},
        class_weight_sum=sums,
        V=V,
        doc_count={c: docs[c] for c in CLASSES},
        weighting=weighting,
    )


def nb_classify(model: NbModel, tokens: Sequence[str]) -> PolarityResult:
    feats = Counter(tokens) if model.weighting == "tf" else Counter(set(tokens))
    scores = {}
    for c in model.classes:
        s = math.log(model.prior[c])
        s += math.fsum(n * math.log(model.cond_prob(w, c)) for w, n in sorted(feats.items()))
        scores[c] = s
    # ties resolve to the first class (positive)
    label = max(model.classes, key=lambda c: (scores[c], -model.classes.index(c)))
    top = scores[label]
    z = math.fsum(math.exp(v - top) for v in scores.values())
    return PolarityResult(label, scores, 1.0 / z)


def read_labeled(path: str | Path) -> list[tuple[list[str], str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out.append((list(rec["tokens"]), rec["label"]))
    return out
