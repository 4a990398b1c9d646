"""Sentiment lexicon: loading, SO-PMI expansion and bursty new-word mining."""

from __future__ import annotations

import json
import math
import re
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

EMOTIONS = ("Hopeful", "Happy", "Depressed", "Angry", "Frightened", "Disappointed", "Shocked")
INTENSITIES = frozenset({1, 3, 5, 7, 9})
POLARITIES = ("positive", "negative", "neutral")
SOURCES = ("base", "so_pmi", "new_word")
DEFAULT_WINDOW = 5

# placeholder emotion for words whose polarity comes from SO-PMI alone
DEFAULT_EMOTION = {"positive": ("Hopeful", 5), "negative": ("Depressed", 5)}


class ParseError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = str(path)
        self.lineno = lineno


class NotInCorpus(KeyError):
    pass


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class SentimentEntry:
    word: str
    polarity: str
    emotions: Mapping[str, int] = field(default_factory=dict)
    source: str = "base"

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise ValueError(f"bad polarity {self.polarity!r} for {self.word!r}")
        if self.source not in SOURCES:
            raise ValueError(f"bad source {self.source!r}")
        for emo, val in self.emotions.items():
            if emo not in EMOTIONS:
                raise ValueError(f"unknown emotion {emo!r}")
            if val not in INTENSITIES:
                raise ValueError(f"intensity {val!r} not in {{1,3,5,7,9}}")
        if self.polarity == "neutral" and not any(self.emotions.values()):
            raise ValueError(f"{self.word!r} has neither polarity nor emotion")

    @property
    def sign(self) -> int:
        return -1 if self.polarity == "negative" else 1

    def to_tsv(self) -> str:
        emo = ";".join(f"{e}={self.emotions[e]}" for e in EMOTIONS if self.emotions.get(e))
        return f"{self.word}\t{self.polarity}\t{emo}"


class Lexicon(dict):
    """word -> SentimentEntry."""

    def add(self, entry: SentimentEntry) -> None:
        self[entry.word] = entry

    def save(self, path: str | Path) -> None:
        lines = [self[w].to_tsv() for w in sorted(self)]
        Path(path).write_text("".join(ln + "\n" for ln in lines), encoding="utf-8")


def _parse_emotions(field_: str, path, lineno) -> dict[str, int]:
    out = {}
    for part in filter(None, (p.strip() for p in field_.split(";"))):
        name, sep, val = part.partition("=")
        if not sep or name not in EMOTIONS:
            raise ParseError(path, lineno, f"bad emotion field {part!r}")
        try:
            level = int(val)
        except ValueError:
            raise ParseError(path, lineno, f"non-integer intensity {val!r}") from None
        if level not in INTENSITIES:
            raise ParseError(path, lineno, f"intensity {level} not in 1/3/5/7/9")
        out[name] = level
    return out


def load_lexicon_file(path: str | Path, source: str = "base") -> Lexicon:
    lex = Lexicon()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) not in (2, 3) or not cols[0]:
                raise ParseError(path, lineno, "expected word<TAB>polarity[<TAB>emotions]")
            word, polarity = cols[0], cols[1]
            if polarity not in POLARITIES:
                raise ParseError(path, lineno, f"unknown polarity {polarity!r}")
            emotions = _parse_emotions(cols[2], path, lineno) if len(cols) == 3 else {}
            try:
                lex.add(SentimentEntry(word, polarity, emotions, source))
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return lex


def load_merge_dictionaries(files: Sequence[str | Path]) -> Lexicon:
    """Merge lexicon files; on collision the later file wins."""
    merged = Lexicon()
    for path in files:
        merged.update(load_lexicon_file(path))
    return merged


@dataclass
class FunctionWordTables:
    negations: frozenset[str] = frozenset()
    degree_adverbs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.negations = frozenset(self.negations)
        for w, mult in self.degree_adverbs.items():
            if not mult > 0:
                raise ValueError(f"degree multiplier for {w!r} must be > 0")
        both = self.negations & set(self.degree_adverbs)
        if both:
            raise ValueError(f"words both negation and degree adverb: {sorted(both)}")

    @classmethod
    def load(cls, path: str | Path) -> "FunctionWordTables":
        negs, degs = set(), {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) == 2 and cols[1] == "neg":
                    negs.add(cols[0])
                elif len(cols) == 3 and cols[1] == "deg":
                    try:
                        degs[cols[0]] = float(cols[2])
                    except ValueError:
                        raise ParseError(path, lineno, f"bad multiplier {cols[2]!r}") from None
                else:
                    raise ParseError(path, lineno, "expected word<TAB>neg or word<TAB>deg<TAB>x")
        try:
            return cls(frozenset(negs), degs)
        except ValueError as exc:
            raise ParseError(path, 0, str(exc)) from None


@dataclass
class CooccurrenceStats:
    window: int = DEFAULT_WINDOW
    word_count: Counter = field(default_factory=Counter)
    pair_count: Counter = field(default_factory=Counter)
    total_tokens: int = 0

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sequence[str]],
                       window: int = DEFAULT_WINDOW) -> "CooccurrenceStats":
        stats = cls(window=window)
        for sent in sentences:
            stats.add_sentence(sent)
        return stats

    def add_sentence(self, tokens: Sequence[str]) -> None:
        self.word_count.update(tokens)
        self.total_tokens += len(tokens)
        pc = self.pair_count
        for i, a in enumerate(tokens):
            for b in tokens[i + 1:i + 1 + self.window]:
                pc[a, b] += 1
                pc[b, a] += 1

    def merge(self, other: "CooccurrenceStats") -> "CooccurrenceStats":
        if other.window != self.window:
            raise ValueError("cannot merge stats with different windows")
        return CooccurrenceStats(self.window, self.word_count + other.word_count,
                                 self.pair_count + other.pair_count,
                                 self.total_tokens + other.total_tokens)

    def scaled(self, c: int) -> "CooccurrenceStats":
        return CooccurrenceStats(
            self.window,
            Counter({w: n * c for w, n in self.word_count.items()}),
            Counter({p: n * c for p, n in self.pair_count.items()}),
            self.total_tokens * c,
        )

    def pmi(self, a: str, b: str, smoothing: bool = True) -> float:
        joint = self.pair_count.get((a, b), 0) + (1 if smoothing else 0)
        if joint == 0:
            return float("-inf")
        ca = max(self.word_count.get(a, 0), 1)
        cb = max(self.word_count.get(b, 0), 1)
        return math.log2(joint * self.total_tokens / (ca * cb))


def so_pmi(stats: CooccurrenceStats, word: str, pos_seeds: Iterable[str],
           neg_seeds: Iterable[str], smoothing: bool = True) -> float:
    pos_seeds, neg_seeds = sorted(set(pos_seeds)), sorted(set(neg_seeds))
    if not pos_seeds or not neg_seeds:
        raise InvalidInput("both seed sets must be non-empty")
    if stats.word_count.get(word, 0) == 0:
        raise NotInCorpus(word)
    pos = math.fsum(stats.pmi(word, p, smoothing) for p in pos_seeds)
    neg = math.fsum(stats.pmi(word, n, smoothing) for n in neg_seeds)
    return pos - neg


def _expanded_entry(word: str, score: float, source: str, with_emotion: bool) -> SentimentEntry:
    polarity = "positive" if score > 0 else "negative"
    emotions = dict([DEFAULT_EMOTION[polarity]]) if with_emotion else {}
    return SentimentEntry(word, polarity, emotions, source)


def expand_lexicon(lex: Mapping[str, SentimentEntry], stats: CooccurrenceStats,
                   candidates: Iterable[str], pos_seeds, neg_seeds, threshold: float,
                   source: str = "so_pmi", default_emotions: bool = True) -> Lexicon:
    """Add candidates whose |SO-PMI| clears ``threshold``; existing words are kept as-is."""
    if not threshold > 0:
        raise InvalidInput("threshold must be > 0")
    out = Lexicon(lex)
    for word in sorted(set(candidates)):
        if word in out:
            continue
        try:
            score = so_pmi(stats, word, pos_seeds, neg_seeds)
        except NotInCorpus:
            continue
        if abs(score) >= threshold:
            out.add(_expanded_entry(word, score, source, default_emotions))
    return out


# --- time-sliced new-word discovery ---------------------------------------

@dataclass
class MinerParams:
    min_freq: int = 5
    min_cohesion: float = 1.0
    min_boundary_entropy: float = 1.0
    min_burst_ratio: float = 3.0
    min_n: int = 2
    max_n: int = 4

    def __post_init__(self):
        if self.min_freq < 1 or self.min_cohesion < 0 or self.min_boundary_entropy < 0:
            raise InvalidInput("min_freq must be >= 1 and thresholds non-negative")
        if not 2 <= self.min_n <= self.max_n:
            raise InvalidInput("need 2 <= min_n <= max_n")


@dataclass
class NewWordCandidate:
    ngram: str
    freq_today: int
    freq_baseline: float
    cohesion: float
    boundary_entropy: float
    burst_ratio: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


_HAN_RUN = re.compile(r"[㐀-䶿一-鿿豈-﫿]+")
_BOUNDARY = "\x00"


def _units(slice_: Iterable[str]) -> list[str]:
    out = []
    for text in slice_:
        out.extend(_HAN_RUN.findall(text))
    return out


def _ngram_counts(units: Sequence[str], max_n: int) -> Counter:
    counts = Counter()
    for u in units:
        for n in range(1, max_n + 1):
            for i in range(len(u) - n + 1):
                counts[u[i:i + n]] += 1
    return counts


def _entropy(counter: Counter) -> float:
    total = sum(counter.values())
    if total == 0:
        return 0.0
    h = -sum(c / total * math.log2(c / total) for c in counter.values())
    return max(h, 0.0)


def mine_new_words(daily_slices: Sequence[Iterable[str]], params: MinerParams | None = None,
                   known_words: Iterable[str] = ()) -> list[NewWordCandidate]:
    """Character n-grams that burst on the last slice relative to earlier ones.

    Each slice is a sequence of texts (comments or sentences); n-grams never
    cross a non-Han character. Cohesion and boundary entropy are measured on
    the last slice; the baseline is the mean per-slice count of the others.
    """
    params = params or MinerParams()
    slices = [list(s) for s in daily_slices]
    if len(slices) < 2:
        raise InvalidInput("need at least two daily slices")
    known = set(known_words)
    today_units = _units(slices[-1])
    today = _ngram_counts(today_units, params.max_n)
    baseline = Counter()
    for s in slices[:-1]:
        baseline.update(_ngram_counts(_units(s), params.max_n))
    n_base = len(slices) - 1
    n_chars = sum(len(u) for u in today_units)

    left: dict[str, Counter] = defaultdict(Counter)
    right: dict[str, Counter] = defaultdict(Counter)
    for u in today_units:
        padded = _BOUNDARY + u + _BOUNDARY
        for n in range(params.min_n, params.max_n + 1):
            for i in range(1, len(padded) - n):
                g = padded[i:i + n]
                left[g][padded[i - 1]] += 1
                right[g][padded[i + n]] += 1

    out = []
    for g, f in today.items():
        if not params.min_n <= len(g) <= params.max_n or f < params.min_freq or g in known:
            continue
        base = baseline.get(g, 0) / n_base
        burst = (f + 1) / (base + 1)
        if burst < params.min_burst_ratio:
            continue
        cohesion = min(
            math.log2(f * n_chars / (today[g[:i]] * today[g[i:]])) for i in range(1, len(g))
        )
        if cohesion < params.min_cohesion:
            continue
        entropy = min(_entropy(left[g]), _entropy(right[g]))
        if entropy < params.min_boundary_entropy:
            continue
        out.append(NewWordCandidate(g, f, base, cohesion, entropy, burst))
    out.sort(key=lambda c: (-c.burst_ratio, -c.freq_today, c.ngram))
    return out
