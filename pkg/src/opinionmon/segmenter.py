"""Character-level HMM word segmenter over the B/E/M/S tag set.

Each CJK character is tagged Begin, End, Middle of a multi-character word
or Single; the best tag sequence comes from Viterbi decoding in log space.
Runs of non-CJK characters bypass the model and become atomic tokens.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .textprep import Document, StopwordList, remove_stopwords

STATES = ("B", "E", "M", "S")
B, E, M, S = range(4)
NEG_INF = float("-inf")
MODEL_VERSION = "hmm-v1"

# successors permitted by BEMS well-formedness
ALLOWED = {B: (E, M), E: (B, S), M: (E, M), S: (B, S)}
START_STATES = (B, S)
FINAL_STATES = (E, S)
FORBIDDEN = frozenset((a, b) for a in range(4) for b in range(4) if b not in ALLOWED[a])

EMISSION_SMOOTHING = 1e-6

_CJK = (
    "㐀-䶿一-鿿豈-﫿"
    "\U00020000-\U0002a6df\U0002a700-\U0002ebef\U00030000-\U0003134f"
)
_CJK_RUN = re.compile(f"[{_CJK}]+")
_NON_CJK_TOKEN = re.compile(r"[A-Za-z0-9]+|\s+|.", re.DOTALL)


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class HmmModel:
    initial: tuple[float, ...]
    transition: tuple[tuple[float, ...], ...]
    emission: dict[str, tuple[float, ...]]
    unk_emission: tuple[float, ...]
    states: tuple[str, ...] = STATES

    def emit(self, ch: str) -> tuple[float, ...]:
        return self.emission.get(ch, self.unk_emission)

    def shifted(self, offset: float) -> "HmmModel":
        """Every log-probability plus ``offset`` (i.e. probabilities scaled)."""
        add = lambda row: tuple(v + offset for v in row)  # noqa: E731
        return HmmModel(
            initial=add(self.initial),
            transition=tuple(add(r) for r in self.transition),
            emission={c: add(r) for c, r in self.emission.items()},
            unk_emission=add(self.unk_emission),
        )

    def to_dict(self) -> dict:
        enc = lambda row: [None if v == NEG_INF else v for v in row]  # noqa: E731
        return {
            "version": MODEL_VERSION,
            "states": list(self.states),
            "initial": enc(self.initial),
            "transition": [enc(r) for r in self.transition],
            "emission": {c: enc(self.emission[c]) for c in sorted(self.emission)},
            "unk_emission": enc(self.unk_emission),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HmmModel":
        if d.get("version") != MODEL_VERSION:
            raise InvalidInput(f"unsupported model version {d.get('version')!r}")
        if tuple(d["states"]) != STATES:
            raise InvalidInput(f"state order must be {STATES}")
        dec = lambda row: tuple(NEG_INF if v is None else float(v) for v in row)  # noqa: E731
        return cls(
            initial=dec(d["initial"]),
            transition=tuple(dec(r) for r in d["transition"]),
            emission={c: dec(r) for c, r in d["emission"].items()},
            unk_emission=dec(d["unk_emission"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "HmmModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def word_tags(word: str) -> list[int]:
    n = len(word)
    if n == 1:
        return [S]
    return [B] + [M] * (n - 2) + [E]


def tags_to_words(text: str, tags: Sequence[int]) -> list[str]:
    words, start = [], 0
    for i, t in enumerate(tags):
        if t in (E, S):
            words.append(text[start:i + 1])
            start = i + 1
    if start < len(text):
        words.append(text[start:])
    return words


def _log(x: float) -> float:
    return math.log(x) if x > 0 else NEG_INF


def _normalize(counts: Sequence[float], support: Iterable[int]) -> tuple[float, ...]:
    support = tuple(support)
    total = sum(counts[s] for s in support)
    if total == 0:
        # no evidence for this row: uniform over the structurally allowed cells
        return tuple(_log(1 / len(support)) if s in support else NEG_INF for s in range(4))
    return tuple(_log(counts[s] / total) if s in support else NEG_INF for s in range(4))


def hmm_train(corpus: Iterable[Sequence[str]], smoothing: float = EMISSION_SMOOTHING) -> HmmModel:
    """Maximum-likelihood BEMS model from pre-segmented sentences.

    Emissions reserve an unknown-character slot whose pseudo-count is the
    number of singleton characters in that state, and every cell gets an
    additive pseudo-count totalling ``smoothing`` of the state's mass.
    """
    init = [0] * 4
    trans = [[0] * 4 for _ in range(4)]
    emit: list[Counter] = [Counter() for _ in range(4)]
    n_sent = 0
    for sentence in corpus:
        chars, tags = [], []
        for word in sentence:
            if not word:
                raise InvalidInput("empty word in training sentence")
            chars.extend(word)
            tags.extend(word_tags(word))
        if not tags:
            continue
        n_sent += 1
        init[tags[0]] += 1
        for a, b in zip(tags, tags[1:]):
            trans[a][b] += 1
        for ch, t in zip(chars, tags):
            emit[t][ch] += 1
    if n_sent == 0:
        raise InvalidInput("training corpus is empty")

    vocab = sorted(set().union(*emit))
    unk = []
    columns = []
    for s in range(4):
        n_s = sum(emit[s].values())
        if n_s == 0:
            # state never observed: only the smoothing mass, spread uniformly
            floor = _log(smoothing / (len(vocab) + 1))
            columns.append({ch: floor for ch in vocab})
            unk.append(floor)
            continue
        singletons = sum(1 for c in emit[s].values() if c == 1)
        lam = smoothing * n_s / (len(vocab) + 1)
        denom = n_s + singletons + smoothing * n_s
        columns.append({ch: math.log((emit[s][ch] + lam) / denom) for ch in vocab})
        unk.append(math.log((singletons + lam) / denom))

    return HmmModel(
        initial=_normalize(init, START_STATES),
        transition=tuple(_normalize(trans[a], ALLOWED[a]) for a in range(4)),
        emission={ch: tuple(columns[s][ch] for s in range(4)) for ch in vocab},
        unk_emission=tuple(unk),
    )


@dataclass
class ViterbiTrellis:
    weight: list[list[float]] = field(default_factory=list)
    path: list[list[int | None]] = field(default_factory=list)


def viterbi_trellis(model: HmmModel, chars: str) -> ViterbiTrellis:
    """Fill best log-weights and backpointers; ties go to the lowest state index."""
    trellis = ViterbiTrellis()
    if not chars:
        return trellis
    A = model.transition
    e0 = model.emit(chars[0])
    trellis.weight.append([model.initial[s] + e0[s] for s in range(4)])
    trellis.path.append([None] * 4)
    for ch in chars[1:]:
        prev = trellis.weight[-1]
        em = model.emit(ch)
        row, back = [], []
        for s in range(4):
            best, arg = NEG_INF, 0
            for p in range(4):
                v = prev[p] + A[p][s]
                if v > best:
                    best, arg = v, p
            row.append(best + em[s])
            back.append(arg)
        trellis.weight.append(row)
        trellis.path.append(back)
    return trellis


def viterbi_decode(model: HmmModel, chars: str) -> tuple[list[int], float]:
    """Best tag sequence ending in E or S, with its log-probability.

    If no sequence has finite probability every character is tagged S.
    """
    if not chars:
        return [], 0.0
    trellis = viterbi_trellis(model, chars)
    last = trellis.weight[-1]
    final = max(FINAL_STATES, key=lambda s: (last[s], -s))
    if last[final] == NEG_INF:
        return [S] * len(chars), NEG_INF
    tags = [final]
    for t in range(len(chars) - 1, 0, -1):
        tags.append(trellis.path[t][tags[-1]])
    tags.reverse()
    return tags, last[final]


def path_log_prob(model: HmmModel, chars: str, tags: Sequence[int]) -> float:
    """Score of one tag sequence, accumulated in the same order as the trellis."""
    score = model.initial[tags[0]] + model.emit(chars[0])[tags[0]]
    for t in range(1, len(chars)):
        score = score + model.transition[tags[t - 1]][tags[t]] + model.emit(chars[t])[tags[t]]
    return score


def split_runs(text: str) -> list[tuple[str, bool]]:
    """Split into (run, is_cjk) pieces; non-CJK pieces are already atomic tokens."""
    out = []
    pos = 0
    for m in _CJK_RUN.finditer(text):
        if m.start() > pos:
            out.extend((t, False) for t in _NON_CJK_TOKEN.findall(text[pos:m.start()]))
        out.append((m.group(), True))
        pos = m.end()
    if pos < len(text):
        out.extend((t, False) for t in _NON_CJK_TOKEN.findall(text[pos:]))
    return out


def _decode_run(model: HmmModel, run: str, protected: Sequence[str]) -> list[str]:
    if protected:
        for word in protected:
            pos = run.find(word)
            if pos >= 0:
                return (_decode_run(model, run[:pos], protected) + [word]
                        + _decode_run(model, run[pos + len(word):], protected))
    if not run:
        return []
    tags, _ = viterbi_decode(model, run)
    return tags_to_words(run, tags)


def viterbi_segment(model: HmmModel, text: str, protected: Iterable[str] = ()) -> list[str]:
    """Segment ``text``; the output always concatenates back to ``text``.

    Words in ``protected`` (longest first) are cut out of CJK runs before
    decoding. This is how mined new words reach the token stream.
    """
    protected = sorted(set(protected), key=lambda w: (-len(w), w))
    words = []
    for run, is_cjk in split_runs(text):
        if is_cjk:
            words.extend(_decode_run(model, run, protected))
        else:
            words.append(run)
    return words


def segment_pipeline(doc: Document, model: HmmModel, stops: StopwordList,
                     protected: Iterable[str] = ()) -> list[str]:
    if not doc.clean_text:
        return []
    tokens = [t for t in viterbi_segment(model, doc.clean_text, protected) if not t.isspace()]
    return remove_stopwords(tokens, stops)


def read_corpus(path: str | Path) -> list[list[str]]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            words = line.split()
            if words:
                sentences.append(words)
    return sentences


def word_f1(gold: Sequence[str], pred: Sequence[str]) -> float:
    """Span-level word F1 between two segmentations of the same string."""
    def spans(words):
        out, i = set(), 0
        for w in words:
            out.add((i, i + len(w)))
            i += len(w)
        return out

    g, p = spans(gold), spans(pred)
    hit = len(g & p)
    if hit == 0:
        return 0.0
    prec, rec = hit / len(p), hit / len(g)
    return 2 * prec * rec / (prec + rec)
