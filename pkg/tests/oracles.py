"""Independent reference computations used by the test-suite.

Nothing here imports the code paths it checks, apart from data types.
"""

import itertools
import math
import random
from collections import Counter
from fractions import Fraction

from opinionmon.segmenter import HmmModel

NEG_INF = float("-inf")
B, E, M, S = range(4)


def compositions(n):
    """All ways to cut n characters into words, as word-length tuples."""
    for cuts in itertools.product((0, 1), repeat=n - 1):
        lengths, run = [], 1
        for c in cuts:
            if c:
                lengths.append(run)
                run = 1
            else:
                run += 1
        lengths.append(run)
        yield tuple(lengths)


def lengths_to_tags(lengths):
    tags = []
    for n in lengths:
        tags.extend([S] if n == 1 else [B] + [M] * (n - 2) + [E])
    return tags


def well_formed(tags):
    """Brute structural check of a BEMS sequence, written independently."""
    if tags[0] not in (B, S) or tags[-1] not in (E, S):
        return False
    for a, b in zip(tags, tags[1:]):
        inside = a in (B, M)
        if inside != (b in (M, E)):
            return False
    return True


def score(model: HmmModel, text, tags):
    em = lambda ch: model.emission.get(ch, model.unk_emission)  # noqa: E731
    s = model.initial[tags[0]] + em(text[0])[tags[0]]
    for t in range(1, len(text)):
        s = s + model.transition[tags[t - 1]][tags[t]] + em(text[t])[tags[t]]
    return s


def brute_force_best(model, text):
    """Max score over every well-formed tag sequence (via segmentations)."""
    best, best_tags = NEG_INF, None
    for lengths in compositions(len(text)):
        tags = lengths_to_tags(lengths)
        v = score(model, text, tags)
        if best_tags is None or v > best:
            best, best_tags = v, tags
    return best, best_tags


def random_hmm(rng: random.Random, alphabet):
    def dist(k):
        xs = [rng.random() + 1e-3 for _ in range(k)]
        z = sum(xs)
        return [math.log(x / z) for x in xs]

    p = dist(2)
    initial = (p[0], NEG_INF, NEG_INF, p[1])
    allowed = {B: (E, M), E: (B, S), M: (E, M), S: (B, S)}
    trans = []
    for a in range(4):
        row = [NEG_INF] * 4
        for s, v in zip(allowed[a], dist(2)):
            row[s] = v
        trans.append(tuple(row))
    cols = [dist(len(alphabet) + 1) for _ in range(4)]
    emission = {ch: tuple(cols[s][i] for s in range(4)) for i, ch in enumerate(alphabet)}
    unk = tuple(cols[s][-1] for s in range(4))
    return HmmModel(initial, tuple(trans), emission, unk)


# --- PMI -------------------------------------------------------------------

def brute_pmi_stats(sentences, window):
    """Count unigrams and windowed co-occurrences by scanning position pairs."""
    uni = Counter()
    pair = Counter()
    total = 0
    for sent in sentences:
        total += len(sent)
        for i in range(len(sent)):
            uni[sent[i]] += 1
            for j in range(len(sent)):
                if i != j and abs(i - j) <= window:
                    pair[sent[i], sent[j]] += 1
    return uni, pair, total


def brute_so_pmi(sentences, window, word, pos, neg, smoothing=True):
    uni, pair, total = brute_pmi_stats(sentences, window)
    add = 1 if smoothing else 0

    def pmi(a, b):
        return math.log2((pair[a, b] + add) * total / (max(uni[a], 1) * max(uni[b], 1)))

    return sum(pmi(word, p) for p in pos) - sum(pmi(word, n) for n in neg)


# --- Naive Bayes -----------------------------------------------------------

def exact_nb_posterior(labeled, tokens):
    """Exact rational posterior P(positive | tokens) from bool-weight counts."""
    classes = ("positive", "negative")
    docs = Counter(lbl for _, lbl in labeled)
    weight = Counter()
    for toks, lbl in labeled:
        for w in set(toks):
            weight[w, lbl] += 1
    sums = {c: sum(v for (w, lbl), v in weight.items() if lbl == c) for c in classes}
    V = sums["positive"] + sums["negative"]
    delta = Fraction(1, V)
    n = sum(docs.values())
    joint = {}
    for c in classes:
        p = Fraction(docs[c], n)
        for w in set(tokens):
            p *= (weight[w, c] + delta) / (sums[c] + delta * V)
        joint[c] = p
    return joint["positive"] / (joint["positive"] + joint["negative"])
