"""Command-line orchestrator: one subcommand per pipeline stage.

Every stage reads its inputs from, and writes its outputs to, the output
directory given by ``--out``; file names are fixed (see ``ARTIFACTS``).

Exit codes: 0 ok, 2 input parse error, 3 missing upstream artifact,
4 invalid config.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from . import data_path
from .emotion import ScorerConfig, document_emotion, score_with_fallback
from .evalharness import LexiconBaseline, make_partition, read_truth, run_comparison, uniform_baseline
from .frontier import BloomFilter, Frontier, FrontierItem, InvalidParameter, OfferResult
from .lexicon import (
    CooccurrenceStats,
    FunctionWordTables,
    Lexicon,
    MinerParams,
    ParseError,
    expand_lexicon,
    load_lexicon_file,
    load_merge_dictionaries,
    mine_new_words,
)
from .polarity import NbModel, nb_classify, nb_train
from .segmenter import HmmModel, hmm_train, read_corpus, segment_pipeline
from .textprep import Document, StopwordList
from .trends import aggregate_counted, export_hot_words, export_trends, hot_words, to_utc_day

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("opinionmon")

EXIT_OK, EXIT_PARSE, EXIT_MISSING, EXIT_CONFIG = 0, 2, 3, 4

ARTIFACTS = {
    "bloom": "bloom.blmf",
    "intake": "intake.jsonl",
    "documents": "documents.jsonl",
    "ingest_stats": "ingest_stats.json",
    "hmm": "hmm.json",
    "tokens": "tokens.jsonl",
    "new_words": "new_words.jsonl",
    "lexicon": "lexicon.tsv",
    "nb": "nb.json",
    "polarity": "polarity.jsonl",
    "results": "results.jsonl",
    "report_json": "report.json",
    "report_txt": "report.txt",
}


class InputError(Exception):
    exit_code = EXIT_PARSE


class MissingArtifact(Exception):
    exit_code = EXIT_MISSING


class ConfigError(Exception):
    exit_code = EXIT_CONFIG


# --- configuration ---------------------------------------------------------

@dataclass
class PathsConfig:
    corpus: Path = field(default_factory=lambda: data_path("comments.jsonl"))
    hmm_corpus: Path = field(default_factory=lambda: data_path("hmm_corpus.txt"))
    stopwords: Path = field(default_factory=lambda: data_path("stopwords.txt"))
    function_words: Path = field(default_factory=lambda: data_path("function_words.tsv"))
    lexicons: tuple[Path, ...] = field(
        default_factory=lambda: (data_path("lexicon_base.tsv"), data_path("lexicon_weibo.tsv")))
    nb_train: Path = field(default_factory=lambda: data_path("nb_train.jsonl"))
    truth: Path = field(default_factory=lambda: data_path("truth.jsonl"))


@dataclass
class BloomConfig:
    m: int = 1 << 20
    k: int = 7
    seed: int = 0


@dataclass
class NbConfig:
    weighting: str = "bool"


@dataclass
class ExpandConfig:
    # frequency-balanced on the shipped corpus; unbalanced seed counts shift
    # every add-1 smoothed score by a constant
    pos_seeds: tuple[str, ...] = ("期待", "开心", "希望", "快乐", "相信")
    neg_seeds: tuple[str, ...] = ("恐慌", "压抑", "失望", "可怕", "可恶")
    threshold: float = 3.0
    min_count: int = 3
    window: int = 5


@dataclass
class ExportConfig:
    csv: bool = False
    hot_k: int = 20


@dataclass
class EvalConfig:
    baseline: str = "lexicon"
    seed: int = 0


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    bloom: BloomConfig = field(default_factory=BloomConfig)
    nb: NbConfig = field(default_factory=NbConfig)
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    miner: MinerParams = field(default_factory=MinerParams)
    expand: ExpandConfig = field(default_factory=ExpandConfig)
    export: ExportConfig = field(default_factory=ExportConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def validate(self) -> None:
        p = self.paths
        for f in fields(p):
            value = getattr(p, f.name)
            for path in (value if isinstance(value, tuple) else (value,)):
                if not Path(path).is_file():
                    raise ConfigError(f"paths.{f.name}: no such file {path}")
        if not p.lexicons:
            raise ConfigError("paths.lexicons must list at least one file")
        if self.bloom.m < 1 or self.bloom.k < 1 or not 0 <= self.bloom.seed < 2 ** 64:
            raise ConfigError("bloom: need m >= 1, k >= 1, 0 <= seed < 2^64")
        if self.nb.weighting not in ("bool", "tf"):
            raise ConfigError("nb.weighting must be 'bool' or 'tf'")
        e = self.expand
        if not e.threshold > 0 or e.min_count < 1 or e.window < 1:
            raise ConfigError("expand: need threshold > 0, min_count >= 1, window >= 1")
        if not e.pos_seeds or not e.neg_seeds or set(e.pos_seeds) & set(e.neg_seeds):
            raise ConfigError("expand: seed sets must be non-empty and disjoint")
        if self.export.hot_k < 1:
            raise ConfigError("export.hot_k must be >= 1")
        if self.eval.baseline not in ("lexicon", "uniform"):
            raise ConfigError("eval.baseline must be 'lexicon' or 'uniform'")


def _section(cls, raw: dict, name: str, base: Path):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if cls is PathsConfig:
            if key == "lexicons":
                if not isinstance(value, list):
                    raise ConfigError("paths.lexicons must be a list")
                value = tuple(base / v for v in value)
            else:
                value = base / value
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def load_config(path: str | Path | None = None, seed: int | None = None) -> PipelineConfig:
    """Defaults, then the TOML file (paths relative to it), then ``--seed``."""
    sections = {f.name: f.type for f in fields(PipelineConfig)}
    cfg = PipelineConfig()
    if path is not None:
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        unknown = sorted(set(raw) - set(sections))
        if unknown:
            raise ConfigError(f"unknown config sections: {', '.join(unknown)}")
        classes = {f.name: type(getattr(cfg, f.name)) for f in fields(cfg)}
        for name, table in raw.items():
            setattr(cfg, name, _section(classes[name], table, name, path.parent))
    if seed is not None:
        cfg.bloom = replace(cfg.bloom, seed=seed)
        cfg.eval = replace(cfg.eval, seed=seed)
    cfg.validate()
    return cfg


# --- io helpers ------------------------------------------------------------

def _require(out: Path, name: str) -> Path:
    path = out / ARTIFACTS[name]
    if not path.is_file():
        raise MissingArtifact(f"missing upstream artifact: {path}")
    return path


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise InputError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, rec


def _write_jsonl(path: Path, records) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def _utc_stamp(ts: str) -> str:
    # enqueued_at comes from the record so reruns are byte-identical
    try:
        dt = datetime.fromisoformat(ts.replace("Z", "+00:00"))
    except (AttributeError, ValueError):
        return "1970-01-01T00:00:00+00:00"
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


def _documents(out: Path) -> list[Document]:
    path = _require(out, "documents")
    return [Document(**rec) for _, rec in _iter_jsonl(path)]


def _new_words(out: Path) -> list[str]:
    path = out / ARTIFACTS["new_words"]
    if not path.is_file():
        return []
    return [rec["ngram"] for _, rec in _iter_jsonl(path)]


def _load(loader, path: Path):
    try:
        return loader(path)
    except ParseError as exc:
        raise InputError(str(exc)) from None
    except (ValueError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from None


# --- stages ----------------------------------------------------------------

def cmd_ingest(cfg: PipelineConfig, out: Path, input_path: Path | None = None) -> dict:
    """Dedup records by id through the Bloom frontier and clean the accepted ones."""
    src = Path(input_path) if input_path else cfg.paths.corpus
    if not src.is_file():
        raise InputError(f"cannot read input {src}")
    bloom_path = out / ARTIFACTS["bloom"]
    if bloom_path.is_file():
        bloom = BloomFilter.load(bloom_path)
        if (bloom.m, bloom.k, bloom.seed) != (cfg.bloom.m, cfg.bloom.k, cfg.bloom.seed):
            raise ConfigError(f"{bloom_path} was built with different bloom parameters")
    else:
        bloom = BloomFilter(cfg.bloom.m, cfg.bloom.k, cfg.bloom.seed)
    frontier = Frontier(bloom, out / ARTIFACTS["intake"])
    accepted = []
    for lineno, rec in _iter_jsonl(src):
        try:
            doc_id = str(rec["id"])
            raw = rec.get("raw", rec.get("text", ""))
            item = FrontierItem(doc_id, ARTIFACTS["documents"], _utc_stamp(rec.get("fetched_at") or ""))
        except (KeyError, InvalidParameter) as exc:
            raise InputError(f"{src}:{lineno}: bad record ({exc})") from None
        if frontier.offer(item) is OfferResult.ACCEPTED:
            accepted.append(Document.from_raw(
                item.key, raw, source=rec.get("source", ""), fetched_at=rec.get("fetched_at") or "",
                content_type=rec.get("content_type", "plain"), lang_hint=rec.get("lang_hint")))
    with open(out / ARTIFACTS["documents"], "a", encoding="utf-8") as fh:
        for doc in accepted:
            fh.write(doc.to_json() + "\n")
    bloom.save(bloom_path)
    stats = {"accepted": frontier.accepted, "duplicates": frontier.duplicates}
    _dump_json(out / ARTIFACTS["ingest_stats"], stats)
    return stats


def cmd_train_hmm(cfg: PipelineConfig, out: Path) -> dict:
    corpus = read_corpus(cfg.paths.hmm_corpus)
    hmm_train(corpus).save(out / ARTIFACTS["hmm"])
    return {"sentences": len(corpus)}


def _segmenter(cfg: PipelineConfig, out: Path):
    model = _load(HmmModel.load, _require(out, "hmm"))
    stops = StopwordList.load(cfg.paths.stopwords)
    return model, stops


def cmd_segment(cfg: PipelineConfig, out: Path) -> dict:
    docs = _documents(out)
    model, stops = _segmenter(cfg, out)
    n = _write_jsonl(out / ARTIFACTS["tokens"], (
        {"id": d.id, "fetched_at": d.fetched_at, "tokens": segment_pipeline(d, model, stops)}
        for d in docs))
    return {"documents": n}


def _read_tokens(out: Path) -> list[dict]:
    return [rec for _, rec in _iter_jsonl(_require(out, "tokens"))]


def cmd_mine_words(cfg: PipelineConfig, out: Path) -> dict:
    """Burst n-grams on the latest UTC day against all earlier days."""
    docs = _documents(out)
    by_day = defaultdict(list)
    for d in docs:
        day = to_utc_day(d.fetched_at)
        if day is not None:
            by_day[day].append(d.clean_text)
    days = sorted(by_day)
    found = []
    if len(days) >= 2:
        known = set(load_merge_dictionaries(cfg.paths.lexicons))
        known.update(w for s in read_corpus(cfg.paths.hmm_corpus) for w in s)
        found = mine_new_words([by_day[d] for d in days], cfg.miner, known)
    else:
        log.warning("mine-words needs at least two days of documents; found %d", len(days))
    _write_jsonl(out / ARTIFACTS["new_words"], (asdict(c) for c in found))
    return {"days": len(days), "new_words": len(found)}


def cmd_expand_lexicon(cfg: PipelineConfig, out: Path) -> dict:
    """Merge base dictionaries, then add SO-PMI words from the corpus and mined new words."""
    lex = _load(load_merge_dictionaries, tuple(cfg.paths.lexicons))
    fw = _load(FunctionWordTables.load, cfg.paths.function_words)
    docs = _documents(out)
    model, stops = _segmenter(cfg, out)
    new_words = _new_words(out)
    sentences = [segment_pipeline(d, model, stops, new_words) for d in docs]
    stats = CooccurrenceStats.from_sentences(sentences, cfg.expand.window)
    e = cfg.expand
    seeds = set(e.pos_seeds) | set(e.neg_seeds)

    def near_seed(w):
        # smoothing alone would score words that never meet a seed
        return any(stats.pair_count.get((w, s), 0) for s in seeds)

    n_base = len(lex)
    lex = expand_lexicon(lex, stats, filter(near_seed, new_words), e.pos_seeds, e.neg_seeds,
                         e.threshold, source="new_word")
    n_new = len(lex) - n_base
    counts = Counter(t for s in sentences for t in s)
    candidates = [w for w, c in counts.items()
                  if c >= e.min_count and len(w) >= 2 and to_han(w) and near_seed(w)
                  and w not in fw.negations and w not in fw.degree_adverbs]
    lex = expand_lexicon(lex, stats, candidates, e.pos_seeds, e.neg_seeds, e.threshold)
    Lexicon(lex).save(out / ARTIFACTS["lexicon"])
    return {"base": n_base, "new_word": n_new, "so_pmi": len(lex) - n_base - n_new}


def to_han(word: str) -> bool:
    return all("一" <= ch <= "鿿" or "㐀" <= ch <= "䶿" for ch in word)


def cmd_train_nb(cfg: PipelineConfig, out: Path) -> dict:
    labeled = []
    for lineno, rec in _iter_jsonl(cfg.paths.nb_train):
        try:
            labeled.append((list(rec["tokens"]), rec["label"]))
        except KeyError as exc:
            raise InputError(f"{cfg.paths.nb_train}:{lineno}: missing field {exc}") from None
    try:
        model = nb_train(labeled, cfg.nb.weighting)
    except ValueError as exc:
        raise InputError(f"{cfg.paths.nb_train}: {exc}") from None
    model.save(out / ARTIFACTS["nb"])
    return {"documents": len(labeled), "vocabulary": model.V}


def cmd_classify(cfg: PipelineConfig, out: Path) -> dict:
    records = _read_tokens(out)
    nb = _load(NbModel.load, _require(out, "nb"))
    counts = Counter()

    def rows():
        for rec in records:
            r = nb_classify(nb, rec["tokens"])
            counts[r.label] += 1
            yield {"id": rec["id"], "label": r.label, "confidence": r.confidence, "log_score": r.log_score}

    _write_jsonl(out / ARTIFACTS["polarity"], rows())
    return dict(sorted(counts.items()))


def _scoring_inputs(cfg: PipelineConfig, out: Path):
    model, stops = _segmenter(cfg, out)
    lex = _load(load_lexicon_file, _require(out, "lexicon"))
    fw = _load(FunctionWordTables.load, cfg.paths.function_words)
    nb_path = out / ARTIFACTS["nb"]
    if cfg.scorer.fallback_enabled:
        nb_path = _require(out, "nb")
    nb = _load(NbModel.load, nb_path) if nb_path.is_file() else None
    return model, stops, lex, fw, nb


def cmd_score(cfg: PipelineConfig, out: Path) -> dict:
    docs = _documents(out)
    model, stops, lex, fw, nb = _scoring_inputs(cfg, out)
    protected = _new_words(out)
    flags = Counter()

    def rows():
        for d in docs:
            if nb is not None:
                res = document_emotion(d, model, stops, lex, fw, nb, cfg.scorer, protected)
                flags.update(res.emotions.flags)
                yield res.to_record()
                continue
            # fallback disabled and no classifier: emotions only, no polarity label
            vec = score_with_fallback(segment_pipeline(d, model, stops, protected), lex, fw, None,
                                      cfg.scorer)
            flags.update(vec.flags)
            yield {"id": d.id, "fetched_at": d.fetched_at, "label": None, "confidence": None,
                   **vec.to_dict()}

    n = _write_jsonl(out / ARTIFACTS["results"], rows())
    return {"documents": n, **dict(sorted(flags.items()))}


def cmd_trend(cfg: PipelineConfig, out: Path) -> dict:
    results = [rec for _, rec in _iter_jsonl(_require(out, "results"))]
    series, skipped = aggregate_counted(results)
    if skipped:
        log.warning("trend: skipped %d record(s) without a usable timestamp", skipped)
    export_trends(series, out, cfg.export.csv)
    tokens_path = out / ARTIFACTS["tokens"]
    docs_tokens = [rec["tokens"] for _, rec in _iter_jsonl(tokens_path)] if tokens_path.is_file() else []
    lex_path = out / ARTIFACTS["lexicon"]
    lex = _load(load_lexicon_file, lex_path) if lex_path.is_file() else None
    fw = _load(FunctionWordTables.load, cfg.paths.function_words)
    stops = StopwordList.load(cfg.paths.stopwords).words | fw.negations | set(fw.degree_adverbs)
    hot = hot_words(docs_tokens, cfg.export.hot_k, stops, lex)
    export_hot_words(hot, out, cfg.export.csv)
    return {"buckets": len(series), "skipped": skipped, "hot_words": len(hot)}


def cmd_eval(cfg: PipelineConfig, out: Path) -> dict:
    model, stops, lex, fw, nb = _scoring_inputs(cfg, out)
    try:
        docs, truth = read_truth(cfg.paths.truth)
    except (ValueError, KeyError) as exc:
        raise InputError(f"{cfg.paths.truth}: {exc}") from None
    protected = _new_words(out)

    def tokenize(doc):
        return segment_pipeline(doc, model, stops, protected)

    def system(doc):
        return score_with_fallback(tokenize(doc), lex, fw, nb, cfg.scorer)

    if cfg.eval.baseline == "uniform":
        baseline = uniform_baseline
    else:
        base_lex = _load(load_merge_dictionaries, tuple(cfg.paths.lexicons))
        baseline = LexiconBaseline(tokenize, base_lex, fw)
    partition = make_partition(docs, truth, seed=cfg.eval.seed)
    report = run_comparison(partition, system, baseline)
    _dump_json(out / ARTIFACTS["report_json"], report.to_dict())
    (out / ARTIFACTS["report_txt"]).write_text(report.to_text() + "\n", encoding="utf-8")
    return {"buckets": report.system.gradient_buckets,
            "unjudgeable_rate": report.system.unjudgeable_rate}


STAGES = {
    "ingest": cmd_ingest,
    "train-hmm": cmd_train_hmm,
    "segment": cmd_segment,
    "mine-words": cmd_mine_words,
    "expand-lexicon": cmd_expand_lexicon,
    "train-nb": cmd_train_nb,
    "classify": cmd_classify,
    "score": cmd_score,
    "trend": cmd_trend,
    "eval": cmd_eval,
}


def cmd_run(cfg: PipelineConfig, out: Path) -> dict:
    """Every stage in order on a fresh intake."""
    for name in ("bloom", "intake", "documents"):
        (out / ARTIFACTS[name]).unlink(missing_ok=True)
    return {name: fn(cfg, out) for name, fn in STAGES.items()}


# --- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML config file")
    common.add_argument("--seed", type=int, help="overrides bloom and eval seeds")
    common.add_argument("--out", type=Path, default=Path("out"), help="artifact directory")
    parser = argparse.ArgumentParser(prog="opinionmon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(STAGES) + ["run"]:
        p = sub.add_parser(name, parents=[common])
        if name == "ingest":
            p.add_argument("input", nargs="?", type=Path, help="JSONL records (default: paths.corpus)")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must fit in an unsigned 64-bit integer")
        cfg = load_config(args.config, args.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            summary = cmd_run(cfg, args.out)
        elif args.command == "ingest":
            summary = cmd_ingest(cfg, args.out, args.input)
        else:
            summary = STAGES[args.command](cfg, args.out)
    except (InputError, MissingArtifact, ConfigError) as exc:
        print(f"opinionmon {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(json.dumps(summary, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
