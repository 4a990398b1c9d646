"""Raw payload to clean text: HTML stripping, normalization, stopwords."""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import asdict, dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Iterator

_SKIP_TAGS = {"script", "style", "noscript", "template"}
_BLOCK_TAGS = {
    "p", "div", "br", "li", "ul", "ol", "tr", "td", "th", "table", "h1", "h2",
    "h3", "h4", "h5", "h6", "section", "article", "header", "footer", "blockquote",
}
_WS = re.compile(r"\s+")
_TAG_START = re.compile(r"<(?=[A-Za-z])")
_CONTROL = re.compile(r"[\x00-\x09\x0b-\x1f\x7f-\x9f]")


class _TextCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip += 1
        elif tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip = max(0, self._skip - 1)
        elif tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_data(self, data):
        if not self._skip:
            self.parts.append(data)


def _neutralize_tags(text: str) -> str:
    # unescaped "&lt;b" must not read as markup downstream
    return _TAG_START.sub("< ", text)


def extract_text(raw: str | bytes, content_type: str = "html") -> str:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    if content_type == "plain":
        return raw
    if content_type != "html":
        raise ValueError(f"unknown content_type {content_type!r}")
    parser = _TextCollector()
    try:
        parser.feed(raw)
        parser.close()
    except Exception:  # HTMLParser is lenient; this is a last resort
        return ""
    text = _WS.sub(" ", "".join(parser.parts)).strip()
    return _neutralize_tags(text)


def normalize_text(text: str) -> str:
    """NFKC, drop control characters (newline kept), collapse spaces per line."""
    text = unicodedata.normalize("NFKC", text)
    text = _CONTROL.sub(" ", text.replace("\r\n", "\n").replace("\r", "\n"))
    lines = [re.sub(r"[^\S\n]+", " ", ln).strip() for ln in text.split("\n")]
    return _neutralize_tags("\n".join(ln for ln in lines if ln))


def clean(raw: str | bytes, content_type: str = "html") -> str:
    return normalize_text(extract_text(raw, content_type))


@dataclass
class Document:
    id: str
    source: str
    fetched_at: str
    raw: str
    clean_text: str = ""
    lang_hint: str | None = None

    @classmethod
    def from_raw(cls, id: str, raw: str, *, source: str = "", fetched_at: str = "",
                 content_type: str = "plain", lang_hint: str | None = None) -> "Document":
        return cls(id=id, source=source, fetched_at=fetched_at, raw=raw,
                   clean_text=clean(raw, content_type), lang_hint=lang_hint)

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


def read_documents(path: str | Path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield Document(**json.loads(line))


def write_documents(docs: Iterable[Document], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(doc.to_json() + "\n")
            n += 1
    return n


@dataclass
class StopwordList:
    words: frozenset[str] = field(default_factory=frozenset)
    source_name: str = ""

    def __post_init__(self):
        self.words = frozenset(w for w in self.words if w)

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self):
        return len(self.words)

    @classmethod
    def load(cls, path: str | Path) -> "StopwordList":
        words = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    words.add(line)
        return cls(frozenset(words), Path(path).name)


def remove_stopwords(tokens: list[str], stops: StopwordList) -> list[str]:
    return [t for t in tokens if t not in stops]
