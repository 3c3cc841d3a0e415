"""Document model, tokenization, and JSONL corpus I/O.

Every stage of the toolkit consumes and produces streams of Document values.
Documents are immutable; stages filter or re-emit them, never mutate them.
The canonical on-disk format is JSONL, one document per line, UTF-8:

    {"id": str, "text": str, "source": str, "domain": str?, "url": str?, "meta": obj?}

gzip is handled transparently for paths ending in ".gz".
"""

from __future__ import annotations

import gzip
import io
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import CorpusParseError

SOURCES = ("web", "math", "code", "knowledge", "encyclopedia", "instruction", "synthetic")

_WORD_RE = re.compile(r"\w+", re.UNICODE)
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Document:
    """One corpus record. `meta` values are strings by convention."""

    id: str
    text: str
    source: str
    domain_label: str | None = None
    url: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}; expected one of {SOURCES}")


@dataclass(frozen=True)
class TokenSequence:
    """Ordered tokens. Positions are 1-based in docs and error messages."""

    tokens: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


@dataclass(frozen=True)
class TokenizerSpec:
    """Deterministic tokenizer configuration.

    kind "whitespace" splits on maximal whitespace runs; "unicode-word" takes
    \\w+ runs; "external" delegates to a caller-supplied function. The same
    spec applied to the same string always yields the same TokenSequence.
    """

    kind: str = "whitespace"
    lowercase: bool = False
    strip_punctuation: bool = False
    collapse_whitespace: bool = False

    def __post_init__(self):
        if self.kind not in ("whitespace", "unicode-word", "external"):
            raise ValueError(f"unknown tokenizer kind {self.kind!r}")

    def fingerprint_fields(self) -> tuple:
        return (self.kind, self.lowercase, self.strip_punctuation, self.collapse_whitespace)


# Shared default for decontamination and desk-scale NLL work: lowercase,
# punctuation replaced by spaces, whitespace split. Fixed here so 10-gram
# matching is reproducible everywhere.
DEFAULT_SPEC = TokenizerSpec(
    kind="whitespace", lowercase=True, strip_punctuation=True, collapse_whitespace=True
)

_PUNCT_CACHE: dict[str, bool] = {}


def _is_punct(ch: str) -> bool:
    cached = _PUNCT_CACHE.get(ch)
    if cached is None:
        cached = unicodedata.category(ch).startswith("P")
        _PUNCT_CACHE[ch] = cached
    return cached


def tokenize(
    text: str,
    spec: TokenizerSpec = DEFAULT_SPEC,
    external: Callable[[str], Iterable[str]] | None = None,
) -> TokenSequence:
    """Tokenize `text` per `spec`. Pure: equal inputs give equal outputs.

    Punctuation stripping replaces punctuation characters with spaces rather
    than deleting them, so "a.b" tokenizes to ("a", "b") instead of fusing.
    """
    if spec.kind == "external":
        if external is None:
            raise ValueError("spec.kind is 'external' but no external tokenizer was given")
        return TokenSequence(tuple(external(text)))
    if spec.lowercase:
        text = text.lower()
    if spec.strip_punctuation:
        text = "".join(" " if _is_punct(ch) else ch for ch in text)
    if spec.collapse_whitespace:
        text = _WS_RE.sub(" ", text).strip()
    if spec.kind == "unicode-word":
        return TokenSequence(tuple(_WORD_RE.findall(text)))
    return TokenSequence(tuple(text.split()))


@dataclass(frozen=True)
class ParseErrorRecord:
    """A malformed corpus line, reported instead of silently dropped."""

    path: str
    line_number: int
    message: str


def _open_text(path: Path, mode: str) -> io.TextIOBase:
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def _doc_from_record(record: dict, fallback_id: str) -> Document:
    if not isinstance(record, dict):
        raise ValueError(f"expected a JSON object, got {type(record).__name__}")
    try:
        text = record["text"]
        source = record["source"]
    except KeyError as e:
        raise ValueError(f"missing required field {e.args[0]!r}") from None
    if not isinstance(text, str):
        raise ValueError("field 'text' must be a string")
    meta = record.get("meta") or {}
    if not isinstance(meta, dict):
        raise ValueError("field 'meta' must be an object")
    return Document(
        id=str(record.get("id") or fallback_id),
        text=text,
        source=source,
        domain_label=record.get("domain"),
        url=record.get("url"),
        meta=meta,
    )


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    errors: list[ParseErrorRecord] | None = None,
) -> Iterator[Document]:
    """Stream Documents from a JSONL file, in file order.

    Malformed lines are never silently dropped: if `errors` is a list, a
    ParseErrorRecord with the 1-based line number is appended and the stream
    continues; otherwise the first bad line raises CorpusParseError.
    Documents without an "id" get "filename:line".
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    path = Path(path)
    with _open_text(path, "r") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                doc = _doc_from_record(record, fallback_id=f"{path.name}:{line_number}")
            except (ValueError, TypeError) as e:
                if errors is None:
                    raise CorpusParseError(str(path), line_number, str(e)) from e
                errors.append(ParseErrorRecord(str(path), line_number, str(e)))
                continue
            yield doc


def document_to_record(doc: Document) -> dict:
    """Canonical JSON record: fixed key order, optional fields omitted."""
    record: dict = {"id": doc.id, "text": doc.text, "source": doc.source}
    if doc.domain_label is not None:
        record["domain"] = doc.domain_label
    if doc.url is not None:
        record["url"] = doc.url
    if doc.meta:
        record["meta"] = doc.meta
    return record


def dumps_document(doc: Document) -> str:
    return json.dumps(document_to_record(doc), ensure_ascii=False, separators=(",", ":"))


def write_corpus(docs: Iterable[Document], path: str | Path) -> int:
    """Write Documents as canonical JSONL; returns the count written.

    The writer is canonical (fixed field order, compact separators), so
    write(load(f)) followed by another load/write round-trip is
    byte-identical.
    """
    count = 0
    with _open_text(Path(path), "w") as fh:
        for doc in docs:
            fh.write(dumps_document(doc))
            fh.write("\n")
            count += 1
    return count
