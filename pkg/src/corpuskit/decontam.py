"""Token-level n-gram benchmark decontamination (default n=10).

Index every contiguous n-gram of every benchmark text, then drop any corpus
document sharing at least one n-gram with the index. Hashing is 64-bit, so a
random collision (~2^-64 per pair) can only over-remove, never leak
contamination; the hashed scan is verified against a brute-force string
n-gram intersection in the tests.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import DEFAULT_SPEC, Document, TokenizerSpec, tokenize
from .errors import SpecMismatchError
from .hashing import DEFAULT_HASH_SEED, TokenHasher, rolling_ngram_hashes, stable_hash64

_INDEX_MAGIC = b"CKNG"
_INDEX_VERSION = 1
_MAX_BENCHMARKS = 32  # attribution is a uint32 bitmask per gram

DEFAULT_HIT_CAP = 10


def _spec_fingerprint(n: int, spec: TokenizerSpec) -> int:
    return stable_hash64(repr((n, spec.fingerprint_fields(), DEFAULT_HASH_SEED)))


@dataclass
class NGramIndex:
    """Hashes of all benchmark n-grams plus per-gram benchmark attribution.

    Rebuildable bit-exactly from the same benchmark files and TokenizerSpec;
    the fingerprint pins (n, spec) so a mismatched spec at query time is an
    error instead of a silent recall hole.
    """

    n: int
    grams: np.ndarray  # uint64, unique, sorted
    benchmark_masks: np.ndarray  # uint32, parallel to grams
    benchmark_names: list[str]
    fingerprint: int

    def __len__(self) -> int:
        return len(self.grams)

    def names_for(self, mask: int) -> list[str]:
        return [name for b, name in enumerate(self.benchmark_names) if mask >> b & 1]


@dataclass
class ContaminationVerdict:
    contaminated: bool
    hits: list[tuple[int, str]]  # (token offset in doc, benchmark name), capped
    hit_count: int  # total matched windows, not capped
    benchmarks_hit: list[str] = field(default_factory=list)

    def __post_init__(self):
        assert self.contaminated == (self.hit_count > 0)


def build_ngram_index(
    benchmarks: Mapping[str, Iterable[Document]] | Sequence[tuple[str, Iterable[Document]]],
    n: int = 10,
    spec: TokenizerSpec = DEFAULT_SPEC,
    include_meta_answer: bool = True,
) -> NGramIndex:
    """Index every contiguous n-gram of every benchmark text.

    Both questions (doc.text) and answers (doc.meta["answer"], when present)
    are indexed by default. A gram appearing in several benchmarks is stored
    once with every name recorded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    items = list(benchmarks.items()) if isinstance(benchmarks, Mapping) else list(benchmarks)
    if not items:
        raise ValueError("at least one benchmark corpus is required")
    if len(items) > _MAX_BENCHMARKS:
        raise ValueError(f"at most {_MAX_BENCHMARKS} benchmarks per index")
    hasher = TokenHasher()
    names: list[str] = []
    gram_mask: dict[int, int] = {}
    for b, (name, corpus) in enumerate(items):
        names.append(name)
        bit = 1 << b
        for doc in corpus:
            texts = [doc.text]
            if include_meta_answer and "answer" in doc.meta:
                texts.append(doc.meta["answer"])
            for text in texts:
                tokens = tokenize(text, spec).tokens
                for g in rolling_ngram_hashes(hasher.hash_tokens(tokens), n).tolist():
                    gram_mask[g] = gram_mask.get(g, 0) | bit
    grams = np.fromiter(gram_mask.keys(), dtype=np.uint64, count=len(gram_mask))
    order = np.argsort(grams, kind="stable")
    grams = grams[order]
    masks = np.fromiter(gram_mask.values(), dtype=np.uint32, count=len(gram_mask))[order]
    return NGramIndex(
        n=n,
        grams=grams,
        benchmark_masks=masks,
        benchmark_names=names,
        fingerprint=_spec_fingerprint(n, spec),
    )


def check_document(
    doc: Document,
    index: NGramIndex,
    spec: TokenizerSpec = DEFAULT_SPEC,
    hasher: TokenHasher | None = None,
    hit_cap: int = DEFAULT_HIT_CAP,
) -> ContaminationVerdict:
    """Sliding-window scan; contaminated iff the doc shares >= 1 indexed n-gram.

    Equivalent by construction to brute-force n-gram set intersection under
    the same TokenizerSpec. Documents shorter than n tokens have no window
    and are never contaminated.
    """
    if index.fingerprint != _spec_fingerprint(index.n, spec):
        raise SpecMismatchError(
            "tokenizer spec differs from the one this index was built with"
        )
    if hasher is None:
        hasher = TokenHasher()
    tokens = tokenize(doc.text, spec).tokens
    windows = rolling_ngram_hashes(hasher.hash_tokens(tokens), index.n)
    if len(windows) == 0 or len(index) == 0:
        return ContaminationVerdict(contaminated=False, hits=[], hit_count=0)
    pos = np.searchsorted(index.grams, windows)
    pos[pos == len(index.grams)] = 0
    matched = index.grams[pos] == windows
    hit_count = int(np.count_nonzero(matched))
    hits: list[tuple[int, str]] = []
    benchmarks_hit: list[str] = []
    if hit_count:
        matched_pos = pos[matched]
        total_mask = int(np.bitwise_or.reduce(index.benchmark_masks[matched_pos]))
        benchmarks_hit = index.names_for(total_mask)
        for offset in np.flatnonzero(matched)[:hit_cap]:
            mask = int(index.benchmark_masks[pos[offset]])
            for name in index.names_for(mask):
                hits.append((int(offset), name))
        hits = hits[:hit_cap]
    return ContaminationVerdict(
        contaminated=hit_count > 0,
        hits=hits,
        hit_count=hit_count,
        benchmarks_hit=benchmarks_hit,
    )


@dataclass
class DecontaminationReport:
    checked: int = 0
    removed_ids: list[str] = field(default_factory=list)
    hits_per_benchmark: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "removed_count": len(self.removed_ids),
            "removed_ids": self.removed_ids,
            "hits_per_benchmark": self.hits_per_benchmark,
        }


def decontaminate_corpus(
    corpus: Iterable[Document],
    index: NGramIndex,
    spec: TokenizerSpec = DEFAULT_SPEC,
    policy: str = "drop-document",
) -> tuple[list[Document], DecontaminationReport]:
    """Drop every contaminated document (the only supported policy)."""
    if policy != "drop-document":
        raise ValueError(f"unsupported decontamination policy {policy!r}")
    hasher = TokenHasher()
    kept: list[Document] = []
    report = DecontaminationReport()
    for doc in corpus:
        verdict = check_document(doc, index, spec, hasher=hasher)
        report.checked += 1
        if verdict.contaminated:
            report.removed_ids.append(doc.id)
            for _, name in verdict.hits:
                report.hits_per_benchmark[name] = report.hits_per_benchmark.get(name, 0) + 1
        else:
            kept.append(doc)
    return kept, report


def naive_ngram_set(text: str, n: int, spec: TokenizerSpec = DEFAULT_SPEC) -> set[tuple[str, ...]]:
    """Brute-force token n-grams as tuples; the oracle for the hashed scan."""
    tokens = tokenize(text, spec).tokens
    return {tokens[i : i + n] for i in range(len(tokens) - n + 1)}


def save_index(index: NGramIndex, path: str | Path) -> None:
    header = json.dumps(
        {
            "n": index.n,
            "benchmark_names": index.benchmark_names,
            "fingerprint": index.fingerprint,
            "count": len(index),
        }
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", _INDEX_MAGIC, _INDEX_VERSION, len(header)))
        fh.write(header)
        fh.write(index.grams.astype("<u8").tobytes())
        fh.write(index.benchmark_masks.astype("<u4").tobytes())


def load_index(path: str | Path) -> NGramIndex:
    with open(path, "rb") as fh:
        magic, version, header_len = struct.unpack("<4sII", fh.read(12))
        if magic != _INDEX_MAGIC or version != _INDEX_VERSION:
            raise ValueError(f"{path}: not an n-gram index (or wrong version)")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        count = header["count"]
        grams = np.frombuffer(fh.read(8 * count), dtype="<u8").astype(np.uint64)
        masks = np.frombuffer(fh.read(4 * count), dtype="<u4").astype(np.uint32)
    return NGramIndex(
        n=header["n"],
        grams=grams,
        benchmark_masks=masks,
        benchmark_names=list(header["benchmark_names"]),
        fingerprint=header["fingerprint"],
    )
