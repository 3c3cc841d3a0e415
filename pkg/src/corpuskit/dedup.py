"""Global near-duplicate elimination via MinHash signatures and LSH banding.

The flow is the classic one: word shingles -> k-slot MinHash signature ->
band the signature so near-duplicates collide in at least one bucket ->
verify candidate pairs on estimated Jaccard -> collapse connected components
keeping the lexicographically smallest id. Signatures can be computed in
parallel; bucketing and union-find run single-threaded so the result is
identical for any worker count.

Each MinHash slot applies a different bijective 64-bit mixer to the shingle
set and takes the minimum, which is the standard "family of random
permutations" construction. P(slot matches) = Jaccard, so the fraction of
matching slots is an unbiased estimator.
"""

from __future__ import annotations

import struct
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document, TokenizerSpec, tokenize
from .errors import DocumentTooShortError, SignatureMismatchError
from .hashing import TokenHasher, mix64, rolling_ngram_hashes, splitmix64_stream

_SIG_MAGIC = b"CKSG"
_SIG_VERSION = 1

# Dedup normalizes more gently than decontamination: lowercase + whitespace
# split, punctuation kept (it distinguishes code-ish documents).
DEDUP_SPEC = TokenizerSpec(kind="whitespace", lowercase=True)


@dataclass(frozen=True)
class DedupConfig:
    w: int = 5
    k: int = 128
    bands: int = 16
    rows: int = 8
    threshold: float = 0.8
    seed: int = 42

    def __post_init__(self):
        if self.w < 1:
            raise ValueError("shingle width w must be >= 1")
        if self.bands * self.rows != self.k:
            raise ValueError(
                f"bands*rows must equal k: {self.bands}*{self.rows} != {self.k}"
            )
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")


@dataclass
class ShingleSet:
    """Distinct 64-bit hashes of the document's word w-grams (set semantics)."""

    hashes: np.ndarray  # uint64, unique, sorted

    def __len__(self) -> int:
        return len(self.hashes)

    @classmethod
    def from_raw(cls, values: Iterable[int]) -> "ShingleSet":
        return cls(np.unique(np.asarray(list(values), dtype=np.uint64)))


@dataclass
class MinHashSignature:
    mins: np.ndarray  # uint64, length k
    perm_seed: int

    @property
    def k(self) -> int:
        return len(self.mins)


def shingle(tokens: Sequence[str], w: int, hasher: TokenHasher | None = None) -> ShingleSet:
    """Hash every contiguous w-gram; duplicates collapse (set semantics)."""
    if w < 1:
        raise ValueError("w must be >= 1")
    if hasher is None:
        hasher = TokenHasher()
    token_hashes = hasher.hash_tokens(list(tokens))
    grams = rolling_ngram_hashes(token_hashes, w)
    return ShingleSet(np.unique(grams))


def _slot_seeds(perm_seed: int, k: int) -> np.ndarray:
    return splitmix64_stream(perm_seed, k)


def signature(shingles: ShingleSet, k: int = 128, perm_seed: int = 42) -> MinHashSignature:
    """MinHash signature: mins[i] = min over shingles of mixer_i(shingle)."""
    if len(shingles) == 0:
        raise DocumentTooShortError("document too short to dedup (no shingles)")
    seeds = _slot_seeds(perm_seed, k)
    # (k, m) matrix of per-slot hashes; m is bounded by document length.
    hashed = mix64(shingles.hashes[None, :] ^ seeds[:, None])
    return MinHashSignature(mins=hashed.min(axis=1), perm_seed=perm_seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of matching signature slots; unbiased for the true Jaccard."""
    if a.k != b.k or a.perm_seed != b.perm_seed:
        raise SignatureMismatchError(
            f"signatures disagree: k {a.k} vs {b.k}, seed {a.perm_seed} vs {b.perm_seed}"
        )
    return float(np.count_nonzero(a.mins == b.mins)) / a.k


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    """|A ∩ B| / |A ∪ B| on the shingle sets; the oracle the estimator chases."""
    if len(a) == 0 and len(b) == 0:
        return 1.0
    inter = len(np.intersect1d(a.hashes, b.hashes, assume_unique=True))
    union = len(a) + len(b) - inter
    return inter / union


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass
class DedupReport:
    clusters: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)
    pairs_examined: int = 0
    kept_count: int = 0
    removed_count: int = 0
    too_short_count: int = 0  # kept without a signature; counted separately

    def to_dict(self) -> dict:
        return {
            "kept_count": self.kept_count,
            "removed_count": self.removed_count,
            "too_short_count": self.too_short_count,
            "pairs_examined": self.pairs_examined,
            "clusters": [
                {"kept": kept, "removed": list(removed)} for kept, removed in self.clusters
            ],
        }


def compute_signatures(
    docs: Sequence[Document],
    config: DedupConfig,
    spec: TokenizerSpec = DEDUP_SPEC,
    workers: int = 1,
) -> tuple[list[MinHashSignature | None], list[ShingleSet | None]]:
    """Signatures for each doc; None where the doc is too short to shingle."""
    hasher = TokenHasher()
    seeds = _slot_seeds(config.seed, config.k)

    def one(doc: Document) -> tuple[MinHashSignature | None, ShingleSet | None]:
        grams = np.unique(
            rolling_ngram_hashes(hasher.hash_tokens(tokenize(doc.text, spec).tokens), config.w)
        )
        if len(grams) == 0:
            return None, None
        hashed = mix64(grams[None, :] ^ seeds[:, None])
        return MinHashSignature(hashed.min(axis=1), config.seed), ShingleSet(grams)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, docs, chunksize=256))
    else:
        results = [one(d) for d in docs]
    sigs = [r[0] for r in results]
    shingles = [r[1] for r in results]
    return sigs, shingles


def dedup(
    corpus: Iterable[Document],
    config: DedupConfig = DedupConfig(),
    spec: TokenizerSpec = DEDUP_SPEC,
    workers: int = 1,
) -> tuple[list[Document], DedupReport]:
    """Drop near-duplicates, keeping the lexicographically smallest id.

    LSH banding proposes candidate pairs; a pair is linked when the
    estimated Jaccard of its signatures reaches config.threshold; linked
    components collapse to one survivor. Deterministic for a fixed
    (corpus, config) regardless of `workers`.
    """
    docs = list(corpus)
    sigs, _ = compute_signatures(docs, config, spec, workers=workers)

    buckets: dict[tuple[int, bytes], list[int]] = defaultdict(list)
    for i, sig in enumerate(sigs):
        if sig is None:
            continue
        for b in range(config.bands):
            key = sig.mins[b * config.rows : (b + 1) * config.rows].tobytes()
            buckets[(b, key)].append(i)

    uf = UnionFind(len(docs))
    seen_pairs: set[tuple[int, int]] = set()
    for members in buckets.values():
        if len(members) < 2:
            continue
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                pair = (members[x], members[y])
                if pair in seen_pairs:
                    continue
                seen_pairs.add(pair)
                if estimate_jaccard(sigs[pair[0]], sigs[pair[1]]) >= config.threshold:
                    uf.union(*pair)

    groups: dict[int, list[int]] = defaultdict(list)
    for i, sig in enumerate(sigs):
        if sig is not None:
            groups[uf.find(i)].append(i)

    kept: list[Document] = []
    report = DedupReport(pairs_examined=len(seen_pairs))
    keep_flags = [True] * len(docs)
    for members in groups.values():
        if len(members) == 1:
            continue
        members_by_id = sorted(members, key=lambda i: docs[i].id)
        survivor = members_by_id[0]
        removed = tuple(docs[i].id for i in members_by_id[1:])
        for i in members_by_id[1:]:
            keep_flags[i] = False
        report.clusters.append((docs[survivor].id, removed))
    report.clusters.sort(key=lambda c: c[0])

    for i, doc in enumerate(docs):
        if keep_flags[i]:
            kept.append(doc)
        if sigs[i] is None:
            report.too_short_count += 1
    report.kept_count = len(kept)
    report.removed_count = len(docs) - len(kept)
    return kept, report


def save_signatures(
    path: str | Path,
    doc_ids: Sequence[str],
    signatures: Sequence[MinHashSignature | None],
) -> None:
    """Binary sidecar for incremental runs; entries with None are skipped."""
    entries = [(i, s) for i, s in zip(doc_ids, signatures) if s is not None]
    if not entries:
        raise ValueError("no signatures to persist")
    k = entries[0][1].k
    perm_seed = entries[0][1].perm_seed
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIQI", _SIG_MAGIC, _SIG_VERSION, k, perm_seed, len(entries)))
        for doc_id, sig in entries:
            raw = doc_id.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(sig.mins.astype("<u8").tobytes())


def load_signatures(path: str | Path) -> dict[str, MinHashSignature]:
    with open(path, "rb") as fh:
        magic, version, k, perm_seed, count = struct.unpack("<4sIIQI", fh.read(24))
        if magic != _SIG_MAGIC or version != _SIG_VERSION:
            raise ValueError(f"{path}: not a signature sidecar (or wrong version)")
        out: dict[str, MinHashSignature] = {}
        for _ in range(count):
            (id_len,) = struct.unpack("<H", fh.read(2))
            doc_id = fh.read(id_len).decode("utf-8")
            mins = np.frombuffer(fh.read(8 * k), dtype="<u8").astype(np.uint64)
            out[doc_id] = MinHashSignature(mins=mins, perm_seed=perm_seed)
    return out
