"""Stable 64-bit hashing shared by the recall, dedup, and decontamination stages.

Everything here must reproduce bit-exactly across runs, platforms, and worker
counts. Python's builtin hash() is salted per process, so all hashing is
derived from keyed blake2b plus a splitmix64-style integer mixer that numpy
can vectorize.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import hashlib

import numpy as np

# Keyed into blake2b. Changing it invalidates every persisted index, model,
# and signature sidecar, so it is part of the on-disk format version.
DEFAULT_HASH_SEED = 0x1F3D5B79

_U64 = np.uint64
_MIX_MUL_1 = _U64(0xBF58476D1CE4E5B9)
_MIX_MUL_2 = _U64(0x94D049BB133111EB)
_POLY_MUL = _U64(0x100000001B3)  # odd, so multiplication is invertible mod 2**64
_SPLITMIX_INC = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def stable_hash64(data: bytes | str, seed: int = DEFAULT_HASH_SEED) -> int:
    """Keyed 64-bit hash of bytes or UTF-8 text, stable across processes."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    key = (seed & _MASK64).to_bytes(8, "little")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8, key=key).digest(), "little")


def mix64_int(x: int) -> int:
    """Scalar splitmix64 finalizer; bijective on 64-bit ints."""
    x &= _MASK64
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return x ^ (x >> 31)


def mix64(values: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over a uint64 array."""
    x = values.astype(np.uint64, copy=True)
    x ^= x >> _U64(30)
    x *= _MIX_MUL_1
    x ^= x >> _U64(27)
    x *= _MIX_MUL_2
    x ^= x >> _U64(31)
    return x


def splitmix64_stream(seed: int, count: int) -> np.ndarray:
    """First `count` values of the splitmix64 sequence started at `seed`."""
    state = np.arange(1, count + 1, dtype=np.uint64)
    state *= _U64(_SPLITMIX_INC)
    state += _U64(seed & _MASK64)
    return mix64(state)


class TokenHasher:
    """Token -> uint64 via keyed blake2b, with a cache keyed per instance.

    The cache makes whole-corpus passes cheap: natural-language corpora reuse
    a small vocabulary, so nearly all lookups after warmup are dict hits.
    Instances are cheap; share one per stage, not across seeds.
    """

    def __init__(self, seed: int = DEFAULT_HASH_SEED):
        self.seed = seed
        self._key = (seed & _MASK64).to_bytes(8, "little")
        self._cache: dict[str, int] = {}

    def hash_token(self, token: str) -> int:
        h = self._cache.get(token)
        if h is None:
            h = int.from_bytes(
                hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest(),
                "little",
            )
            self._cache[token] = h
        return h

    def hash_tokens(self, tokens: Sequence[str] | Iterable[str]) -> np.ndarray:
        get = self._cache.get
        out = []
        for token in tokens:
            h = get(token)
            if h is None:
                h = self.hash_token(token)
            out.append(h)
        return np.array(out, dtype=np.uint64)


def rolling_ngram_hashes(token_hashes: np.ndarray, n: int) -> np.ndarray:
    """Hash every contiguous n-gram of a token-hash array.

    Position-sensitive polynomial accumulation followed by a mix, so
    ("a","b") and ("b","a") land on different values. Returns one uint64 per
    window, length max(0, len - n + 1), in document order (duplicates kept).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = len(token_hashes) - n + 1
    if m <= 0:
        return np.empty(0, dtype=np.uint64)
    acc = np.zeros(m, dtype=np.uint64)
    for j in range(n):
        acc *= _POLY_MUL
        acc += token_hashes[j : j + m]
    return mix64(acc)
