"""MinHash signatures and LSH-banded near-duplicate removal.

Defaults: lowercased word 5-gram shingles, 128 permutations, 32 bands of 4
rows, pages with estimated similarity >= 0.8 are duplicates.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

# largest prime below 2**32: with x, a, b < p every a*x + b fits in uint64
PRIME_32 = 4294967291
MAX_HASH = np.uint64(PRIME_32)
_MASK32 = np.uint64(0xFFFFFFFF)

ShingleSet = frozenset  # frozenset[int] of 64-bit hashes


def _hash64(gram: str) -> int:
    return int.from_bytes(hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest(), "little")


def shingle(text: str, n: int = 5) -> ShingleSet:
    """Hashes of consecutive lowercased word n-grams.

    Texts with fewer than ``n`` words become a single whole-text shingle;
    only a text without any word gives the empty set.
    """
    if n < 1:
        raise ValueError("shingle size must be >= 1")
    words = text.lower().split()
    if not words:
        return frozenset()
    if len(words) < n:
        return frozenset([_hash64(" ".join(words))])
    return frozenset(_hash64(" ".join(words[i : i + n])) for i in range(len(words) - n + 1))


def exact_jaccard(a: Iterable[int], b: Iterable[int]) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class MinHashSignature:
    values: tuple[int, ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class _Permutations:
    a: np.ndarray
    b: np.ndarray


_PERM_CACHE: dict[tuple[int, int], _Permutations] = {}


def _permutations(k: int, seed: int) -> _Permutations:
    key = (k, seed)
    if key not in _PERM_CACHE:
        rng = np.random.default_rng(seed)
        a = rng.integers(1, PRIME_32, size=k, dtype=np.uint64)
        b = rng.integers(0, PRIME_32, size=k, dtype=np.uint64)
        _PERM_CACHE[key] = _Permutations(a, b)
    return _PERM_CACHE[key]


def signature(shingles: Iterable[int], k: int = 128, seed: int = 1) -> MinHashSignature:
    """Per-permutation minima of ``(a*x + b) mod p`` with p = 2**32 - 5.

    Shingle hashes are folded to 32 bits first.  An empty set gets the
    sentinel ``p`` in every slot, a value no real shingle can produce.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    perms = _permutations(k, seed)
    hashes = np.fromiter(shingles, dtype=np.uint64)
    if hashes.size == 0:
        return MinHashSignature(tuple([PRIME_32] * k), seed)
    x = ((hashes ^ (hashes >> np.uint64(32))) & _MASK32) % MAX_HASH
    mins = np.full(k, MAX_HASH, dtype=np.uint64)
    for start in range(0, x.size, 4096):
        chunk = x[start : start + 4096]
        phv = (np.outer(chunk, perms.a) + perms.b) % MAX_HASH
        np.minimum(mins, phv.min(axis=0), out=mins)
    return MinHashSignature(tuple(int(v) for v in mins), seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    if a.k != b.k or a.seed != b.seed:
        raise ValueError(
            f"signatures are not comparable (k={a.k}/{b.k}, seed={a.seed}/{b.seed})"
        )
    return sum(x == y for x, y in zip(a.values, b.values)) / a.k


@dataclass(frozen=True)
class DedupConfig:
    threshold: float = 0.8
    shingle_size: int = 5
    k: int = 128
    bands: int = 32
    rows: int = 4
    seed: int = 1
    per_source: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.threshold <= 1:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.bands < 1 or self.rows < 1 or self.bands * self.rows > self.k:
            raise ValueError(f"bands x rows ({self.bands}x{self.rows}) must fit in k={self.k}")


@dataclass
class DuplicateCluster:
    kept: str
    dropped: list[str]
    similarity: float

    def to_dict(self) -> dict[str, Any]:
        return {"kept": self.kept, "dropped": self.dropped, "similarity": self.similarity}


@dataclass
class DedupResult:
    kept: list[str]
    clusters: list[DuplicateCluster] = field(default_factory=list)

    @property
    def dropped(self) -> list[str]:
        return [d for c in self.clusters for d in c.dropped]


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _dedup_group(
    ids: Sequence[str], sigs: Sequence[MinHashSignature], cfg: DedupConfig
) -> tuple[list[int], list[tuple[int, list[int], float]]]:
    n = len(ids)
    buckets: dict[tuple[int, tuple[int, ...]], list[int]] = defaultdict(list)
    for i, sig in enumerate(sigs):
        for band in range(cfg.bands):
            lo = band * cfg.rows
            buckets[(band, sig.values[lo : lo + cfg.rows])].append(i)
    candidates: set[tuple[int, int]] = set()
    for members in buckets.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                candidates.add((members[x], members[y]))
    parent = list(range(n))
    edges: dict[int, float] = {}
    for i, j in sorted(candidates):
        sim = estimate_jaccard(sigs[i], sigs[j])
        if sim >= cfg.threshold:
            ri, rj = _find(parent, i), _find(parent, j)
            if ri != rj:
                # the earliest record is always the root, so it is the one kept
                lo, hi = min(ri, rj), max(ri, rj)
                parent[hi] = lo
                edges[lo] = min(edges.get(lo, 1.0), edges.pop(hi, 1.0), sim)
            else:
                edges[ri] = min(edges.get(ri, 1.0), sim)
    groups: dict[int, list[int]] = defaultdict(list)
    for i in range(n):
        groups[_find(parent, i)].append(i)
    kept = sorted(groups)
    clusters = [(root, members[1:], edges.get(root, 1.0)) for root, members in sorted(groups.items()) if len(members) > 1]
    return kept, clusters


def dedup(records: Sequence[Mapping[str, Any]], cfg: DedupConfig = DedupConfig()) -> DedupResult:
    """Near-duplicate removal over ``{"id", "text", "source"?}`` records.

    LSH banding proposes candidate pairs; a pair is a duplicate when its
    signature similarity is at least ``cfg.threshold``.  Duplicates form
    clusters (transitively) and the first record of each cluster in input
    order is kept.  With ``per_source`` records only collide with records of
    the same ``source``.
    """
    groups: dict[str, list[int]] = defaultdict(list)
    for idx, rec in enumerate(records):
        key = str(rec.get("source", "")) if cfg.per_source else ""
        groups[key].append(idx)
    sigs = [signature(shingle(str(r.get("text", "")), cfg.shingle_size), cfg.k, cfg.seed) for r in records]
    kept_idx: list[int] = []
    clusters: list[tuple[int, DuplicateCluster]] = []
    for members in groups.values():
        ids = [str(records[i]["id"]) for i in members]
        local_kept, local_clusters = _dedup_group(ids, [sigs[i] for i in members], cfg)
        kept_idx.extend(members[i] for i in local_kept)
        for root, dropped, sim in local_clusters:
            clusters.append(
                (members[root], DuplicateCluster(ids[root], [ids[d] for d in dropped], sim))
            )
    kept_idx.sort()
    clusters.sort(key=lambda c: c[0])
    return DedupResult([str(records[i]["id"]) for i in kept_idx], [c for _, c in clusters])
