"""Levenshtein distance and normalized edit distance (NED).

Distances count Unicode scalar values.  No case folding or whitespace
handling happens here; callers decide how to build the strings they compare.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute distance.

    Bit-parallel over the shorter string (Hyyrö's formulation of Myers'
    algorithm), so memory is one machine-word bit vector per distinct
    character of the shorter string and time is O(len(long) * len(short) / w).
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if m == 0:
        return len(a)

    peq: dict[str, int] = {}
    for i, ch in enumerate(b):
        peq[ch] = peq.get(ch, 0) | (1 << i)

    full = (1 << m) - 1
    last = 1 << (m - 1)
    pv, mv, score = full, 0, m
    for ch in a:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & last:
            score += 1
        elif mh & last:
            score -= 1
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = mh | (~(xv | ph) & full)
        mv = ph & xv
    return score


def levenshtein_rows(a: str, b: str) -> int:
    """Plain two-row dynamic program; slower, kept as an independent path."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class PairScore:
    distance: int
    similarity: float


def ned_pair(pred: str, gt: str) -> PairScore:
    longest = max(len(pred), len(gt))
    if longest == 0:
        return PairScore(0, 1.0)
    d = levenshtein(pred, gt)
    return PairScore(d, 1.0 - d / longest)


def corpus_ned(pairs: Iterable[tuple[str, str]]) -> float:
    sims = [ned_pair(p, g).similarity for p, g in pairs]
    if not sims:
        raise ValueError("corpus_ned needs at least one pair")
    return sum(sims) / len(sims)
