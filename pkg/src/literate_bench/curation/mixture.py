"""Ratio-driven sampling across several record sources."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ..core import ManifestError, iter_jsonl


@dataclass(frozen=True)
class MixtureSource:
    name: str
    path: str
    ratio: float


class SourceError(RuntimeError):
    def __init__(self, source: str, reason: str):
        super().__init__(f"source {source!r}: {reason}")
        self.source = source


@dataclass(frozen=True)
class MixtureSpec:
    sources: tuple[MixtureSource, ...]

    def __post_init__(self) -> None:
        if not self.sources:
            raise ValueError("mixture needs at least one source")
        names = [s.name for s in self.sources]
        if len(set(names)) != len(names):
            raise ValueError("source names must be unique")
        if any(not s.ratio > 0 for s in self.sources):
            raise ValueError("ratios must be > 0")
        total = math.fsum(s.ratio for s in self.sources)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1 (got {total!r})")

    @classmethod
    def from_weights(cls, items: Sequence[tuple[str, str, float]]) -> "MixtureSpec":
        """Build a spec from unnormalized weights, e.g. percentage columns."""
        total = math.fsum(w for _, _, w in items)
        if not total > 0:
            raise ValueError("weights must sum to a positive number")
        return cls(tuple(MixtureSource(n, p, w / total) for n, p, w in items))

    @property
    def ratios(self) -> np.ndarray:
        r = np.array([s.ratio for s in self.sources], dtype=np.float64)
        return r / r.sum()


def load_jsonl(path: str | Path) -> list[Any]:
    with open(path, encoding="utf-8") as fh:
        return [obj for _, obj in iter_jsonl(fh)]


def sample_mixture(
    spec: MixtureSpec,
    total: int,
    seed: int,
    loader: Callable[[str], Sequence[Any]] = load_jsonl,
) -> list[tuple[str, Any]]:
    """Draw ``total`` records: source per draw ~ Categorical(ratios), record
    uniformly with replacement inside the source.

    Per-source counts are therefore multinomial with the spec's ratios as
    expectation.  The output depends only on ``spec``, ``total`` and ``seed``.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    pools = []
    for src in spec.sources:
        try:
            records = loader(src.path)
        except (OSError, ManifestError, UnicodeDecodeError) as exc:
            raise SourceError(src.name, str(exc)) from exc
        if not records:
            raise SourceError(src.name, "source is empty")
        pools.append(records)
    rng = np.random.default_rng(seed)
    which = rng.choice(len(pools), size=total, p=spec.ratios)
    picks = np.empty(total, dtype=np.int64)
    for s, pool in enumerate(pools):
        slots = np.flatnonzero(which == s)
        picks[slots] = rng.integers(0, len(pool), size=slots.size)
    return [(spec.sources[s].name, pools[s][i]) for s, i in zip(which.tolist(), picks.tolist())]
