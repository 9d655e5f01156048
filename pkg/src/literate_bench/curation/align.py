"""Token-overlap filter between an image's text and its markdown."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Iterator, TypeVar

MARKUP_CHARS = "#*|`[]()"
_STRIP = str.maketrans({c: " " for c in MARKUP_CHARS})

T = TypeVar("T")


def markdown_tokens(markdown_text: str) -> list[str]:
    return markdown_text.translate(_STRIP).split()


def alignment_ratio(image_text: str, markdown_text: str) -> float:
    """Multiset intersection-over-union of whitespace tokens.

    Markup characters are removed from the markdown side only.  Two empty
    token lists count as perfectly aligned.
    """
    a = Counter(image_text.split())
    b = Counter(markdown_tokens(markdown_text))
    union = sum((a | b).values())
    if union == 0:
        return 1.0
    return sum((a & b).values()) / union


def filter_aligned(
    pairs: Iterable[tuple[str, str]], min_ratio: float = 0.95
) -> Iterator[tuple[str, str]]:
    """Keep pairs whose ratio is strictly greater than ``min_ratio``."""
    if not 0 <= min_ratio <= 1:
        raise ValueError(f"min_ratio must be in [0, 1], got {min_ratio}")
    for image_text, md in pairs:
        if alignment_ratio(image_text, md) > min_ratio:
            yield image_text, md
