"""Language identification filter.

Any object with ``score(text) -> (language, confidence)`` can act as the
classifier.  The bundled :class:`TrigramClassifier` is a small naive-Bayes
scorer over character trigrams, trained on short sample paragraphs shipped
with the package; it only knows a handful of Latin-script languages.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from functools import lru_cache
from importlib import resources
from typing import Mapping, Protocol

_NON_LETTER = re.compile(r"[^\w]|[\d_]+")

BUNDLED_LANGUAGES = ("de", "en", "es", "fr", "it", "nl", "pt")


class LanguageClassifier(Protocol):
    def score(self, text: str) -> tuple[str, float]: ...


def trigrams(text: str) -> Counter[str]:
    out: Counter[str] = Counter()
    for word in _NON_LETTER.sub(" ", text.lower()).split():
        padded = f" {word} "
        for i in range(len(padded) - 2):
            out[padded[i : i + 3]] += 1
    return out


class TrigramClassifier:
    """Naive Bayes over character trigrams with add-one smoothing.

    Confidence is the posterior of the best language multiplied by the share
    of the input's trigrams that any profile has seen, so text in an unknown
    script scores near zero instead of being forced onto some language.
    """

    def __init__(self, samples: Mapping[str, str]):
        self.languages = sorted(samples)
        self.counts = {lang: trigrams(samples[lang]) for lang in self.languages}
        self.vocab = set().union(*self.counts.values())
        self.totals = {lang: sum(c.values()) for lang, c in self.counts.items()}

    def score(self, text: str) -> tuple[str, float]:
        grams = trigrams(text)
        total = sum(grams.values())
        if total == 0:
            return "und", 0.0
        known = {g: n for g, n in grams.items() if g in self.vocab}
        coverage = sum(known.values()) / total
        if not known:
            return "und", 0.0
        v = len(self.vocab)
        logp = {}
        for lang in self.languages:
            counts, denom = self.counts[lang], self.totals[lang] + v
            logp[lang] = sum(n * math.log((counts.get(g, 0) + 1) / denom) for g, n in known.items())
        best = max(logp, key=lambda k: (logp[k], k))
        top = logp[best]
        z = sum(math.exp(lp - top) for lp in logp.values())
        return best, coverage / z


@lru_cache(maxsize=1)
def default_classifier() -> TrigramClassifier:
    base = resources.files("literate_bench.curation") / "profiles"
    samples = {lang: (base / f"{lang}.txt").read_text(encoding="utf-8") for lang in BUNDLED_LANGUAGES}
    return TrigramClassifier(samples)


def language_keep(
    text: str,
    classifier: LanguageClassifier | None = None,
    threshold: float = 0.5,
    language: str = "en",
) -> bool:
    """Keep iff the classifier says ``language`` with confidence >= threshold."""
    clf = classifier if classifier is not None else default_classifier()
    lang, confidence = clf.score(text)
    return lang == language and confidence >= threshold
