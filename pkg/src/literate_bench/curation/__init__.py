"""Pre-training corpus curation: language filter, near-dedup, alignment, mixing."""

from .align import alignment_ratio, filter_aligned
from .langid import TrigramClassifier, default_classifier, language_keep
from .minhash import DedupConfig, dedup, estimate_jaccard, exact_jaccard, shingle, signature
from .mixture import MixtureSource, MixtureSpec, SourceError, sample_mixture

__all__ = [
    "DedupConfig",
    "MixtureSource",
    "MixtureSpec",
    "SourceError",
    "TrigramClassifier",
    "alignment_ratio",
    "dedup",
    "default_classifier",
    "estimate_jaccard",
    "exact_jaccard",
    "filter_aligned",
    "language_keep",
    "sample_mixture",
    "shingle",
    "signature",
]
