"""N-gram feature spaces and frequency vectors.

A feature space is the top-k word or character n-grams of a background
corpus, ordered by descending count with lexicographic tie-breaks so the
ordering is stable across platforms. Character n-grams are taken over the
text reconstructed as words joined by single spaces, so boundary-spanning
n-grams (e.g. "e c" in "the cat") count too. Every vector built against a
space carries a count for every item in it, observed or not.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import SubCorpus, TokenStream
from .errors import ManifestError

DEFAULT_K = 5_000

_WORD_NS = (1, 2)
_CHAR_NS = (2, 3, 4)


@dataclass(frozen=True, order=True)
class FeatureType:
    """One of the five n-gram feature families: W1, W2, C2, C3, C4."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind == "word":
            allowed = _WORD_NS
        elif self.kind == "character":
            allowed = _CHAR_NS
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.n not in allowed:
            raise ValueError(f"{self.kind} n-grams support n in {allowed}, got {self.n}")

    @property
    def code(self) -> str:
        return ("W" if self.kind == "word" else "C") + str(self.n)

    @classmethod
    def from_code(cls, code: str) -> "FeatureType":
        code = code.strip().upper()
        if len(code) != 2 or code[0] not in "WC" or not code[1].isdigit():
            raise ValueError(f"bad feature type code {code!r}")
        return cls(kind="word" if code[0] == "W" else "character", n=int(code[1]))

    def __str__(self) -> str:
        return self.code


W1 = FeatureType("word", 1)
W2 = FeatureType("word", 2)
C2 = FeatureType("character", 2)
C3 = FeatureType("character", 3)
C4 = FeatureType("character", 4)

ALL_FEATURE_TYPES = (W1, W2, C2, C3, C4)


@dataclass(frozen=True)
class FeatureSpace:
    """Ordered top-k n-gram vocabulary selected from a background corpus."""

    feature_type: FeatureType
    items: tuple[str, ...]
    source_corpus_id: str
    k: int

    @property
    def space_id(self) -> str:
        digest = hashlib.sha256("\x1f".join(self.items).encode("utf-8")).hexdigest()
        return f"{self.feature_type.code}:{self.source_corpus_id}:k{self.k}:{digest[:12]}"

    def __len__(self) -> int:
        return len(self.items)


@dataclass(eq=False)
class FrequencyVector:
    """Counts of every feature-space item in one sample, zeros included.

    ``total_ngrams`` counts all n-gram occurrences in the sample, whether or
    not they are in the space.
    """

    space: FeatureSpace
    counts: np.ndarray
    total_ngrams: int

    @property
    def space_id(self) -> str:
        return self.space.space_id


def _sample_words(sample: SubCorpus | TokenStream | Sequence[str]) -> Sequence[str]:
    return sample.words if hasattr(sample, "words") else sample


def extract_ngrams(
    words: SubCorpus | TokenStream | Sequence[str], feature_type: FeatureType
) -> Counter:
    """Count all n-grams of one feature type in a word sequence.

    Word n-grams are windows of n consecutive words joined by single spaces;
    character n-grams are windows of n Unicode scalars over the
    space-joined text. Short inputs yield fewer or zero n-grams.
    """
    tokens = _sample_words(words)
    n = feature_type.n
    if feature_type.kind == "word":
        if n == 1:
            return Counter(tokens)
        return Counter(
            " ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    text = " ".join(tokens)
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def total_ngram_count(
    words: SubCorpus | TokenStream | Sequence[str], feature_type: FeatureType
) -> int:
    """Number of n-gram windows a sample yields (in-space or not)."""
    tokens = _sample_words(words)
    n = feature_type.n
    if feature_type.kind == "word":
        return max(0, len(tokens) - n + 1)
    length = sum(len(t) for t in tokens) + max(0, len(tokens) - 1)  # incl. joining spaces
    return max(0, length - n + 1)


def select_features(
    background: TokenStream, feature_type: FeatureType, k: int = DEFAULT_K
) -> FeatureSpace:
    """Pick the top-k n-grams of the background corpus as a feature space.

    Ordering is by count descending, then lexicographic by code point, so the
    result is deterministic for identical inputs.
    """
    counts = extract_ngrams(background, feature_type)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return FeatureSpace(
        feature_type=feature_type,
        items=tuple(gram for gram, _ in ranked[:k]),
        source_corpus_id=background.corpus_id,
        k=k,
    )


def vectorize(
    sample: SubCorpus | TokenStream | Sequence[str], space: FeatureSpace
) -> FrequencyVector:
    """Count occurrences of each space item in the sample; unseen items get 0."""
    grams = extract_ngrams(sample, space.feature_type)
    counts = np.array([grams.get(item, 0) for item in space.items], dtype=np.int64)
    return FrequencyVector(
        space=space,
        counts=counts,
        total_ngrams=total_ngram_count(sample, space.feature_type),
    )


def feature_space_to_json(space: FeatureSpace) -> str:
    """Serialize a feature space; item order is significant and round-trips."""
    payload = {
        "feature_type": space.feature_type.code,
        "k": space.k,
        "source_corpus_id": space.source_corpus_id,
        "items": list(space.items),
    }
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def feature_space_from_json(text: str) -> FeatureSpace:
    try:
        payload = json.loads(text)
        return FeatureSpace(
            feature_type=FeatureType.from_code(payload["feature_type"]),
            items=tuple(payload["items"]),
            source_corpus_id=payload["source_corpus_id"],
            k=int(payload["k"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ManifestError(f"bad feature space JSON: {exc}") from exc


def load_feature_space(path: Path | str) -> FeatureSpace:
    return feature_space_from_json(Path(path).read_text(encoding="utf-8"))
