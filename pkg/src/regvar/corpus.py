"""Corpus loading, normalization, and deterministic sub-corpus sampling.

All randomness flows through :func:`derive_rng`, which hashes a master seed
together with a purpose-specific key path. Two runs with the same inputs and
seed therefore produce identical samples and pair sets regardless of call
order or scheduling.

Normalization applied by :func:`load_corpus` (recorded in
``NORMALIZATION_METADATA`` so emitted artifacts can audit it): Unicode NFC,
default case folding, and collapse of all whitespace runs to single spaces.
"""

from __future__ import annotations

import hashlib
import random
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import (
    CorpusReadError,
    CorpusTooSmallError,
    EmptyCorpusError,
    ManifestError,
    PairingExhaustedError,
)

DEFAULT_SAMPLE_SIZE = 10_000
DEFAULT_N_PAIRS = 250

# Draw budget before build_pair_set gives up, as a multiple of n_pairs.
RETRY_BUDGET_FACTOR = 10

NORMALIZATION_METADATA = {
    "unicode": "NFC",
    "case": "default case folding",
    "whitespace": "runs collapsed to single space",
    "tokenization": "split on Unicode whitespace",
}


@dataclass(frozen=True)
class CorpusManifest:
    """One user-supplied corpus: an id, a register label, and text files."""

    corpus_id: str
    register_label: str
    language_code: str
    paths: tuple[Path, ...]
    declared_word_count: int | None = None

    def __post_init__(self):
        if not self.corpus_id:
            raise ManifestError("corpus_id must be nonempty")
        if not self.paths:
            raise ManifestError(f"corpus {self.corpus_id!r} lists no paths")
        if self.declared_word_count is not None and self.declared_word_count < 0:
            raise ManifestError(
                f"corpus {self.corpus_id!r}: declared_word_count must be nonnegative"
            )


@dataclass(frozen=True)
class TokenStream:
    """Normalized word tokens of one corpus, in document order."""

    corpus_id: str
    words: tuple[str, ...]

    @property
    def word_count(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class SubCorpus:
    """A fixed-size contiguous sample of a corpus.

    ``seed_record`` is the (master_seed, corpus_id, sample_index) triple that,
    together with the source stream, fully determines ``words``.
    """

    corpus_id: str
    sample_index: int
    words: tuple[str, ...]
    seed_record: tuple[int, str, int]

    @property
    def key(self) -> tuple[str, int]:
        return (self.corpus_id, self.sample_index)


@dataclass(frozen=True)
class PairSet:
    """Unordered-unique pairs of sub-corpora for one comparison condition."""

    condition: tuple[str, str]
    pairs: tuple[tuple[SubCorpus, SubCorpus], ...]

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


def derive_rng(master_seed: int, *key: str) -> random.Random:
    """Return an RNG deterministically keyed on the seed and a key path."""
    payload = "\x1f".join([str(master_seed), *key]).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return random.Random(int.from_bytes(digest, "big"))


def normalize_text(text: str) -> str:
    """NFC-normalize, case-fold, and collapse whitespace runs to spaces."""
    folded = unicodedata.normalize("NFC", text).casefold()
    return " ".join(folded.split())


def tokenize(text: str) -> tuple[str, ...]:
    """Normalize ``text`` and split it into word tokens."""
    return tuple(normalize_text(text).split(" ")) if text.strip() else ()


def load_corpus(manifest: CorpusManifest) -> TokenStream:
    """Read, concatenate (in path order), and normalize a corpus.

    Raises :class:`CorpusReadError` naming the first unreadable path and
    :class:`EmptyCorpusError` if nothing survives normalization.
    """
    parts: list[str] = []
    for path in manifest.paths:
        try:
            parts.append(Path(path).read_text(encoding="utf-8"))
        except (OSError, UnicodeError) as exc:
            raise CorpusReadError(f"cannot read corpus file {path}: {exc}") from exc
    # File boundaries act as document separators, identical to blank lines.
    words = tokenize("\n".join(parts))
    if not words:
        raise EmptyCorpusError(
            f"corpus {manifest.corpus_id!r} contains no tokens after normalization"
        )
    return TokenStream(corpus_id=manifest.corpus_id, words=words)


def sample_subcorpus(
    stream: TokenStream, sample_index: int, sample_size: int, master_seed: int
) -> SubCorpus:
    """Draw the deterministic contiguous window for one sample index.

    The start offset is uniform over [0, word_count - sample_size], keyed on
    (master_seed, corpus_id, sample_index).
    """
    if stream.word_count < sample_size:
        raise CorpusTooSmallError(stream.corpus_id, stream.word_count, sample_size)
    rng = derive_rng(master_seed, "window", stream.corpus_id, str(sample_index))
    start = rng.randint(0, stream.word_count - sample_size)
    return SubCorpus(
        corpus_id=stream.corpus_id,
        sample_index=sample_index,
        words=stream.words[start : start + sample_size],
        seed_record=(master_seed, stream.corpus_id, sample_index),
    )


def _index_universe(n_pairs: int) -> int:
    # Wide enough that n_pairs unique pairs exist, narrow enough that
    # individual sub-corpora recur across pairs.
    return max(2, 2 * n_pairs)


def build_pair_set(
    stream_a: TokenStream,
    stream_b: TokenStream,
    n_pairs: int,
    sample_size: int,
    master_seed: int,
    index_universe: int | None = None,
) -> PairSet:
    """Draw ``n_pairs`` unordered-unique pairs of sub-corpora.

    Uniqueness is at the level of (corpus_id, sample_index) tuples; a
    sub-corpus may appear in several pairs. Same-corpus conditions never pair
    a sample index with itself. Gives up with :class:`PairingExhaustedError`
    after ``RETRY_BUDGET_FACTOR * n_pairs`` draws.

    ``index_universe`` overrides the range sample indices are drawn from;
    the default leaves room for n_pairs unique pairs while letting
    sub-corpora recur across pairs.
    """
    for stream in (stream_a, stream_b):
        if stream.word_count < sample_size:
            raise CorpusTooSmallError(stream.corpus_id, stream.word_count, sample_size)

    same_corpus = stream_a.corpus_id == stream_b.corpus_id
    universe = index_universe if index_universe is not None else _index_universe(n_pairs)
    rng = derive_rng(master_seed, "pairs", stream_a.corpus_id, stream_b.corpus_id)

    chosen: list[tuple[int, int]] = []
    seen: set[tuple[tuple[str, int], tuple[str, int]]] = set()
    budget = RETRY_BUDGET_FACTOR * n_pairs
    for _ in range(budget):
        if len(chosen) == n_pairs:
            break
        idx_a = rng.randrange(universe)
        idx_b = rng.randrange(universe)
        if same_corpus and idx_a == idx_b:
            continue
        key = tuple(
            sorted([(stream_a.corpus_id, idx_a), (stream_b.corpus_id, idx_b)])
        )
        if key in seen:
            continue
        seen.add(key)
        chosen.append((idx_a, idx_b))
    if len(chosen) < n_pairs:
        raise PairingExhaustedError(
            f"condition ({stream_a.corpus_id!r}, {stream_b.corpus_id!r}): "
            f"only {len(chosen)} of {n_pairs} unique pairs after {budget} draws"
        )

    cache: dict[tuple[str, int], SubCorpus] = {}

    def _sample(stream: TokenStream, idx: int) -> SubCorpus:
        key = (stream.corpus_id, idx)
        if key not in cache:
            cache[key] = sample_subcorpus(stream, idx, sample_size, master_seed)
        return cache[key]

    pairs = tuple((_sample(stream_a, a), _sample(stream_b, b)) for a, b in chosen)
    return PairSet(condition=(stream_a.corpus_id, stream_b.corpus_id), pairs=pairs)


def parse_manifest(path: Path | str) -> list[CorpusManifest]:
    """Parse a manifest file into a list of corpus descriptions.

    Format: one ``[corpus]`` section per corpus, with ``key = value`` lines
    for corpus_id, register_label, language_code, an optional
    declared_word_count, and one ``path = ...`` line per text file. Relative
    paths are resolved against the manifest's directory. ``#`` starts a
    comment.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except (OSError, UnicodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc

    base = path.parent
    manifests: list[CorpusManifest] = []
    current: dict | None = None

    def _flush():
        nonlocal current
        if current is None:
            return
        try:
            manifests.append(
                CorpusManifest(
                    corpus_id=current.get("corpus_id", ""),
                    register_label=current.get("register_label", ""),
                    language_code=current.get("language_code", "und"),
                    paths=tuple(current["paths"]),
                    declared_word_count=current.get("declared_word_count"),
                )
            )
        except ManifestError as exc:
            raise ManifestError(f"{path}: {exc}") from exc
        current = None

    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped == "[corpus]":
            _flush()
            current = {"paths": []}
            continue
        if "=" not in stripped:
            raise ManifestError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if current is None:
            raise ManifestError(f"{path}:{lineno}: {key!r} outside a [corpus] section")
        if key == "path":
            file_path = Path(value)
            current["paths"].append(file_path if file_path.is_absolute() else base / file_path)
        elif key == "declared_word_count":
            try:
                current[key] = int(value)
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: bad integer {value!r}") from None
        elif key in ("corpus_id", "register_label", "language_code"):
            current[key] = value
        else:
            raise ManifestError(f"{path}:{lineno}: unknown key {key!r}")
    _flush()

    if not manifests:
        raise ManifestError(f"{path}: no [corpus] sections found")
    ids = [m.corpus_id for m in manifests]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ManifestError(f"{path}: duplicate corpus_id(s): {', '.join(dupes)}")
    return manifests
