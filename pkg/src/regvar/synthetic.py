"""Synthetic Zipfian corpora with controllable register separation.

A :class:`SyntheticLanguage` owns a vocabulary made of one disjoint word
block per register plus a shared core block. Each register's Zipf head sits
on its own block (the disjoint bias) with the shared core as its tail, in a
register-specific order; the background distribution covers the whole
vocabulary in yet another order, the way real background corpora span a
language's lexicon. Two streams drawn from the same register key share a
distribution; streams from different keys overlap only through the core.

Mixture corpora interleave fixed-size blocks drawn from several registers,
which makes their sub-corpora internally inconsistent, the way a
macro-register is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TokenStream, derive_rng

DEFAULT_BLOCK_SIZE = 600
DEFAULT_CORE_SIZE = 600
DEFAULT_ZIPF_EXPONENT = 1.2

_CORE_KEY = "__core__"


def _word_block(label: str, size: int) -> tuple[str, ...]:
    """Deterministic distinct random lowercase words (length 4-8)."""
    rng = derive_rng(0, "synthetic-words", label, str(size))
    words: list[str] = []
    seen = set()
    while len(words) < size:
        word = "".join(
            rng.choice("abcdefghijklmnopqrstuvwxyz")
            for _ in range(rng.randint(4, 8))
        )
        if word not in seen:
            seen.add(word)
            words.append(word)
    return tuple(words)


def _zipf_probabilities(size: int, exponent: float) -> np.ndarray:
    weights = 1.0 / np.arange(1, size + 1, dtype=float) ** exponent
    return weights / weights.sum()


@dataclass(frozen=True)
class SyntheticLanguage:
    """Fixture factory for register-separated Zipfian corpora."""

    register_keys: tuple[str, ...]
    block_size: int = DEFAULT_BLOCK_SIZE
    core_size: int = DEFAULT_CORE_SIZE
    zipf_exponent: float = DEFAULT_ZIPF_EXPONENT

    def _block(self, key: str) -> tuple[str, ...]:
        if key not in self.register_keys:
            raise KeyError(f"unknown register key {key!r}; have {self.register_keys}")
        return _word_block(f"block:{key}", self.block_size)

    def _core(self) -> tuple[str, ...]:
        return _word_block(_CORE_KEY, self.core_size)

    @property
    def vocabulary_size(self) -> int:
        return self.block_size * len(self.register_keys) + self.core_size

    def _ranked_vocab(self, key: str) -> list[str]:
        """Register distribution: own block as the head, shared core as tail."""
        own = list(self._block(key))
        derive_rng(0, "synthetic-rank", key).shuffle(own)
        core = list(self._core())
        derive_rng(0, "synthetic-rank-core", key).shuffle(core)
        return own + core

    def _ranked_background(self) -> list[str]:
        ranked = [w for key in self.register_keys for w in self._block(key)]
        ranked.extend(self._core())
        derive_rng(0, "synthetic-rank-background").shuffle(ranked)
        return ranked

    def _draw(self, corpus_id: str, ranked: list[str], n_words: int, seed: int):
        draw_seed = derive_rng(seed, "synthetic-draw", corpus_id).getrandbits(64)
        rng = np.random.default_rng(draw_seed)
        probs = _zipf_probabilities(len(ranked), self.zipf_exponent)
        indices = rng.choice(len(ranked), size=n_words, p=probs)
        return TokenStream(corpus_id=corpus_id, words=tuple(ranked[i] for i in indices))

    def register_stream(
        self, corpus_id: str, key: str, n_words: int, seed: int
    ) -> TokenStream:
        """Draw a stream from one register's word distribution."""
        return self._draw(corpus_id, self._ranked_vocab(key), n_words, seed)

    def background_stream(self, corpus_id: str, n_words: int, seed: int) -> TokenStream:
        """Draw from the background distribution spanning the whole vocabulary."""
        return self._draw(corpus_id, self._ranked_background(), n_words, seed)

    def mixture_stream(
        self,
        corpus_id: str,
        keys: list[str],
        n_words: int,
        seed: int,
        block_words: int,
    ) -> TokenStream:
        """Interleave fixed-size chunks cycling through several registers."""
        words: list[str] = []
        chunk_index = 0
        while len(words) < n_words:
            key = keys[chunk_index % len(keys)]
            take = min(block_words, n_words - len(words))
            chunk = self.register_stream(
                f"{corpus_id}.chunk{chunk_index}", key, take, seed
            )
            words.extend(chunk.words)
            chunk_index += 1
        return TokenStream(corpus_id=corpus_id, words=tuple(words))
