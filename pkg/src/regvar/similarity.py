"""Spearman-rho corpus similarity and per-language z-score standardization.

Rho is computed as the Pearson correlation of average (fractional) ranks,
which stays unbiased under the heavy zero-count ties of large fixed feature
spaces. The popular 6*sum(d^2)/(n(n^2-1)) shortcut is deliberately not used:
it is biased when ties are present.

Raw rho values are language-specific, so they are standardized into z-scores
against a benchmark distribution pooled over six conditions: the three
same-register and three cross-register pairings of the TW, WK, and CC
corpora.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .corpus import PairSet, TokenStream, build_pair_set, sample_subcorpus
from .errors import (
    DegenerateBenchmarkError,
    DegenerateVectorError,
    ManifestError,
    SpaceMismatchError,
)
from .features import FeatureSpace, FrequencyVector, vectorize

# Benchmarks narrower than this cannot meaningfully standardize anything.
STD_EPSILON = 1e-9

CONDITION_LABELS = ("TW-TW", "WK-WK", "CC-CC", "TW-WK", "CC-WK", "CC-TW")


@dataclass(frozen=True)
class SimilarityScore:
    """One pairwise comparison: raw rho plus optional standardized z."""

    rho: float
    condition: tuple[str, str]
    sample_indices: tuple[int, int]
    z: float | None = None


@dataclass(frozen=True)
class BenchmarkDistribution:
    """Pooled mean/std of benchmark rhos for one language.

    ``std`` is the population standard deviation: the benchmark is the
    reference population, not a sample from one.
    """

    language_code: str
    mean: float
    std: float
    n: int
    per_condition_means: dict[str, float]


def _unit_ranks(counts: np.ndarray) -> np.ndarray:
    """Average-rank the counts, center, and scale to unit norm."""
    ranks = rankdata(counts, method="average")
    centered = ranks - ranks.mean()
    norm = float(np.linalg.norm(centered))
    if norm == 0.0:
        raise DegenerateVectorError(
            "vector has zero rank variance (all counts equal); "
            "an all-zero vector usually means a broken feature space"
        )
    return centered / norm


def spearman_rho(v1: FrequencyVector, v2: FrequencyVector) -> float:
    """Spearman rank correlation of two frequency vectors over one space.

    Ties get average ranks; the result is the Pearson correlation of the two
    rank sequences, exactly symmetric in its arguments and clipped into
    [-1, 1] against last-bit rounding.
    """
    if v1.space_id != v2.space_id:
        raise SpaceMismatchError(
            f"feature spaces differ: {v1.space_id} vs {v2.space_id}"
        )
    return _rho_from_units(_unit_ranks(v1.counts), _unit_ranks(v2.counts))


def _rho_from_units(u1: np.ndarray, u2: np.ndarray) -> float:
    return float(min(1.0, max(-1.0, float(np.dot(u1, u2)))))


class _RankCache:
    """Vectorizes and rank-normalizes each distinct sub-corpus exactly once."""

    def __init__(self, space: FeatureSpace):
        self.space = space
        self._units: dict[tuple[str, int], np.ndarray] = {}

    def unit(self, sub) -> np.ndarray:
        key = sub.key
        if key not in self._units:
            self._units[key] = _unit_ranks(vectorize(sub, self.space).counts)
        return self._units[key]

    def rho(self, sub_a, sub_b) -> float:
        return _rho_from_units(self.unit(sub_a), self.unit(sub_b))


def pair_set_rhos(pair_set: PairSet, space: FeatureSpace, cache: _RankCache | None = None) -> list[float]:
    """Rho for every pair of a pair set, in pair order."""
    cache = cache or _RankCache(space)
    return [cache.rho(a, b) for a, b in pair_set.pairs]


def build_benchmark(
    tw: TokenStream,
    wk: TokenStream,
    cc: TokenStream,
    space: FeatureSpace,
    n_pairs: int,
    sample_size: int,
    master_seed: int,
    language_code: str = "und",
) -> BenchmarkDistribution:
    """Pool rho over the six TW/WK/CC conditions into one z-score benchmark."""
    streams = {"TW": tw, "WK": wk, "CC": cc}
    cache = _RankCache(space)
    per_condition_means: dict[str, float] = {}
    pooled: list[float] = []
    for label in CONDITION_LABELS:
        role_a, role_b = label.split("-")
        pair_set = build_pair_set(
            streams[role_a], streams[role_b], n_pairs, sample_size, master_seed
        )
        rhos = pair_set_rhos(pair_set, space, cache)
        per_condition_means[label] = float(np.mean(rhos))
        pooled.extend(rhos)
    values = np.asarray(pooled)
    return BenchmarkDistribution(
        language_code=language_code,
        mean=float(values.mean()),
        std=float(values.std()),
        n=len(pooled),
        per_condition_means=per_condition_means,
    )


def standardize(rho: float, bench: BenchmarkDistribution) -> float:
    """Map a raw rho onto the benchmark's z-scale: (rho - mean) / std."""
    if not bench.std > STD_EPSILON:
        raise DegenerateBenchmarkError(
            f"benchmark std {bench.std!r} is below {STD_EPSILON}; "
            "the benchmark corpora are too alike to standardize against"
        )
    return (rho - bench.mean) / bench.std


def benchmark_to_json(bench: BenchmarkDistribution) -> str:
    payload = {
        "language_code": bench.language_code,
        "mean": bench.mean,
        "std": bench.std,
        "n": bench.n,
        "per_condition_means": bench.per_condition_means,
    }
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def benchmark_from_json(text: str) -> BenchmarkDistribution:
    try:
        payload = json.loads(text)
        return BenchmarkDistribution(
            language_code=payload["language_code"],
            mean=float(payload["mean"]),
            std=float(payload["std"]),
            n=int(payload["n"]),
            per_condition_means={
                k: float(v) for k, v in payload["per_condition_means"].items()
            },
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ManifestError(f"bad benchmark JSON: {exc}") from exc


def load_benchmark(path: Path | str) -> BenchmarkDistribution:
    return benchmark_from_json(Path(path).read_text(encoding="utf-8"))
