"""Homogeneity, register profiles, and Ward clustering of corpora.

Homogeneity is self-similarity: the distribution of standardized rho over
pairs of sub-corpora drawn from one corpus. Its mean gets a Bayesian
treatment: the posterior of a Gaussian mean with unknown variance under the
Jeffreys prior, i.e. a Student-t central 90% credible interval around the
sample mean.

Register profiles place every sample in a plane of standardized similarity
to a TW reference (y) and a WK reference (x); higher means more similar.
The y-coordinates of TW's own samples are exactly its self-similarity
population, so profiles and homogeneity agree by construction when run with
the same seed and pair count.

Clustering converts mean similarity to distance (d = 1 - rho) and runs
agglomerative Ward linkage via the Lance-Williams update.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

from .corpus import TokenStream, build_pair_set, derive_rng, sample_subcorpus
from .errors import ManifestError
from .features import FeatureSpace
from .similarity import BenchmarkDistribution, _RankCache, standardize

DEFAULT_HOMOGENEITY_PAIRS = 100
OUTLIER_SIGMA = 3.0
CREDIBLE_LEVEL = 0.90


@dataclass(frozen=True)
class HomogeneityReport:
    """Self-similarity summary for one corpus."""

    corpus_id: str
    mean_z: float
    std_z: float
    bayes_mean: float
    interval_90: tuple[float, float]
    n_pairs: int
    outliers: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class ProfilePoint:
    source_corpus_id: str
    sample_index: int
    z_to_tw: float
    z_to_wk: float


@dataclass(frozen=True)
class RegisterProfile:
    """Two-axis register plane: one point per sample pair."""

    points: tuple[ProfilePoint, ...]

    def sources(self) -> tuple[str, ...]:
        seen: list[str] = []
        for p in self.points:
            if p.source_corpus_id not in seen:
                seen.append(p.source_corpus_id)
        return tuple(seen)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric matrix of mean rho between corpora (diagonal = self-mean)."""

    corpus_ids: tuple[str, ...]
    values: np.ndarray


@dataclass(frozen=True)
class Dendrogram:
    """Ward merge tree. Node ids: leaves 0..n-1, then n, n+1, ... per merge."""

    leaves: tuple[str, ...]
    merges: tuple[tuple[int, int, float, int], ...]
    matrix: SimilarityMatrix

    @property
    def heights_monotone(self) -> bool:
        heights = [m[2] for m in self.merges]
        return all(b >= a for a, b in zip(heights, heights[1:]))


def credible_interval(values, level: float = CREDIBLE_LEVEL) -> tuple[float, float]:
    """Student-t central credible interval for the mean (Jeffreys prior)."""
    data = np.asarray(values, dtype=float)
    n = data.size
    if n < 2:
        raise ValueError("credible interval needs at least 2 values")
    mean = float(data.mean())
    s = float(data.std(ddof=1))
    half = float(student_t.ppf(0.5 + level / 2.0, n - 1)) * s / math.sqrt(n)
    return (mean - half, mean + half)


def homogeneity_scores(
    corpus: TokenStream,
    bench: BenchmarkDistribution,
    space: FeatureSpace,
    n_pairs: int,
    sample_size: int,
    master_seed: int,
) -> list[tuple[str, float]]:
    """Standardized self-similarity of each sampled pair, as (pair_id, z)."""
    pair_set = build_pair_set(corpus, corpus, n_pairs, sample_size, master_seed)
    cache = _RankCache(space)
    return [
        (f"{a.sample_index}-{b.sample_index}", standardize(cache.rho(a, b), bench))
        for a, b in pair_set.pairs
    ]


def summarize_homogeneity(
    corpus_id: str, scores: list[tuple[str, float]]
) -> HomogeneityReport:
    """Aggregate pair z-scores into the homogeneity report."""
    if len(scores) < 2:
        raise ValueError("homogeneity needs at least 2 pairs")
    zs = np.array([z for _, z in scores])
    mean_z = float(zs.mean())
    std_z = float(zs.std())
    cutoff = mean_z - OUTLIER_SIGMA * std_z
    return HomogeneityReport(
        corpus_id=corpus_id,
        mean_z=mean_z,
        std_z=std_z,
        bayes_mean=mean_z,
        interval_90=credible_interval(zs),
        n_pairs=len(scores),
        outliers=tuple((pid, z) for pid, z in scores if z < cutoff),
    )


def homogeneity(
    corpus: TokenStream,
    bench: BenchmarkDistribution,
    space: FeatureSpace,
    n_pairs: int = DEFAULT_HOMOGENEITY_PAIRS,
    sample_size: int = 10_000,
    master_seed: int = 0,
) -> HomogeneityReport:
    """Estimate a corpus's self-similarity from a same-corpus pair set."""
    scores = homogeneity_scores(corpus, bench, space, n_pairs, sample_size, master_seed)
    return summarize_homogeneity(corpus.corpus_id, scores)


def profile(
    tw: TokenStream,
    wk: TokenStream,
    extras: list[TokenStream],
    bench: BenchmarkDistribution,
    space: FeatureSpace,
    n_samples: int,
    sample_size: int,
    master_seed: int,
) -> RegisterProfile:
    """Place samples of every corpus in the (z-to-WK, z-to-TW) plane.

    For each source corpus the samples and their TW references come from the
    same pair sets homogeneity uses, so TW's own y-coordinates reproduce its
    self-similarity run for run. WK references are drawn fresh per point and
    never coincide with the point's own sample.
    """
    cache = _RankCache(space)
    ref_universe = max(2, 2 * n_samples)
    points: list[ProfilePoint] = []
    for source in [tw, wk, *extras]:
        tw_pairs = build_pair_set(source, tw, n_samples, sample_size, master_seed)
        for i, (sample, tw_ref) in enumerate(tw_pairs.pairs):
            rng = derive_rng(master_seed, "profile-wk-ref", source.corpus_id, str(i))
            wk_index = rng.randrange(ref_universe)
            while source.corpus_id == wk.corpus_id and wk_index == sample.sample_index:
                wk_index = rng.randrange(ref_universe)
            wk_ref = sample_subcorpus(wk, wk_index, sample_size, master_seed)
            points.append(
                ProfilePoint(
                    source_corpus_id=source.corpus_id,
                    sample_index=sample.sample_index,
                    z_to_tw=standardize(cache.rho(sample, tw_ref), bench),
                    z_to_wk=standardize(cache.rho(sample, wk_ref), bench),
                )
            )
    return RegisterProfile(points=tuple(points))


def similarity_matrix(
    corpora: list[TokenStream],
    space: FeatureSpace,
    n_pairs: int,
    sample_size: int,
    master_seed: int,
) -> SimilarityMatrix:
    """Mean rho between every pair of corpora, computed once and mirrored."""
    ids = tuple(stream.corpus_id for stream in corpora)
    if len(set(ids)) != len(ids):
        raise ManifestError(f"similarity matrix needs distinct corpus ids, got {ids}")
    cache = _RankCache(space)
    n = len(corpora)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            pair_set = build_pair_set(
                corpora[i], corpora[j], n_pairs, sample_size, master_seed
            )
            mean = float(
                np.mean([cache.rho(a, b) for a, b in pair_set.pairs])
            )
            values[i, j] = mean
            values[j, i] = mean
    return SimilarityMatrix(corpus_ids=ids, values=values)


def ward_cluster(matrix: SimilarityMatrix) -> Dendrogram:
    """Agglomerative Ward clustering of a similarity matrix.

    Similarities become distances via d = 1 - rho; cluster distances follow
    the Lance-Williams update with Ward coefficients. Fewer than two leaves
    give a trivial dendrogram with no merges.
    """
    ids = matrix.corpus_ids
    n = len(ids)
    if n < 2:
        return Dendrogram(leaves=ids, merges=(), matrix=matrix)

    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = 1.0 - float(matrix.values[i, j])
    sizes = {i: 1 for i in range(n)}
    active = list(range(n))
    merges: list[tuple[int, int, float, int]] = []
    next_id = n
    while len(active) > 1:
        best = min(
            ((dist[(min(a, b), max(a, b))], a, b)
             for idx, a in enumerate(active) for b in active[idx + 1:]),
            key=lambda t: (t[0], t[1], t[2]),
        )
        height, a, b = best
        size = sizes[a] + sizes[b]
        merged = next_id
        next_id += 1
        for k in active:
            if k in (a, b):
                continue
            d_ak = dist[(min(a, k), max(a, k))]
            d_bk = dist[(min(b, k), max(b, k))]
            d_ab = height
            dist[(k, merged)] = (
                (sizes[a] + sizes[k]) * d_ak
                + (sizes[b] + sizes[k]) * d_bk
                - sizes[k] * d_ab
            ) / (size + sizes[k])
        sizes[merged] = size
        active = [k for k in active if k not in (a, b)] + [merged]
        merges.append((min(a, b), max(a, b), height, size))
    return Dendrogram(leaves=ids, merges=tuple(merges), matrix=matrix)


def leaf_order(dendrogram: Dendrogram) -> list[int]:
    """Left-to-right leaf indices as the merge tree would be drawn."""
    n = len(dendrogram.leaves)
    children = {
        n + t: (a, b) for t, (a, b, _, _) in enumerate(dendrogram.merges)
    }

    def walk(node: int) -> list[int]:
        if node < n:
            return [node]
        a, b = children[node]
        return walk(a) + walk(b)

    if not dendrogram.merges:
        return list(range(n))
    return walk(n + len(dendrogram.merges) - 1)


def homogeneity_to_csv(reports: list[HomogeneityReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["corpus_id", "mean_z", "std_z", "bayes_mean", "lo90", "hi90", "n_pairs"]
    )
    for r in reports:
        writer.writerow(
            [r.corpus_id, repr(r.mean_z), repr(r.std_z), repr(r.bayes_mean),
             repr(r.interval_90[0]), repr(r.interval_90[1]), r.n_pairs]
        )
    return buf.getvalue()


def homogeneity_to_json(
    reports: list[HomogeneityReport],
    scores: dict[str, list[tuple[str, float]]] | None = None,
) -> str:
    """JSON report; per-pair scores ride along so plots can be re-rendered."""
    payload = []
    for r in reports:
        entry = {
            "corpus_id": r.corpus_id,
            "mean_z": r.mean_z,
            "std_z": r.std_z,
            "bayes_mean": r.bayes_mean,
            "lo90": r.interval_90[0],
            "hi90": r.interval_90[1],
            "n_pairs": r.n_pairs,
            "outliers": [{"pair": pid, "z": z} for pid, z in r.outliers],
        }
        if scores and r.corpus_id in scores:
            entry["scores"] = [
                {"pair": pid, "z": z} for pid, z in scores[r.corpus_id]
            ]
        payload.append(entry)
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def profile_to_csv(reg_profile: RegisterProfile) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "sample_index", "z_to_TW", "z_to_WK"])
    for p in reg_profile.points:
        writer.writerow(
            [p.source_corpus_id, p.sample_index, repr(p.z_to_tw), repr(p.z_to_wk)]
        )
    return buf.getvalue()


def profile_from_csv(text: str) -> RegisterProfile:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["source", "sample_index", "z_to_TW", "z_to_WK"]:
        raise ManifestError(f"bad profile CSV header: {header}")
    points = tuple(
        ProfilePoint(row[0], int(row[1]), float(row[2]), float(row[3]))
        for row in reader
        if row
    )
    return RegisterProfile(points=points)


def matrix_to_csv(matrix: SimilarityMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["corpus_id", *matrix.corpus_ids])
    for cid, row in zip(matrix.corpus_ids, matrix.values):
        writer.writerow([cid, *[repr(float(v)) for v in row]])
    return buf.getvalue()


def matrix_from_csv(text: str) -> SimilarityMatrix:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    ids = tuple(header[1:])
    rows = [[float(v) for v in row[1:]] for row in reader if row]
    return SimilarityMatrix(corpus_ids=ids, values=np.array(rows))


def dendrogram_to_json(dendrogram: Dendrogram) -> str:
    payload = {
        "leaves": list(dendrogram.leaves),
        "merges": [
            {"node_a": a, "node_b": b, "height": h, "merged_size": s}
            for a, b, h, s in dendrogram.merges
        ],
        "heights_monotone": dendrogram.heights_monotone,
    }
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def dendrogram_from_json(text: str, matrix: SimilarityMatrix) -> Dendrogram:
    try:
        payload = json.loads(text)
        merges = tuple(
            (int(m["node_a"]), int(m["node_b"]), float(m["height"]), int(m["merged_size"]))
            for m in payload["merges"]
        )
        return Dendrogram(leaves=tuple(payload["leaves"]), merges=merges, matrix=matrix)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ManifestError(f"bad dendrogram JSON: {exc}") from exc
