import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regvar import (
    BenchmarkDistribution,
    Dendrogram,
    SimilarityMatrix,
    TokenStream,
    build_benchmark,
    credible_interval,
    homogeneity,
    homogeneity_scores,
    leaf_order,
    profile,
    similarity_matrix,
    summarize_homogeneity,
    ward_cluster,
)
from regvar.analysis import (
    dendrogram_from_json,
    dendrogram_to_json,
    homogeneity_to_csv,
    matrix_from_csv,
    matrix_to_csv,
    profile_from_csv,
    profile_to_csv,
)
from regvar.similarity import CONDITION_LABELS


def fake_bench(mean=0.3, std=0.15):
    return BenchmarkDistribution(
        language_code="zzz", mean=mean, std=std, n=6,
        per_condition_means={c: mean for c in CONDITION_LABELS},
    )


@pytest.fixture(scope="module")
def bench(tw_stream, wk_stream, cc_stream, space_c3):
    return build_benchmark(
        tw_stream, wk_stream, cc_stream, space_c3,
        n_pairs=15, sample_size=300, master_seed=5, language_code="zzz",
    )


# --- independent Ward oracle -------------------------------------------------
#
# Cluster distance computed in closed form from the base matrix:
#   D(A,B) = 2|A||B|/(|A|+|B|) * ( e(A,B)/(|A||B|)
#            - e(A,A)/(2|A|^2) - e(B,B)/(2|B|^2) )
# with e(X,Y) the ordered sum of base distances. This reproduces the
# Lance-Williams Ward recursion (base case: singleton distance itself)
# without performing any recursive update.

def ward_oracle(base):
    n = len(base)

    def e(xs, ys):
        return math.fsum(base[x][y] for x in xs for y in ys)

    def dist(a, b):
        na, nb = len(a), len(b)
        return (2.0 * na * nb / (na + nb)) * (
            e(a, b) / (na * nb)
            - e(a, a) / (2.0 * na * na)
            - e(b, b) / (2.0 * nb * nb)
        )

    clusters = [frozenset([i]) for i in range(n)]
    merges = []
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = dist(clusters[i], clusters[j])
                if best is None or d < best[0]:
                    best = (d, i, j)
        d, i, j = best
        merges.append((clusters[i], clusters[j], d))
        merged = clusters[i] | clusters[j]
        clusters = [c for t, c in enumerate(clusters) if t not in (i, j)]
        clusters.append(merged)
    return merges


def merge_leafsets(dendrogram):
    """Implementation merges as frozensets of leaf indices."""
    n = len(dendrogram.leaves)
    node_set = {i: frozenset([i]) for i in range(n)}
    out = []
    for t, (a, b, height, size) in enumerate(dendrogram.merges):
        sa, sb = node_set[a], node_set[b]
        node_set[n + t] = sa | sb
        assert size == len(sa | sb)
        out.append((sa, sb, height))
    return out


def random_similarity_matrix(rng, n=4):
    raw = rng.uniform(-0.9, 0.9, size=(n, n))
    values = (raw + raw.T) / 2
    np.fill_diagonal(values, 1.0)
    ids = tuple(f"c{i}" for i in range(n))
    return SimilarityMatrix(corpus_ids=ids, values=values)


class TestCredibleInterval:
    def test_degenerate_collapses(self):
        lo, hi = credible_interval([2.0, 2.0, 2.0, 2.0])
        assert lo == hi == 2.0

    def test_contains_mean_and_is_symmetric(self):
        values = [0.1, 0.5, 0.9, 0.3, 0.7]
        lo, hi = credible_interval(values)
        mean = np.mean(values)
        assert lo <= mean <= hi
        assert hi - mean == pytest.approx(mean - lo, abs=1e-12)

    def test_known_t_quantile(self):
        # n=4, df=3: t_{0.95,3} = 2.353363...; s=1, half-width = t/2.
        values = [-1.5, -0.5, 0.5, 1.5]
        s = np.std(values, ddof=1)
        lo, hi = credible_interval(values)
        assert hi == pytest.approx(2.3533634348018264 * s / 2.0, abs=1e-9)

    def test_needs_two_values(self):
        with pytest.raises(ValueError):
            credible_interval([1.0])


class TestHomogeneity:
    def test_identical_text_corpus_degenerate(self):
        from regvar import select_features, W1

        # Repeating 4-word pattern: every 100-word window has counts
        # (50, 25, 25), identical across offsets but with rank variance.
        words = tuple(["alpha", "alpha", "beta", "gamma"] * 200)
        corpus = TokenStream("const", words)
        space = select_features(TokenStream("bg", words), W1, k=3)
        report = homogeneity(
            corpus, fake_bench(), space, n_pairs=10, sample_size=100, master_seed=3
        )
        # Every window has identical counts, so every pair lands on one z
        # (up to summation rounding of the constant z population).
        expected = (1.0 - 0.3) / 0.15
        assert report.mean_z == pytest.approx(expected, abs=1e-12)
        assert report.std_z == pytest.approx(0.0, abs=1e-12)
        lo, hi = report.interval_90
        assert hi - lo == pytest.approx(0.0, abs=1e-12)
        assert report.bayes_mean == report.mean_z
        assert report.outliers == ()

    def test_n_pairs_contract(self, tw_stream, bench, space_c3):
        report = homogeneity(
            tw_stream, bench, space_c3, n_pairs=100, sample_size=300, master_seed=9
        )
        assert report.n_pairs == 100
        lo, hi = report.interval_90
        assert lo <= report.bayes_mean <= hi

    def test_pure_beats_mixtures(self, tw_stream, mix2_stream, mix4_stream, bench, space_c3):
        kwargs = dict(n_pairs=40, sample_size=300, master_seed=9)
        pure = homogeneity(tw_stream, bench, space_c3, **kwargs)
        mix2 = homogeneity(mix2_stream, bench, space_c3, **kwargs)
        mix4 = homogeneity(mix4_stream, bench, space_c3, **kwargs)
        assert pure.mean_z > mix2.mean_z > mix4.mean_z

    def test_outlier_rule(self):
        # Eleven tight scores and one far below mean - 3*std (cutoff ~ -1.74).
        tight = [(f"0-{i}", 0.95 + 0.01 * i) for i in range(11)]
        scores = tight + [("9-9", -2.0)]
        report = summarize_homogeneity("x", scores)
        assert [pid for pid, _ in report.outliers] == ["9-9"]
        zs = [z for _, z in scores]
        cutoff = np.mean(zs) - 3 * np.std(zs)
        assert all(z >= cutoff for pid, z in scores if pid != "9-9")

    def test_summary_too_small(self):
        with pytest.raises(ValueError):
            summarize_homogeneity("x", [("0-1", 1.0)])


class TestProfile:
    def test_sources_and_coordinates(self, tw_stream, wk_stream, bench, space_c3):
        reg_profile = profile(
            tw_stream, wk_stream, [], bench, space_c3,
            n_samples=12, sample_size=300, master_seed=9,
        )
        assert reg_profile.sources() == ("tw_syn", "wk_syn")
        assert len(reg_profile.points) == 24
        for p in reg_profile.points:
            assert math.isfinite(p.z_to_tw) and math.isfinite(p.z_to_wk)

    def test_tw_axis_matches_homogeneity(self, tw_stream, wk_stream, bench, space_c3):
        # Same seed and pair structure: TW's own y-coordinates are exactly
        # its self-similarity population.
        n = 15
        reg_profile = profile(
            tw_stream, wk_stream, [], bench, space_c3,
            n_samples=n, sample_size=300, master_seed=21,
        )
        tw_points = [p for p in reg_profile.points if p.source_corpus_id == "tw_syn"]
        report = homogeneity(
            tw_stream, bench, space_c3, n_pairs=n, sample_size=300, master_seed=21
        )
        assert np.mean([p.z_to_tw for p in tw_points]) == pytest.approx(
            report.mean_z, abs=1e-9
        )

    def test_wk_reference_never_own_sample(self, tw_stream, wk_stream, bench, space_c3):
        reg_profile = profile(
            tw_stream, wk_stream, [], bench, space_c3,
            n_samples=20, sample_size=300, master_seed=9,
        )
        for p in reg_profile.points:
            if p.source_corpus_id == "wk_syn":
                assert math.isfinite(p.z_to_wk)

    def test_extra_corpus_included(self, tw_stream, wk_stream, mix2_stream, bench, space_c3):
        reg_profile = profile(
            tw_stream, wk_stream, [mix2_stream], bench, space_c3,
            n_samples=8, sample_size=300, master_seed=9,
        )
        assert reg_profile.sources() == ("tw_syn", "wk_syn", "mix2_syn")


class TestSimilarityMatrix:
    def test_exactly_symmetric(self, tw_stream, wk_stream, cc_stream, space_c3):
        matrix = similarity_matrix(
            [tw_stream, wk_stream, cc_stream], space_c3,
            n_pairs=8, sample_size=300, master_seed=9,
        )
        assert (matrix.values == matrix.values.T).all()
        assert matrix.corpus_ids == ("tw_syn", "wk_syn", "cc_syn")

    def test_identical_corpora_off_diagonal_near_diagonal(self, tw_stream, space_c3):
        clone = TokenStream("clone", tw_stream.words)
        matrix = similarity_matrix(
            [tw_stream, clone], space_c3, n_pairs=25, sample_size=300, master_seed=9
        )
        diag = np.diag(matrix.values)
        off = matrix.values[0, 1]
        assert abs(off - diag.mean()) < 0.15

    def test_same_register_blocks_dominate(self, lang, space_c3):
        a1 = lang.register_stream("a1", "tw", 20_000, seed=1)
        a2 = lang.register_stream("a2", "tw", 20_000, seed=2)
        b1 = lang.register_stream("b1", "wk", 20_000, seed=3)
        b2 = lang.register_stream("b2", "wk", 20_000, seed=4)
        matrix = similarity_matrix(
            [a1, a2, b1, b2], space_c3, n_pairs=10, sample_size=300, master_seed=9
        )
        assert matrix.values[0, 1] > max(matrix.values[0, 2], matrix.values[0, 3])
        assert matrix.values[2, 3] > max(matrix.values[0, 2], matrix.values[1, 2])


class TestWardCluster:
    def test_single_corpus_trivial(self):
        matrix = SimilarityMatrix(("only",), np.array([[0.8]]))
        dendrogram = ward_cluster(matrix)
        assert dendrogram.leaves == ("only",)
        assert dendrogram.merges == ()

    def test_two_corpora_height_is_distance(self):
        values = np.array([[0.9, 0.4], [0.4, 0.8]])
        dendrogram = ward_cluster(SimilarityMatrix(("a", "b"), values))
        ((a, b, height, size),) = dendrogram.merges
        assert (a, b, size) == (0, 1, 2)
        assert height == pytest.approx(0.6, abs=1e-15)

    def test_matches_oracle_on_random_matrices(self):
        rng = np.random.default_rng(4242)
        for _ in range(60):
            n = int(rng.integers(2, 7))
            matrix = random_similarity_matrix(rng, n)
            dendrogram = ward_cluster(matrix)
            base = 1.0 - matrix.values
            np.fill_diagonal(base, 0.0)
            expected = ward_oracle(base.tolist())
            got = merge_leafsets(dendrogram)
            assert len(got) == len(expected) == n - 1
            for (ga, gb, gh), (ea, eb, eh) in zip(got, expected):
                assert {ga, gb} == {ea, eb}
                assert gh == pytest.approx(eh, abs=1e-9)

    def test_heights_monotone_and_merge_count(self):
        rng = np.random.default_rng(77)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            dendrogram = ward_cluster(random_similarity_matrix(rng, n))
            assert len(dendrogram.merges) == n - 1
            assert dendrogram.heights_monotone

    def test_same_register_pairs_merge_first(self, lang, space_c3):
        a1 = lang.register_stream("a1", "tw", 20_000, seed=1)
        a2 = lang.register_stream("a2", "tw", 20_000, seed=2)
        b1 = lang.register_stream("b1", "wk", 20_000, seed=3)
        b2 = lang.register_stream("b2", "wk", 20_000, seed=4)
        matrix = similarity_matrix(
            [a1, a2, b1, b2], space_c3, n_pairs=10, sample_size=300, master_seed=9
        )
        dendrogram = ward_cluster(matrix)
        first_two = {frozenset(m[:2]) for m in dendrogram.merges[:2]}
        assert first_two == {frozenset({0, 1}), frozenset({2, 3})}

    def test_leaf_order_covers_all(self):
        rng = np.random.default_rng(11)
        dendrogram = ward_cluster(random_similarity_matrix(rng, 6))
        assert sorted(leaf_order(dendrogram)) == list(range(6))


class TestSerialization:
    def test_profile_csv_round_trip(self, tw_stream, wk_stream, bench, space_c3):
        reg_profile = profile(
            tw_stream, wk_stream, [], bench, space_c3,
            n_samples=5, sample_size=300, master_seed=9,
        )
        restored = profile_from_csv(profile_to_csv(reg_profile))
        assert restored == reg_profile

    def test_matrix_csv_round_trip(self):
        rng = np.random.default_rng(5)
        matrix = random_similarity_matrix(rng, 3)
        restored = matrix_from_csv(matrix_to_csv(matrix))
        assert restored.corpus_ids == matrix.corpus_ids
        assert np.array_equal(restored.values, matrix.values)

    def test_dendrogram_json_round_trip(self):
        rng = np.random.default_rng(6)
        matrix = random_similarity_matrix(rng, 4)
        dendrogram = ward_cluster(matrix)
        restored = dendrogram_from_json(dendrogram_to_json(dendrogram), matrix)
        assert restored == dendrogram

    def test_homogeneity_csv_columns(self, tw_stream, bench, space_c3):
        report = homogeneity(
            tw_stream, bench, space_c3, n_pairs=5, sample_size=300, master_seed=9
        )
        text = homogeneity_to_csv([report])
        header = text.splitlines()[0]
        assert header == "corpus_id,mean_z,std_z,bayes_mean,lo90,hi90,n_pairs"
        assert text.splitlines()[1].startswith("tw_syn,")
