import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regvar import (
    ALL_FEATURE_TYPES,
    C2,
    C3,
    C4,
    W1,
    W2,
    TokenStream,
    build_report,
    compute_threshold,
    cross_validate,
    fold_partition,
    predict_same,
    select_best_feature_type,
)
from regvar.errors import FoldConstructionError

SAME = ("TW-TW", "WK-WK", "CC-CC")
CROSS = ("TW-WK", "CC-WK", "CC-TW")


def as_means(same_values, cross_values):
    return dict(zip(SAME, same_values)), dict(zip(CROSS, cross_values))


finite = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


class TestThreshold:
    def test_worked_example(self):
        same, cross = as_means([0.80, 0.90, 0.85], [0.40, 0.50, 0.45])
        assert compute_threshold(same, cross).value == 0.65

    def test_perfect_separation(self):
        same, cross = as_means([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        assert compute_threshold(same, cross).value == 0.5

    def test_overlapping_regime_no_clamping(self):
        same, cross = as_means([0.5, 0.6, 0.7], [0.55, 0.65, 0.75])
        assert compute_threshold(same, cross).value == 0.625

    @given(st.lists(finite, min_size=3, max_size=3),
           st.lists(finite, min_size=3, max_size=3))
    @settings(max_examples=200, deadline=None)
    def test_bit_exact_recompute(self, same_values, cross_values):
        same, cross = as_means(same_values, cross_values)
        threshold = compute_threshold(same, cross)
        recomputed = 0.5 * (
            min(threshold.same_condition_means.values())
            + max(threshold.cross_condition_means.values())
        )
        assert threshold.value == recomputed  # bit-for-bit


class TestPredictSame:
    def setup_method(self):
        same, cross = as_means([0.8, 0.9, 0.85], [0.4, 0.5, 0.45])
        self.threshold = compute_threshold(same, cross)

    def test_above(self):
        assert predict_same(0.70, self.threshold) is True

    def test_below(self):
        assert predict_same(0.60, self.threshold) is False

    def test_tie_predicts_different(self):
        assert predict_same(0.65, self.threshold) is False


class TestFoldPartition:
    @given(st.integers(5, 60))
    @settings(max_examples=60, deadline=None)
    def test_each_index_tested_exactly_once(self, n):
        folds = fold_partition(n)
        assert len(folds) == 5
        seen = [i for fold in folds for i in fold]
        assert sorted(seen) == list(range(n))

    def test_too_few_samples(self):
        with pytest.raises(FoldConstructionError):
            fold_partition(4)


class TestCrossValidate:
    def test_separable_fixture_perfect(self, tw_stream, wk_stream, cc_stream, bg_stream):
        result = cross_validate(
            tw_stream, wk_stream, cc_stream, bg_stream, C3,
            master_seed=7, sample_size=600, k=800, samples_per_corpus=10,
        )
        assert result.fold_accuracies == (1.0, 1.0, 1.0, 1.0, 1.0)
        # Oracle: separation already visible in the training condition means.
        for threshold in result.thresholds:
            assert (
                min(threshold.same_condition_means.values())
                > max(threshold.cross_condition_means.values())
            )

    def test_prediction_log_recounts_to_accuracy(self, tw_stream, space_c3, bg_stream):
        clones = [
            tw_stream,
            TokenStream("clone_b", tw_stream.words),
            TokenStream("clone_c", tw_stream.words),
        ]
        result = cross_validate(
            *clones, bg_stream, C3,
            master_seed=7, sample_size=300, k=400, samples_per_corpus=10,
        )
        for fold_id, accuracy in enumerate(result.fold_accuracies):
            fold_preds = [p for p in result.predictions if p.fold_id == fold_id]
            recounted = sum(p.correct for p in fold_preds) / len(fold_preds)
            assert accuracy == recounted
        # Indistinguishable corpora leave prediction near chance level.
        assert result.mean_accuracy < 0.8

    def test_deterministic(self, tw_stream, wk_stream, cc_stream, bg_stream):
        kwargs = dict(master_seed=7, sample_size=300, k=300, samples_per_corpus=5)
        r1 = cross_validate(tw_stream, wk_stream, cc_stream, bg_stream, W1, **kwargs)
        r2 = cross_validate(tw_stream, wk_stream, cc_stream, bg_stream, W1, **kwargs)
        assert r1.fold_accuracies == r2.fold_accuracies
        assert r1.predictions == r2.predictions

    def test_each_sample_tested_once(self, tw_stream, wk_stream, cc_stream, bg_stream):
        result = cross_validate(
            tw_stream, wk_stream, cc_stream, bg_stream, W1,
            master_seed=7, sample_size=300, k=300, samples_per_corpus=10,
        )
        tested = {role: set() for role in ("tw_syn", "wk_syn", "cc_syn")}
        fold_of = {}
        for p in result.predictions:
            for cid, idx in p.keys:
                tested[cid].add((p.fold_id, idx))
                assert fold_of.setdefault(idx, p.fold_id) == p.fold_id
        for indices in tested.values():
            assert {idx for _, idx in indices} == set(range(10))

    def test_fold_construction_error(self, tw_stream, wk_stream, cc_stream, bg_stream):
        with pytest.raises(FoldConstructionError):
            cross_validate(
                tw_stream, wk_stream, cc_stream, bg_stream, W1,
                master_seed=7, sample_size=300, k=300, samples_per_corpus=4,
            )


class TestSelectBest:
    def test_four_way_tie_prefers_highest_character(self):
        accuracies = {C2: 1.0, C3: 1.0, C4: 1.0, W1: 1.0}
        assert select_best_feature_type(accuracies) == C4

    def test_close_but_distinct_accuracies(self):
        assert select_best_feature_type({W1: 0.98, C4: 0.97}) == W1

    def test_character_beats_word_on_tie(self):
        assert select_best_feature_type({W1: 0.90, C4: 0.90}) == C4

    def test_larger_n_wins_within_kind(self):
        assert select_best_feature_type({W1: 0.9, W2: 0.9}) == W2
        assert select_best_feature_type({C2: 0.9, C3: 0.9}) == C3

    def test_empty_map_rejected(self):
        with pytest.raises(ValueError):
            select_best_feature_type({})

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=5, max_size=5),
           st.permutations(list(ALL_FEATURE_TYPES)))
    @settings(max_examples=200, deadline=None)
    def test_total_order_independent_of_insertion(self, accs, order):
        base = dict(zip(ALL_FEATURE_TYPES, accs))
        shuffled = {ft: base[ft] for ft in order}
        best = select_best_feature_type(shuffled)
        top = max(accs)
        contenders = [ft for ft in ALL_FEATURE_TYPES if base[ft] == top]
        expected = max(
            contenders, key=lambda ft: (1 if ft.kind == "character" else 0, ft.n)
        )
        assert best == expected


class TestReport:
    def test_tie_break_flag(self, tw_stream, wk_stream, cc_stream, bg_stream):
        results = {
            ft: cross_validate(
                tw_stream, wk_stream, cc_stream, bg_stream, ft,
                master_seed=7, sample_size=300, k=300, samples_per_corpus=5,
            )
            for ft in (W1, C3)
        }
        report = build_report("zzz", results)
        assert report.best in (W1, C3)
        accs = list(report.per_feature_type.values())
        assert report.tie_break_applied == (accs[0] == accs[1])
        assert report.per_feature_type[report.best] == max(accs)
