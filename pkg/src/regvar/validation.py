"""Threshold-based same/different-corpus validation with 5-fold protocol.

Accuracy here means: given two sub-corpora, predict from their similarity
alone whether they came from the same corpus. The threshold sits halfway
between the lowest same-condition mean and the highest cross-condition mean,
both computed on training folds only. Feature selection happens once, from
the background corpus, and is shared by all folds; folds partition
sub-corpora, and test pairs are exactly those whose both members lie in the
test fold, so no pair mixes training and testing material.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass

from .corpus import TokenStream, sample_subcorpus
from .errors import FoldConstructionError
from .features import DEFAULT_K, FeatureType, select_features
from .similarity import _RankCache

N_FOLDS = 5
DEFAULT_SAMPLES_PER_CORPUS = 50

_SAME_LABELS = ("TW-TW", "WK-WK", "CC-CC")
_CROSS_LABELS = ("TW-WK", "CC-WK", "CC-TW")


@dataclass(frozen=True)
class Threshold:
    """Decision threshold for one fold plus the condition means behind it."""

    value: float
    fold_id: int
    same_condition_means: dict[str, float]
    cross_condition_means: dict[str, float]


@dataclass(frozen=True)
class Prediction:
    """One test-pair decision, kept so reports can be recounted."""

    fold_id: int
    condition: str
    keys: tuple[tuple[str, int], tuple[str, int]]
    rho: float
    predicted_same: bool
    is_same: bool

    @property
    def correct(self) -> bool:
        return self.predicted_same == self.is_same


@dataclass(frozen=True)
class CrossValidationResult:
    """Fold accuracies for one feature type, with thresholds and the log."""

    feature_type: FeatureType
    fold_accuracies: tuple[float, ...]
    thresholds: tuple[Threshold, ...]
    predictions: tuple[Prediction, ...]

    @property
    def mean_accuracy(self) -> float:
        return sum(self.fold_accuracies) / len(self.fold_accuracies)


@dataclass(frozen=True)
class ValidationReport:
    """Per-language summary mirroring the per-feature-type accuracy table."""

    language_code: str
    per_feature_type: dict[FeatureType, float]
    best: FeatureType
    fold_accuracies: dict[FeatureType, tuple[float, ...]]
    tie_break_applied: bool


def compute_threshold(
    same_means: dict[str, float], cross_means: dict[str, float], fold_id: int = 0
) -> Threshold:
    """Halfway point between min same-condition and max cross-condition mean.

    Exactly 0.5 * (min + max), no clamping: in overlapping regimes the
    threshold may exceed some same-condition means, and predictions then err
    by design.
    """
    value = 0.5 * (min(same_means.values()) + max(cross_means.values()))
    return Threshold(
        value=value,
        fold_id=fold_id,
        same_condition_means=dict(same_means),
        cross_condition_means=dict(cross_means),
    )


def predict_same(rho: float, threshold: Threshold) -> bool:
    """True iff rho is strictly above the threshold; a tie predicts different."""
    return rho > threshold.value


def fold_partition(n_samples: int, n_folds: int = N_FOLDS) -> list[range]:
    """Split sample indices 0..n-1 into contiguous, near-equal folds."""
    if n_samples < n_folds:
        raise FoldConstructionError(
            f"{n_samples} samples per corpus cannot fill {n_folds} folds; "
            f"need at least {n_folds}"
        )
    base, extra = divmod(n_samples, n_folds)
    folds, start = [], 0
    for f in range(n_folds):
        size = base + (1 if f < extra else 0)
        folds.append(range(start, start + size))
        start += size
    return folds


def cross_validate(
    tw: TokenStream,
    wk: TokenStream,
    cc: TokenStream,
    background: TokenStream,
    feature_type: FeatureType,
    master_seed: int,
    sample_size: int = 10_000,
    k: int = DEFAULT_K,
    samples_per_corpus: int = DEFAULT_SAMPLES_PER_CORPUS,
) -> CrossValidationResult:
    """Run the 5-fold same/different-corpus prediction protocol.

    Each corpus contributes ``samples_per_corpus`` sub-corpora, partitioned
    into 5 disjoint folds; every sub-corpus appears in the test set exactly
    once. Per fold, condition means over all training pairs set the
    threshold, which is then scored on all test-fold pairs.
    """
    folds = fold_partition(samples_per_corpus)
    space = select_features(background, feature_type, k)
    cache = _RankCache(space)

    roles = (("TW", tw), ("WK", wk), ("CC", cc))
    subs = {
        role: [
            sample_subcorpus(stream, i, sample_size, master_seed)
            for i in range(samples_per_corpus)
        ]
        for role, stream in roles
    }

    def condition_pairs(label: str, indices_by_role: dict[str, list[int]]):
        role_a, role_b = label.split("-")
        if role_a == role_b:
            return [
                (subs[role_a][i], subs[role_a][j])
                for i, j in itertools.combinations(indices_by_role[role_a], 2)
            ]
        return [
            (subs[role_a][i], subs[role_b][j])
            for i in indices_by_role[role_a]
            for j in indices_by_role[role_b]
        ]

    accuracies: list[float] = []
    thresholds: list[Threshold] = []
    log: list[Prediction] = []
    for fold_id, test_range in enumerate(folds):
        test = {role: [i for i in test_range] for role, _ in roles}
        train = {
            role: [i for i in range(samples_per_corpus) if i not in test_range]
            for role, _ in roles
        }

        same_means = {
            label: _mean_rho(condition_pairs(label, train), cache)
            for label in _SAME_LABELS
        }
        cross_means = {
            label: _mean_rho(condition_pairs(label, train), cache)
            for label in _CROSS_LABELS
        }
        threshold = compute_threshold(same_means, cross_means, fold_id=fold_id)
        thresholds.append(threshold)

        correct = total = 0
        for label in _SAME_LABELS + _CROSS_LABELS:
            is_same = label in _SAME_LABELS
            for sub_a, sub_b in condition_pairs(label, test):
                rho = cache.rho(sub_a, sub_b)
                predicted = predict_same(rho, threshold)
                log.append(
                    Prediction(
                        fold_id=fold_id,
                        condition=label,
                        keys=(sub_a.key, sub_b.key),
                        rho=rho,
                        predicted_same=predicted,
                        is_same=is_same,
                    )
                )
                correct += predicted == is_same
                total += 1
        accuracies.append(correct / total)

    return CrossValidationResult(
        feature_type=feature_type,
        fold_accuracies=tuple(accuracies),
        thresholds=tuple(thresholds),
        predictions=tuple(log),
    )


def _mean_rho(pairs, cache: _RankCache) -> float:
    return sum(cache.rho(a, b) for a, b in pairs) / len(pairs)


def select_best_feature_type(accuracies: dict[FeatureType, float]) -> FeatureType:
    """Argmax by mean accuracy; ties prefer character over word, then larger n."""
    if not accuracies:
        raise ValueError("empty accuracy map")
    return max(
        accuracies,
        key=lambda ft: (accuracies[ft], 1 if ft.kind == "character" else 0, ft.n),
    )


def build_report(
    language_code: str, results: dict[FeatureType, CrossValidationResult]
) -> ValidationReport:
    """Summarize per-type results and pick the best feature type."""
    per_type = {ft: res.mean_accuracy for ft, res in results.items()}
    best = select_best_feature_type(per_type)
    top = per_type[best]
    return ValidationReport(
        language_code=language_code,
        per_feature_type=per_type,
        best=best,
        fold_accuracies={ft: res.fold_accuracies for ft, res in results.items()},
        tie_break_applied=sum(1 for acc in per_type.values() if acc == top) > 1,
    )


def validate_language(
    tw: TokenStream,
    wk: TokenStream,
    cc: TokenStream,
    background: TokenStream,
    feature_types,
    master_seed: int,
    language_code: str = "und",
    sample_size: int = 10_000,
    k: int = DEFAULT_K,
    samples_per_corpus: int = DEFAULT_SAMPLES_PER_CORPUS,
) -> tuple[ValidationReport, dict[FeatureType, CrossValidationResult]]:
    """Cross-validate every requested feature type and build the report."""
    results = {
        ft: cross_validate(
            tw, wk, cc, background, ft,
            master_seed=master_seed,
            sample_size=sample_size,
            k=k,
            samples_per_corpus=samples_per_corpus,
        )
        for ft in feature_types
    }
    return build_report(language_code, results), results


def report_to_json(report: ValidationReport) -> str:
    payload = {
        "language_code": report.language_code,
        "per_feature_type": {
            ft.code: acc for ft, acc in sorted(report.per_feature_type.items())
        },
        "best": report.best.code,
        "fold_accuracies": {
            ft.code: list(accs) for ft, accs in sorted(report.fold_accuracies.items())
        },
        "tie_break_applied": report.tie_break_applied,
    }
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def report_to_csv(report: ValidationReport) -> str:
    """One accuracy-table row: language, best feature type, mean accuracy."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["language", "features", "accuracy"])
    writer.writerow(
        [report.language_code, report.best.code, repr(report.per_feature_type[report.best])]
    )
    return buf.getvalue()
