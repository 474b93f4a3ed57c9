"""regvar: corpus-similarity and register-variation analysis toolkit.

Measures similarity between corpora as Spearman rho over fixed n-gram
frequency vectors, standardizes it into per-language z-scores, validates it
with threshold-based same/different-corpus prediction, and analyzes register
structure through homogeneity estimates, two-axis register profiles, and
Ward clustering.
"""

from .analysis import (
    Dendrogram,
    HomogeneityReport,
    ProfilePoint,
    RegisterProfile,
    SimilarityMatrix,
    credible_interval,
    homogeneity,
    homogeneity_scores,
    leaf_order,
    profile,
    similarity_matrix,
    summarize_homogeneity,
    ward_cluster,
)
from .corpus import (
    CorpusManifest,
    PairSet,
    SubCorpus,
    TokenStream,
    build_pair_set,
    derive_rng,
    load_corpus,
    normalize_text,
    parse_manifest,
    sample_subcorpus,
    tokenize,
)
from .features import (
    ALL_FEATURE_TYPES,
    C2,
    C3,
    C4,
    W1,
    W2,
    FeatureSpace,
    FeatureType,
    FrequencyVector,
    extract_ngrams,
    feature_space_from_json,
    feature_space_to_json,
    load_feature_space,
    select_features,
    total_ngram_count,
    vectorize,
)
from .similarity import (
    BenchmarkDistribution,
    SimilarityScore,
    benchmark_from_json,
    benchmark_to_json,
    build_benchmark,
    load_benchmark,
    pair_set_rhos,
    spearman_rho,
    standardize,
)
from .validation import (
    CrossValidationResult,
    Prediction,
    Threshold,
    ValidationReport,
    build_report,
    compute_threshold,
    cross_validate,
    fold_partition,
    predict_same,
    select_best_feature_type,
    validate_language,
)
from . import errors

__version__ = "0.1.0"
