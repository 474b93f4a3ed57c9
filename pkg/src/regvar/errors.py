"""Exception taxonomy shared across the toolkit.

``DataError`` subclasses describe problems with user-supplied corpora or
derived statistics and map to CLI exit code 2; ``UsageError`` covers bad
flags or configuration and maps to exit code 1. Anything else escaping a
command is treated as an internal invariant violation (exit code 3).
"""


class UsageError(Exception):
    """Invalid flags, configuration values, or manifest wiring."""


class DataError(Exception):
    """Base class for problems rooted in the input data."""


class CorpusReadError(DataError):
    """A corpus file could not be read; the message names the path."""


class EmptyCorpusError(DataError):
    """A corpus produced zero tokens after normalization."""


class ManifestError(DataError):
    """A manifest file is malformed or missing a required corpus."""


class CorpusTooSmallError(DataError):
    """A corpus has fewer words than the requested sample size."""

    def __init__(self, corpus_id: str, word_count: int, sample_size: int):
        super().__init__(
            f"corpus {corpus_id!r} has {word_count} words; "
            f"sampling requires at least {sample_size}"
        )
        self.corpus_id = corpus_id
        self.word_count = word_count
        self.sample_size = sample_size


class PairingExhaustedError(DataError):
    """The retry budget ran out before enough unique pairs were drawn."""


class SpaceMismatchError(DataError):
    """Two frequency vectors were built against different feature spaces."""


class DegenerateVectorError(DataError):
    """A frequency vector has zero rank variance (e.g. all-zero counts)."""


class DegenerateBenchmarkError(DataError):
    """A benchmark distribution is too narrow to standardize against."""


class FoldConstructionError(DataError):
    """A corpus cannot supply enough sub-corpora for 5-fold validation."""
