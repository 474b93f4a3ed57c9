"""Batch command-line pipeline: config, artifact emission, and caching.

Every command is deterministic given (inputs, config, seed): result CSV/JSON
artifacts are byte-identical across re-runs. Each output directory gets a
``run_record.json`` listing every emitted file with its content hash, the
effective config, the normalization metadata, and per-step timings (the
record is the audit trail about the run, so its timings are the one thing
allowed to differ between re-runs).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import analysis, svg
from .corpus import (
    DEFAULT_N_PAIRS,
    DEFAULT_SAMPLE_SIZE,
    NORMALIZATION_METADATA,
    CorpusManifest,
    TokenStream,
    load_corpus,
    parse_manifest,
)
from .errors import DataError, ManifestError, UsageError
from .features import (
    ALL_FEATURE_TYPES,
    DEFAULT_K,
    FeatureSpace,
    FeatureType,
    feature_space_to_json,
    load_feature_space,
    select_features,
)
from .similarity import benchmark_to_json, build_benchmark
from .validation import (
    DEFAULT_SAMPLES_PER_CORPUS,
    report_to_csv,
    report_to_json,
    validate_language,
)

BACKGROUND_LABEL = "background"

# Commands that consume one feature space rather than sweeping several.
_SINGLE_TYPE_COMMANDS = {"homogeneity", "profile", "cluster", "analyze"}
_DEFAULT_ANALYSIS_TYPE = "C4"


@dataclass(frozen=True)
class RunConfig:
    """Effective parameters for one command run (flags over config file)."""

    manifest: Path | None = None
    master_seed: int | None = None
    sample_size: int = DEFAULT_SAMPLE_SIZE
    k: int = DEFAULT_K
    n_pairs: int = DEFAULT_N_PAIRS
    feature_types: tuple[FeatureType, ...] = ALL_FEATURE_TYPES
    out_dir: Path = Path("regvar-out")
    no_plots: bool = False
    pool_background: bool = False
    samples_per_corpus: int = DEFAULT_SAMPLES_PER_CORPUS

    def check(self, need_manifest: bool = True) -> None:
        if need_manifest and self.manifest is None:
            raise UsageError("--manifest is required")
        if need_manifest and self.master_seed is None:
            raise UsageError("--seed is required; runs never fall back to wall-clock seeds")
        if self.sample_size < 100:
            raise UsageError(f"--sample-size must be >= 100, got {self.sample_size}")
        if self.k < 1:
            raise UsageError(f"--k must be >= 1, got {self.k}")
        if self.n_pairs < 1:
            raise UsageError(f"--pairs must be >= 1, got {self.n_pairs}")
        if self.samples_per_corpus < 1:
            raise UsageError(
                f"--samples-per-corpus must be >= 1, got {self.samples_per_corpus}"
            )

    def as_dict(self) -> dict:
        return {
            "manifest": str(self.manifest) if self.manifest else None,
            "master_seed": self.master_seed,
            "sample_size": self.sample_size,
            "k": self.k,
            "n_pairs": self.n_pairs,
            "feature_types": [ft.code for ft in self.feature_types],
            "out_dir": str(self.out_dir),
            "no_plots": self.no_plots,
            "pool_background": self.pool_background,
            "samples_per_corpus": self.samples_per_corpus,
        }


class RunWriter:
    """Single writer for an output directory; records hashes and timings."""

    def __init__(self, command: str, config: RunConfig):
        self.command = command
        self.config = config
        self.out_dir = config.out_dir
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[dict] = []
        self.timings: list[dict] = []

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.artifacts.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest()}
        )
        return path

    def step(self, name: str):
        writer = self

        class _Step:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                writer.timings.append(
                    {"step": name, "seconds": time.perf_counter() - self.t0}
                )
                return False

        return _Step()

    def finish(self) -> None:
        record = {
            "command": self.command,
            "config": self.config.as_dict(),
            "normalization": NORMALIZATION_METADATA,
            "artifacts": self.artifacts,
            "timings": self.timings,
        }
        path = self.out_dir / "run_record.json"
        path.write_text(
            json.dumps(record, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


# ---------------------------------------------------------------------------
# corpus registry helpers

def _load_manifests(config: RunConfig) -> list[CorpusManifest]:
    return parse_manifest(config.manifest)


def _find_role(manifests: list[CorpusManifest], label: str) -> CorpusManifest:
    hits = [m for m in manifests if m.register_label.lower() == label.lower()]
    if not hits:
        raise ManifestError(
            f"manifest has no corpus with register_label {label!r}; "
            f"labels present: {sorted({m.register_label for m in manifests})}"
        )
    if len(hits) > 1:
        raise ManifestError(
            f"manifest has {len(hits)} corpora labeled {label!r}; expected exactly one"
        )
    return hits[0]


def _analysis_manifests(manifests: list[CorpusManifest]) -> list[CorpusManifest]:
    return [m for m in manifests if m.register_label.lower() != BACKGROUND_LABEL]


def _background_stream(manifests: list[CorpusManifest], config: RunConfig) -> TokenStream:
    hits = [m for m in manifests if m.register_label.lower() == BACKGROUND_LABEL]
    if len(hits) > 1:
        raise ManifestError(
            f"manifest has {len(hits)} corpora labeled '{BACKGROUND_LABEL}'; "
            "expected at most one"
        )
    if hits:
        return load_corpus(hits[0])
    if config.pool_background:
        words: list[str] = []
        for m in manifests:
            words.extend(load_corpus(m).words)
        return TokenStream(corpus_id="pooled-background", words=tuple(words))
    raise ManifestError(
        "feature selection requires a corpus with register_label "
        f"'{BACKGROUND_LABEL}' in the manifest; pass --pool-background to pool "
        "all listed corpora instead"
    )


def _stream_digest(stream: TokenStream) -> str:
    hasher = hashlib.sha256()
    for word in stream.words:
        hasher.update(word.encode("utf-8"))
        hasher.update(b"\x1f")
    return hasher.hexdigest()


def _cached_space(
    writer: RunWriter, background: TokenStream, feature_type: FeatureType, k: int
) -> FeatureSpace:
    """Select features, reusing a content-addressed cache in the output dir."""
    key_src = "\x1f".join(
        [
            json.dumps(NORMALIZATION_METADATA, sort_keys=True),
            background.corpus_id,
            _stream_digest(background),
            feature_type.code,
            str(k),
        ]
    )
    key = hashlib.sha256(key_src.encode("utf-8")).hexdigest()[:24]
    cache_dir = writer.out_dir / "cache"
    cache_path = cache_dir / f"space_{key}.json"
    if cache_path.exists():
        return load_feature_space(cache_path)
    space = select_features(background, feature_type, k)
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache_path.write_text(feature_space_to_json(space), encoding="utf-8")
    return space


def _single_type(config: RunConfig) -> FeatureType:
    if len(config.feature_types) != 1:
        raise UsageError(
            "this command uses exactly one feature type; pass e.g. --types c4 "
            f"(got {','.join(ft.code for ft in config.feature_types)})"
        )
    return config.feature_types[0]


def _language_code(*manifests: CorpusManifest) -> str:
    codes = sorted({m.language_code for m in manifests})
    return codes[0] if len(codes) == 1 else "+".join(codes)


# ---------------------------------------------------------------------------
# commands

def cmd_features(config: RunConfig) -> None:
    writer = RunWriter("features", config)
    manifests = _load_manifests(config)
    with writer.step("load-background"):
        background = _background_stream(manifests, config)
    for ft in config.feature_types:
        with writer.step(f"select-{ft.code}"):
            space = _cached_space(writer, background, ft, config.k)
        writer.write_text(f"features_{ft.code}.json", feature_space_to_json(space))
    writer.finish()


def cmd_benchmark(config: RunConfig) -> None:
    writer = RunWriter("benchmark", config)
    manifests = _load_manifests(config)
    tw_m = _find_role(manifests, "TW")
    wk_m = _find_role(manifests, "WK")
    cc_m = _find_role(manifests, "CC")
    with writer.step("load-corpora"):
        background = _background_stream(manifests, config)
        tw, wk, cc = load_corpus(tw_m), load_corpus(wk_m), load_corpus(cc_m)
    language = _language_code(tw_m, wk_m, cc_m)
    for ft in config.feature_types:
        with writer.step(f"benchmark-{ft.code}"):
            space = _cached_space(writer, background, ft, config.k)
            bench = build_benchmark(
                tw, wk, cc, space,
                n_pairs=config.n_pairs,
                sample_size=config.sample_size,
                master_seed=config.master_seed,
                language_code=language,
            )
        writer.write_text(f"benchmark_{ft.code}.json", benchmark_to_json(bench))
    writer.finish()


def cmd_validate(config: RunConfig) -> None:
    writer = RunWriter("validate", config)
    manifests = _load_manifests(config)
    tw_m = _find_role(manifests, "TW")
    wk_m = _find_role(manifests, "WK")
    cc_m = _find_role(manifests, "CC")
    with writer.step("load-corpora"):
        background = _background_stream(manifests, config)
        tw, wk, cc = load_corpus(tw_m), load_corpus(wk_m), load_corpus(cc_m)
    with writer.step("cross-validate"):
        report, _ = validate_language(
            tw, wk, cc, background,
            feature_types=config.feature_types,
            master_seed=config.master_seed,
            language_code=_language_code(tw_m, wk_m, cc_m),
            sample_size=config.sample_size,
            k=config.k,
            samples_per_corpus=config.samples_per_corpus,
        )
    writer.write_text("validation.json", report_to_json(report))
    writer.write_text("validation.csv", report_to_csv(report))
    writer.finish()


def _prepare_analysis(writer: RunWriter, config: RunConfig):
    """Shared setup for the analysis commands: streams, space, benchmark."""
    manifests = _load_manifests(config)
    tw_m = _find_role(manifests, "TW")
    wk_m = _find_role(manifests, "WK")
    cc_m = _find_role(manifests, "CC")
    targets_m = _analysis_manifests(manifests)
    with writer.step("load-corpora"):
        background = _background_stream(manifests, config)
        streams = {m.corpus_id: load_corpus(m) for m in targets_m}
    ft = _single_type(config)
    with writer.step(f"select-{ft.code}"):
        space = _cached_space(writer, background, ft, config.k)
    with writer.step("benchmark"):
        bench = build_benchmark(
            streams[tw_m.corpus_id], streams[wk_m.corpus_id], streams[cc_m.corpus_id],
            space,
            n_pairs=config.n_pairs,
            sample_size=config.sample_size,
            master_seed=config.master_seed,
            language_code=_language_code(tw_m, wk_m, cc_m),
        )
    writer.write_text(f"benchmark_{ft.code}.json", benchmark_to_json(bench))
    return streams, tw_m, wk_m, space, bench


def _emit_homogeneity(writer, config, streams, space, bench) -> None:
    reports, scores = [], {}
    for cid in streams:
        with writer.step(f"homogeneity-{cid}"):
            pair_scores = analysis.homogeneity_scores(
                streams[cid], bench, space,
                n_pairs=config.n_pairs,
                sample_size=config.sample_size,
                master_seed=config.master_seed,
            )
        reports.append(analysis.summarize_homogeneity(cid, pair_scores))
        scores[cid] = pair_scores
    writer.write_text("homogeneity.csv", analysis.homogeneity_to_csv(reports))
    writer.write_text("homogeneity.json", analysis.homogeneity_to_json(reports, scores))
    if not config.no_plots:
        groups = [(cid, [z for _, z in scores[cid]]) for cid in streams]
        writer.write_text("homogeneity.svg", svg.strip_plot(groups))


def _emit_profile(writer, config, streams, tw_m, wk_m, space, bench) -> None:
    extras = [
        stream for cid, stream in streams.items()
        if cid not in (tw_m.corpus_id, wk_m.corpus_id)
    ]
    with writer.step("profile"):
        reg_profile = analysis.profile(
            streams[tw_m.corpus_id], streams[wk_m.corpus_id], extras,
            bench, space,
            n_samples=config.n_pairs,
            sample_size=config.sample_size,
            master_seed=config.master_seed,
        )
    writer.write_text("profile.csv", analysis.profile_to_csv(reg_profile))
    if not config.no_plots:
        writer.write_text("profile.svg", svg.profile_scatter(reg_profile))


def _emit_cluster(writer, config, streams, space) -> None:
    with writer.step("similarity-matrix"):
        matrix = analysis.similarity_matrix(
            list(streams.values()), space,
            n_pairs=config.n_pairs,
            sample_size=config.sample_size,
            master_seed=config.master_seed,
        )
    with writer.step("ward-cluster"):
        dendrogram = analysis.ward_cluster(matrix)
    writer.write_text("similarity_matrix.csv", analysis.matrix_to_csv(matrix))
    writer.write_text("dendrogram.json", analysis.dendrogram_to_json(dendrogram))
    if not dendrogram.heights_monotone:
        print("warning: merge heights are not monotone for this matrix", file=sys.stderr)
    if not config.no_plots:
        writer.write_text("cluster.svg", svg.cluster_heatmap(dendrogram))


def cmd_homogeneity(config: RunConfig) -> None:
    writer = RunWriter("homogeneity", config)
    streams, _, _, space, bench = _prepare_analysis(writer, config)
    _emit_homogeneity(writer, config, streams, space, bench)
    writer.finish()


def cmd_profile(config: RunConfig) -> None:
    writer = RunWriter("profile", config)
    streams, tw_m, wk_m, space, bench = _prepare_analysis(writer, config)
    _emit_profile(writer, config, streams, tw_m, wk_m, space, bench)
    writer.finish()


def cmd_cluster(config: RunConfig) -> None:
    writer = RunWriter("cluster", config)
    streams, _, _, space, _ = _prepare_analysis(writer, config)
    _emit_cluster(writer, config, streams, space)
    writer.finish()


def cmd_analyze(config: RunConfig) -> None:
    writer = RunWriter("analyze", config)
    streams, tw_m, wk_m, space, bench = _prepare_analysis(writer, config)
    _emit_homogeneity(writer, config, streams, space, bench)
    _emit_profile(writer, config, streams, tw_m, wk_m, space, bench)
    _emit_cluster(writer, config, streams, space)
    writer.finish()


def cmd_plot(config: RunConfig) -> None:
    """Re-render SVGs from previously emitted CSV/JSON artifacts."""
    writer = RunWriter("plot", config)
    out = config.out_dir
    rendered = 0
    homogeneity_json = out / "homogeneity.json"
    if homogeneity_json.exists():
        payload = json.loads(homogeneity_json.read_text(encoding="utf-8"))
        groups = [
            (entry["corpus_id"], [s["z"] for s in entry.get("scores", [])])
            for entry in payload
        ]
        writer.write_text("homogeneity.svg", svg.strip_plot(groups))
        rendered += 1
    profile_csv = out / "profile.csv"
    if profile_csv.exists():
        reg_profile = analysis.profile_from_csv(profile_csv.read_text(encoding="utf-8"))
        writer.write_text("profile.svg", svg.profile_scatter(reg_profile))
        rendered += 1
    matrix_csv = out / "similarity_matrix.csv"
    dendro_json = out / "dendrogram.json"
    if matrix_csv.exists() and dendro_json.exists():
        matrix = analysis.matrix_from_csv(matrix_csv.read_text(encoding="utf-8"))
        dendrogram = analysis.dendrogram_from_json(
            dendro_json.read_text(encoding="utf-8"), matrix
        )
        writer.write_text("cluster.svg", svg.cluster_heatmap(dendrogram))
        rendered += 1
    if rendered == 0:
        raise UsageError(f"no plottable artifacts (homogeneity.json, profile.csv, "
                         f"similarity_matrix.csv + dendrogram.json) in {out}")
    writer.finish()


_COMMANDS = {
    "features": (cmd_features, "Select and save n-gram feature spaces"),
    "benchmark": (cmd_benchmark, "Build the six-condition z-score benchmark"),
    "validate": (cmd_validate, "5-fold same/different-corpus validation"),
    "homogeneity": (cmd_homogeneity, "Self-similarity reports per corpus"),
    "profile": (cmd_profile, "Two-axis register profile of all corpora"),
    "cluster": (cmd_cluster, "Pairwise similarity matrix and Ward dendrogram"),
    "analyze": (cmd_analyze, "Composite: homogeneity + profile + cluster"),
    "plot": (cmd_plot, "Re-render SVG plots from existing CSV/JSON artifacts"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _parse_types(value: str) -> tuple[FeatureType, ...]:
    try:
        types = tuple(FeatureType.from_code(code) for code in value.split(",") if code.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not types:
        raise UsageError("--types must list at least one feature type code")
    if len(set(types)) != len(types):
        raise UsageError(f"--types lists duplicates: {value}")
    return types


def _parse_config_file(path: Path) -> dict:
    """Flat key = value file mirroring the command-line flags."""
    known = {
        "manifest": str, "seed": int, "sample_size": int, "k": int,
        "pairs": int, "types": str, "out": str, "no_plots": bool,
        "pool_background": bool, "samples_per_corpus": int,
    }
    try:
        raw = path.read_text(encoding="utf-8")
    except (OSError, UnicodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    values: dict = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        kind = known[key]
        if kind is int:
            try:
                values[key] = int(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad integer {value!r}") from None
        elif kind is bool:
            lowered = value.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{path}:{lineno}: bad boolean {value!r}")
            values[key] = lowered in ("true", "1", "yes")
        else:
            values[key] = value
    return values


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="regvar",
        description="Corpus-similarity and register-variation analysis pipeline",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--manifest", type=Path, help="corpus manifest file")
        p.add_argument("--config", type=Path, help="flat key=value config file; flags win")
        p.add_argument("--seed", type=int, help="master seed (required; no wall-clock default)")
        p.add_argument("--sample-size", type=int, dest="sample_size",
                       help="words per sub-corpus (default 10000)")
        p.add_argument("--k", type=int, help="feature space size (default 5000)")
        p.add_argument("--pairs", type=int, help="pairs per condition (default 250)")
        p.add_argument("--types", type=str,
                       help="comma-separated feature types, e.g. c4 or w1,c3")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--no-plots", action="store_true", default=None,
                       dest="no_plots", help="emit data files only")
        p.add_argument("--pool-background", action="store_true", default=None,
                       dest="pool_background",
                       help="pool all corpora for feature selection when no "
                            "corpus is labeled 'background'")
        p.add_argument("--samples-per-corpus", type=int, dest="samples_per_corpus",
                       help="validation sub-corpora per corpus (default 50)")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = _parse_config_file(args.config) if args.config else {}

    def pick(flag_value, file_key, default):
        if flag_value is not None:
            return flag_value
        if file_key in file_values:
            return file_values[file_key]
        return default

    types_raw = pick(args.types, "types", None)
    if types_raw is None:
        default_types = (
            (_DEFAULT_ANALYSIS_TYPE,) if args.command in _SINGLE_TYPE_COMMANDS
            else tuple(ft.code for ft in ALL_FEATURE_TYPES)
        )
        types = tuple(FeatureType.from_code(c) for c in default_types)
    else:
        types = _parse_types(types_raw)

    manifest = pick(args.manifest, "manifest", None)
    out_dir = pick(args.out, "out", Path("regvar-out"))
    config = RunConfig(
        manifest=Path(manifest) if manifest is not None else None,
        master_seed=pick(args.seed, "seed", None),
        sample_size=pick(args.sample_size, "sample_size", DEFAULT_SAMPLE_SIZE),
        k=pick(args.k, "k", DEFAULT_K),
        n_pairs=pick(args.pairs, "pairs", DEFAULT_N_PAIRS),
        feature_types=types,
        out_dir=Path(out_dir),
        no_plots=bool(pick(args.no_plots, "no_plots", False)),
        pool_background=bool(pick(args.pool_background, "pool_background", False)),
        samples_per_corpus=pick(args.samples_per_corpus, "samples_per_corpus",
                                DEFAULT_SAMPLES_PER_CORPUS),
    )
    need_manifest = args.command != "plot"
    config.check(need_manifest=need_manifest)
    if args.command == "plot" and config.out_dir is None:
        raise UsageError("plot needs --out pointing at an existing run directory")
    return config


def main(argv=None) -> int:
    try:
        parser = _build_parser()
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required; see regvar --help")
        config = _resolve_config(args)
        _COMMANDS[args.command][0](config)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SystemExit:
        raise
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
