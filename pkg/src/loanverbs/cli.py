"""Command-line entry point: ``loanverbs <subcommand> [flags]``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import pipeline as P
from .matcher import read_summary_tsv
from .stats.design import RegressionSpec
from .stats.rates import compare_domains, top_k_rate_table
from .stats.regression import DEFAULT_GRID

log = logging.getLogger("loanverbs")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: List[str] = field(default_factory=list)
    lexicon: List[str] = field(default_factory=list)
    exclusions: Optional[str] = None
    gazetteer: Optional[str] = None
    langid_model: Optional[str] = None
    rare_threshold: int = 5
    l2_grid: Tuple[float, ...] = DEFAULT_GRID
    seed: Optional[int] = None
    output_dir: str = "."
    fold_diacritics: bool = False
    window: int = 0
    threads: int = 1
    word_class: str = "loanword"
    top_k: int = 50

    def out(self, name: str) -> Path:
        return Path(self.output_dir) / name


CONFIG_KEYS = {f.name for f in fields(RunConfig)}
LIST_KEYS = {"input", "lexicon"}


def read_config_file(path) -> dict:
    """TOML key/value file; keys use RunConfig field names (``-`` or ``_``)."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if name in LIST_KEYS and isinstance(value, str):
            value = [value]
        out[name] = value
    return out


def _grid(text) -> Tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        values = text
    else:
        values = [v for v in str(text).split(",") if v.strip()]
    try:
        grid = tuple(float(v) for v in values)
    except ValueError as exc:
        raise ConfigError(f"bad l2 grid {text!r}") from exc
    if not grid or any(g < 0 for g in grid):
        raise ConfigError("l2 grid must be a non-empty list of non-negative weights")
    return grid


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for name in CONFIG_KEYS:
        v = getattr(args, name, None)
        if v is not None and v != []:
            values[name] = v
    if "l2_grid" in values:
        values["l2_grid"] = _grid(values["l2_grid"])
    try:
        cfg = RunConfig(**values)
        cfg.rare_threshold, cfg.window, cfg.threads, cfg.top_k = (
            int(cfg.rare_threshold), int(cfg.window), int(cfg.threads), int(cfg.top_k))
        cfg.seed = None if cfg.seed is None else int(cfg.seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.threads < 1 or cfg.window < 0 or cfg.rare_threshold < 1 or cfg.top_k < 1:
        raise ConfigError("threads, rare-threshold and top-k must be positive; window non-negative")
    if cfg.word_class not in ("loanword", "native"):
        raise ConfigError(f"unknown word class {cfg.word_class!r}")
    for name in ("exclusions", "gazetteer", "langid_model"):
        _exists(getattr(cfg, name), name)
    for p in list(cfg.input) + list(cfg.lexicon):
        _exists(p, "input")
    return cfg


def _exists(path, what: str) -> None:
    if path is not None and not Path(path).exists():
        raise ConfigError(f"{what} path does not exist: {path}")


def _need_inputs(cfg: RunConfig) -> None:
    if not cfg.input:
        raise ConfigError("no --input given")


def _stage_file(explicit, cfg: RunConfig, default: str, what: str) -> Path:
    path = Path(explicit) if explicit else cfg.out(default)
    if not path.exists():
        raise ConfigError(f"{what} not found: {path}")
    return path


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def cmd_discover(cfg: RunConfig, args) -> int:
    _need_inputs(cfg)
    for p in (args.english_words, args.spanish_words):
        if p is None:
            raise ConfigError("discover needs --english-words and --spanish-words")
        _exists(p, "wordlist")
    reports = P.run_discover(cfg.input, P.read_wordlist(args.english_words), P.read_wordlist(args.spanish_words))
    _write(cfg.out("candidates.tsv"), P.candidates_tsv(reports))
    return EXIT_OK


def cmd_expand(cfg: RunConfig, args) -> int:
    lex = P.load_lexicons(cfg.lexicon, cfg.exclusions)
    _write(cfg.out("expanded.tsv"), P.expansion_tsv(P.expand_lexicon(lex)))
    return EXIT_OK


def cmd_match(cfg: RunConfig, args) -> int:
    _need_inputs(cfg)
    lex = P.load_lexicons(cfg.lexicon, cfg.exclusions)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    summary = P.run_match(cfg.input, P.expand_lexicon(lex), cfg.out(P.RECORDS), cfg.out(P.SUMMARY),
                          cfg.threads, cfg.window, cfg.fold_diacritics)
    t = summary.totals()
    log.info("%d posts (%d retweets, %d malformed): %d integrated, %d light",
             summary.posts, summary.retweets, summary.malformed, t["integrated"], t["light"])
    return EXIT_OK


def cmd_features(cfg: RunConfig, args) -> int:
    _need_inputs(cfg)
    records = P.load_records(_stage_file(args.records, cfg, P.RECORDS, "records"))
    lex = P.load_lexicons(cfg.lexicon, cfg.exclusions)
    rows, profiles = P.run_features(cfg.input, records, lex, P.load_identifier(cfg.langid_model),
                                    P.load_region_gazetteer(cfg.gazetteer), cfg.threads, cfg.window,
                                    cfg.fold_diacritics)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    P.write_features(rows, profiles, cfg.out(P.POST_FEATURES), cfg.out(P.PROFILES))
    return EXIT_OK


def cmd_rate(cfg: RunConfig, args) -> int:
    path = _stage_file(args.summary, cfg, P.SUMMARY, "summary")
    with open(path, encoding="utf-8") as fh:
        summary = read_summary_tsv(fh)
    _write(cfg.out(f"rates_{cfg.word_class}.tsv"), top_k_rate_table(summary, cfg.top_k, cfg.word_class).to_tsv())
    return EXIT_OK


def _summary_for(path: str, cfg: RunConfig, tag: str):
    """A summary TSV is read as is; a JSONL corpus is matched first."""
    _exists(path, "corpus")
    if path.endswith(".tsv"):
        with open(path, encoding="utf-8") as fh:
            return read_summary_tsv(fh)
    lex = P.load_lexicons(cfg.lexicon, cfg.exclusions)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    summary = P.run_match([path], P.expand_lexicon(lex), cfg.out(f"records_{tag}.jsonl"),
                          cfg.out(f"summary_{tag}.tsv"), cfg.threads, cfg.window, cfg.fold_diacritics)
    return {k: tuple(v) for k, v in summary.counts.items()}


def cmd_compare(cfg: RunConfig, args) -> int:
    names = tuple(args.names.split(",")) if args.names else ("A", "B")
    if len(names) != 2:
        raise ConfigError("--names takes two comma-separated labels")
    if args.family_size < 1:
        raise ConfigError("--family-size must be at least 1")
    a = _summary_for(args.corpus_a, cfg, names[0])
    b = _summary_for(args.corpus_b, cfg, names[1])
    report = compare_domains(a, b, cfg.top_k, cfg.word_class, args.family_size, names)
    _write(cfg.out("comparison.tsv"), report.to_tsv())
    if args.svg:
        write_rate_plot(report, args.svg)
    return EXIT_OK


def write_rate_plot(report, path) -> None:
    """Per-word rate scatter, domain A against domain B, with the diagonal."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("--svg needs matplotlib") from exc
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([0, 1], [0, 1], color="0.7", lw=1)
    ax.scatter(report.rates_a, report.rates_b, s=14)
    for w, x, y in zip(report.words, report.rates_a, report.rates_b):
        ax.annotate(w, (x, y), fontsize=6, xytext=(2, 2), textcoords="offset points")
    ax.set_xlabel(f"integration rate, {report.names[0]}")
    ax.set_ylabel(f"integration rate, {report.names[1]}")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_regress(cfg: RunConfig, args) -> int:
    if cfg.seed is None:
        raise ConfigError("regress needs --seed (or seed in the config file)")
    records = P.load_records(_stage_file(args.records, cfg, P.RECORDS, "records"))
    rows = P.load_feature_rows(_stage_file(args.post_features, cfg, P.POST_FEATURES, "post features"))
    profiles = P.load_profiles(_stage_file(args.profiles, cfg, P.PROFILES, "profiles"))
    spec = RegressionSpec(seed=cfg.seed, word_class=cfg.word_class, rare_threshold=cfg.rare_threshold,
                          l2_grid=cfg.l2_grid)
    result, dropped = P.run_regression(records, rows, profiles, spec)
    if dropped:
        log.info("%d records dropped for missing author variables", dropped)
    stem = f"regression_{cfg.word_class}"
    _write(cfg.out(stem + ".tsv"), P.regression_tsv(result))
    _write(cfg.out(stem + ".json"), result.to_json() + "\n")
    return EXIT_OK


COMMANDS = {
    "discover": (cmd_discover, "find ENGLISH_WORD + -(e)ar candidates"),
    "expand": (cmd_expand, "list every searchable surface of the lexicon"),
    "match": (cmd_match, "detect integrated and light-verb uses"),
    "features": (cmd_features, "post features and author profiles for matched records"),
    "rate": (cmd_rate, "integration rates of the most frequent words"),
    "compare": (cmd_compare, "paired per-word rate comparison of two corpora"),
    "regress": (cmd_regress, "fixed-effects ridge logistic regression"),
}


def _common(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", default=d, help="TOML key/value file with any of these settings")
    g.add_argument("--threads", type=int, default=d, help="worker processes (default 1)")
    g.add_argument("--seed", type=int, default=d, help="random seed (required by regress)")
    g.add_argument("--output-dir", default=d, help="directory for stage outputs (default .)")
    g.add_argument("--input", nargs="+", default=d, help="post JSONL files")
    g.add_argument("--lexicon", nargs="+", default=d, help="lexicon TSV files (default: bundled)")
    g.add_argument("--exclusions", default=d, help="excluded surface list (default: bundled)")
    g.add_argument("--gazetteer", default=d, help="keyword/region TSV (default: bundled)")
    g.add_argument("--langid-model", default=d, help="language model TSV (default: bundled)")
    g.add_argument("--rare-threshold", type=int, default=d, help="fixed-effect levels below this share RARE (5)")
    g.add_argument("--l2-grid", default=d, help="comma-separated l2 weights (default 1e-3..1e3)")
    g.add_argument("--fold-diacritics", action="store_true", default=d, help="match ignoring accents")
    g.add_argument("--window", type=int, default=d, help="free tokens allowed inside light phrases (0)")
    g.add_argument("--word-class", choices=("loanword", "native"), default=d, help="word class (loanword)")
    g.add_argument("--top-k", type=int, default=d, help="number of most frequent words (50)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loanverbs", description=__doc__.splitlines()[0],
                                     parents=[_common(False)])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = _common(True)
    ps = {}
    for name, (_, help_text) in COMMANDS.items():
        ps[name] = sub.add_parser(name, help=help_text, description=help_text, parents=[shared])
    ps["discover"].add_argument("--english-words", help="English wordlist, one per line")
    ps["discover"].add_argument("--spanish-words", help="Spanish wordlist, one per line")
    for name in ("features", "regress"):
        ps[name].add_argument("--records", help="records JSONL (default OUTPUT_DIR/records.jsonl)")
    ps["regress"].add_argument("--post-features", help="default OUTPUT_DIR/post_features.jsonl")
    ps["regress"].add_argument("--profiles", help="default OUTPUT_DIR/profiles.jsonl")
    ps["rate"].add_argument("--summary", help="summary TSV (default OUTPUT_DIR/summary.tsv)")
    ps["compare"].add_argument("corpus_a", help="summary TSV or post JSONL of domain A")
    ps["compare"].add_argument("corpus_b", help="summary TSV or post JSONL of domain B")
    ps["compare"].add_argument("--names", help="labels for the two domains, e.g. twitter,news")
    ps["compare"].add_argument("--family-size", type=int, default=1, help="Bonferroni family size")
    ps["compare"].add_argument("--svg", help="also write a per-word rate scatter here")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    handler = COMMANDS[args.command][0]
    try:
        cfg = resolve_config(args)
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"loanverbs: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced as a runtime failure, never a traceback
        print(f"loanverbs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
