"""Command-line entry point.

Subcommands: crawl (fetch a site snapshot), synth (generate a planted
test corpus), sample (run the sampling pipeline), eval (score sampling
methods), validate (check a corpus on disk). Exit codes: 0 success,
2 input or configuration error, 3 pipeline error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .corpus import open_corpus, validate_corpus
from .crawler import CrawlLimits, crawl_site
from .errors import (
    AlignmentError,
    ContractError,
    GraspError,
    ParseError,
    ReferentialIntegrityError,
    SchemaError,
)
from .pipeline import PipelineConfig, run_eval, run_pipeline
from .synth import SynthSpec, generate_corpus

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PIPELINE = 3

# Errors that mean the inputs or flags are wrong, not that the run broke.
INPUT_ERRORS = (
    ParseError,
    SchemaError,
    ReferentialIntegrityError,
    AlignmentError,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_id_file(path: str) -> tuple[int, ...]:
    """Page ids, one per line; blank lines and # comments are ignored."""
    ids = []
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            ids.append(int(text))
        except ValueError:
            raise ParseError(f"{path}:{line_no}: not a page id: {text!r}") from None
    return tuple(ids)


def _parse_spaces(raw: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grasp",
        description="Representative page sampling for accessibility audits.",
    )
    parser.add_argument("--version", action="version",
                        version=f"grasp {__version__}")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    crawl = sub.add_parser("crawl", help="crawl one site into a corpus")
    crawl.add_argument("--seed", required=True, metavar="URL",
                       help="absolute start URL")
    crawl.add_argument("--max-pages", type=int, default=200)
    crawl.add_argument("--max-depth", type=int, default=5)
    crawl.add_argument("--delay-ms", type=int, default=0,
                       help="pause between requests")
    crawl.add_argument("--allow-external", action="store_true",
                       help="follow links off the seed origin")
    crawl.add_argument("--out", required=True, metavar="DIR")

    synth = sub.add_parser("synth", help="generate a synthetic corpus")
    synth.add_argument("--types", type=int, required=True)
    synth.add_argument("--pages-per-type", type=int, required=True)
    synth.add_argument("--separation", type=float, default=3.0)
    synth.add_argument("--homophily", type=float, default=0.9)
    synth.add_argument("--noise-edges", type=int, default=0)
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--visual-dim", type=int, default=256)
    synth.add_argument("--ci", action="store_true",
                       help="require an explicit --seed")
    synth.add_argument("--out", required=True, metavar="DIR")

    sample = sub.add_parser("sample", help="run the sampling pipeline")
    sample.add_argument("--corpus", action="append", required=True,
                        metavar="DIR", help="corpus directory (repeatable)")
    sample.add_argument("--report-out", default="report.json")
    sample.add_argument("--metrics-out", default="metrics.json")
    sample.add_argument("--no-metrics", action="store_true")
    sample.add_argument("--out-dir", action="append", metavar="DIR",
                        help="per-corpus output directory (batch mode)")
    sample.add_argument("--parallel-sites", type=int, default=1,
                        help="worker processes in batch mode")
    sample.add_argument("--embeddings", choices=("hash", "files"),
                        default="hash")
    sample.add_argument("--hash-dim", type=int, default=256)
    sample.add_argument("--visual-dim", type=int, default=8)
    sample.add_argument("--k", type=int, default=20)
    sample.add_argument("--iters", type=int, default=5)
    sample.add_argument("--gamma", type=float, default=0.3)
    sample.add_argument("--beta", type=float, default=0.95)
    sample.add_argument("--gnn", choices=("homophilic", "heterophilic"),
                        default="homophilic")
    sample.add_argument("--layers", type=int, default=2)
    sample.add_argument("--seed", type=int, default=None)
    sample.add_argument("--threshold-mode", choices=("absolute", "quantile"),
                        default="absolute")
    sample.add_argument("--norm", choices=("row", "symmetric"), default="row")
    sample.add_argument("--literal-intersection", action="store_true",
                        help="combine refined edges by intersection")
    sample.add_argument("--random-base", choices=("structured", "collective"),
                        default="structured")
    sample.add_argument("--structured", metavar="FILE",
                        help="page ids to force into the sample")
    sample.add_argument("--processes", metavar="FILE",
                        help="page ids of complete processes")
    sample.add_argument("--spaces", default="text,visual",
                        help="comma list of metric spaces")
    sample.add_argument("--ci", action="store_true",
                        help="require an explicit --seed")

    ev = sub.add_parser("eval", help="score sampling methods on a report")
    ev.add_argument("--report", required=True)
    ev.add_argument("--spaces", default="text,visual")
    ev.add_argument("--methods", default="grasp,random")
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--out", required=True)

    val = sub.add_parser("validate", help="check a corpus directory")
    val.add_argument("--corpus", required=True, metavar="DIR")
    return parser


def _cmd_crawl(args: argparse.Namespace) -> int:
    limits = CrawlLimits(
        max_pages=args.max_pages, max_depth=args.max_depth,
        same_origin_only=not args.allow_external,
        request_delay_ms=args.delay_ms,
    )
    corpus = crawl_site(args.seed, limits, args.out)
    print(f"crawled {corpus.n} pages, "
          f"{len(corpus.graph.edges)} edges -> {args.out}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        k_types=args.types, pages_per_type=args.pages_per_type,
        separation=args.separation, homophily=args.homophily,
        noise_edges=args.noise_edges,
        seed=0 if args.seed is None else args.seed,
    )
    corpus, truth = generate_corpus(spec, args.out, visual_dim=args.visual_dim)
    print(f"generated {corpus.n} pages over {len(set(truth.values()))} types "
          f"-> {args.out}")
    return EXIT_OK


def _sample_config(args: argparse.Namespace, corpus_dir: str,
                   report_out: str, metrics_out: str | None) -> PipelineConfig:
    structured = _read_id_file(args.structured) if args.structured else ()
    processes = _read_id_file(args.processes) if args.processes else ()
    return PipelineConfig(
        corpus_dir=corpus_dir,
        report_out=report_out,
        metrics_out=metrics_out,
        embeddings=args.embeddings,
        hash_dim=args.hash_dim,
        visual_dim=args.visual_dim,
        k=args.k,
        iterations=args.iters,
        gamma=args.gamma,
        beta=args.beta,
        gnn=args.gnn,
        layers=args.layers,
        seed=0 if args.seed is None else args.seed,
        threshold_mode=args.threshold_mode,
        norm=args.norm,
        literal_intersection=args.literal_intersection,
        random_base=args.random_base,
        structured=structured,
        processes=processes,
        spaces=_parse_spaces(args.spaces),
    )


def _cmd_sample(args: argparse.Namespace) -> int:
    corpora = args.corpus
    if len(corpora) == 1 and not args.out_dir:
        config = _sample_config(
            args, corpora[0], args.report_out,
            None if args.no_metrics else args.metrics_out,
        )
        report = run_pipeline(config)
        counts = report["sample"]["counts"]
        total = sum(counts.values())
        print(f"sampled {total} pages "
              f"(collective {counts['collective']}, random {counts['random']}, "
              f"structured {counts['structured']}, process {counts['process']}) "
              f"-> {config.report_out}")
        return EXIT_OK

    out_dirs = args.out_dir or []
    if len(out_dirs) != len(corpora):
        raise ContractError(
            f"{len(corpora)} corpora but {len(out_dirs)} --out-dir values"
        )
    configs = []
    for corpus_dir, out_dir in zip(corpora, out_dirs):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        configs.append(_sample_config(
            args, corpus_dir, str(out / "report.json"),
            None if args.no_metrics else str(out / "metrics.json"),
        ))
    workers = max(1, args.parallel_sites)
    failures = 0
    if workers == 1:
        for config in configs:
            failures += _run_one(config)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for config, future in [(c, pool.submit(run_pipeline, c))
                                   for c in configs]:
                try:
                    future.result()
                    print(f"{config.corpus_dir}: ok -> {config.report_out}")
                except Exception as exc:
                    failures += 1
                    print(f"error: {config.corpus_dir}: {exc}", file=sys.stderr)
    if failures:
        return EXIT_PIPELINE
    print(f"sampled {len(configs)} corpora")
    return EXIT_OK


def _run_one(config: PipelineConfig) -> int:
    try:
        run_pipeline(config)
        print(f"{config.corpus_dir}: ok -> {config.report_out}")
        return 0
    except Exception as exc:
        print(f"error: {config.corpus_dir}: {exc}", file=sys.stderr)
        return 1


def _cmd_eval(args: argparse.Namespace) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    payload = run_eval(
        args.report, methods, list(_parse_spaces(args.spaces)),
        args.out, seed=args.seed,
    )
    for row in payload["rows"]:
        print(f"{row['method']:>16s} {row['space']:>6s}  "
              f"S_sampled {row['s_sampled']:8.4f}  "
              f"D {row['d_intra_inter']:8.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    corpus = open_corpus(args.corpus)
    result = validate_corpus(corpus)
    for warning in result.warnings:
        print(f"warning: {warning}")
    for error in result.errors:
        print(f"error: {error}", file=sys.stderr)
    if not result.ok:
        return EXIT_INPUT
    print(f"ok: {corpus.n} pages, {len(corpus.graph.edges)} edges")
    return EXIT_OK


COMMANDS = {
    "crawl": _cmd_crawl,
    "synth": _cmd_synth,
    "sample": _cmd_sample,
    "eval": _cmd_eval,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "ci", False) and args.seed is None:
        return _fail(f"{args.command}: --seed is required with --ci", EXIT_INPUT)
    handler = COMMANDS[args.command]
    try:
        return handler(args)
    except INPUT_ERRORS as exc:
        return _fail(str(exc), EXIT_INPUT)
    except ContractError as exc:
        return _fail(str(exc), EXIT_INPUT)
    except GraspError as exc:
        return _fail(str(exc), EXIT_PIPELINE)


if __name__ == "__main__":
    sys.exit(main())
