#!/usr/bin/env python3
import sys
import logging
import argparse
from typing import Dict, List, Optional, Sequence
from sketchbit import __version__, setup_logging
from sketchbit.errors import EXIT_IO, EXIT_OK, EXIT_USAGE, SketchBitException, SketchBitUsageError
from sketchbit.helpers.format_argparse import (
    Colors as C,
    ColorHelpFormatter,
    ErrorFriendlyArgumentParser,
)
from sketchbit.helpers.config_file import apply_config_defaults, load_config, resolve_config_path
from sketchbit.helpers.check_requirements import RequirementsChecker

logger = logging.getLogger("sketchbit.cli")

COMMANDS = ("ingest", "generate-zipf", "fit", "query", "bench")


class CliException(SketchBitUsageError):
    """Inconsistent command-line inputs"""

    pass


class SketchBitCLI:
    def __init__(self, verbose: bool = False):
        self.verbose = verbose
        logger.info("SketchBitCLI initialized")

    def _print_header(self, title: str, emoji: Optional[str] = None) -> None:
        """Print a formatted command header"""
        if emoji:
            print(f"\n{emoji} {C.BOLD}{C.BRIGHT_BLUE}{title}{C.RESET}")
        else:
            print(f"\n{C.BOLD}{C.BRIGHT_BLUE}{title}{C.RESET}")
        print(f"{C.BRIGHT_BLUE}{'─' * 70}{C.RESET}\n")

    def _failed(self, command: str, e: SketchBitException) -> int:
        logger.error(f"{command} failed with {type(e).__name__}: {e}")
        print(f"\n❌ {command} failed: {e}", file=sys.stderr)
        return e.exit_code

    def ingest_command(
        self,
        input_file: str,
        output_file: str,
        j_buckets: int,
        n_hashes: int,
        seed: int,
        input_format: str = "text",
        split: bool = False,
    ) -> int:
        """Handle ingest command"""
        logger.info("Starting ingest command")
        logger.debug(
            f"Parameters: input={input_file}, format={input_format}, split={split}, "
            f"J={j_buckets}, N={n_hashes}, seed={seed}, output={output_file}"
        )
        from sketchbit.sketch.core.hashing import tokenize_text
        from sketchbit.sketch.core.count_min import CountMinSketch
        from sketchbit.bench.core.datasets import load_dataset

        try:
            tokens = load_dataset(input_format, input_file, split=split)
            sketch = CountMinSketch.from_seed(n_hashes, j_buckets, seed)
            sketch.update_many(tokenize_text(token) for token in tokens)
            sketch.save(output_file)
        except SketchBitException as e:
            return self._failed("Ingest", e)

        print(f"m={sketch.m} N={sketch.n} J={sketch.j}")
        return EXIT_OK

    def generate_zipf_command(
        self, exponent: float, tokens: int, vocab: int, seed: int, output_file: str
    ) -> int:
        """Handle generate-zipf command"""
        logger.info("Starting generate-zipf command")
        logger.debug(f"Parameters: c={exponent}, m={tokens}, vocab={vocab}, seed={seed}")
        from sketchbit.bench.core.datasets import generate_zipf, write_tokens

        try:
            stream = generate_zipf(exponent, tokens, vocab=vocab, seed=seed)
            write_tokens(stream, output_file)
        except SketchBitException as e:
            return self._failed("Zipf generation", e)

        print(f"Wrote {len(stream)} tokens to {output_file}")
        return EXIT_OK

    def fit_command(
        self,
        sketch_file: str,
        model: str,
        output_file: str,
        seed: int,
        replicates: int,
        budget: int,
        m_prime: Optional[int] = None,
    ) -> int:
        """Handle fit command"""
        logger.info("Starting fit command")
        logger.debug(
            f"Parameters: sketch={sketch_file}, model={model}, seed={seed}, R={replicates}, "
            f"budget={budget}, m_prime={m_prime}"
        )
        from sketchbit.sketch.core.count_min import CountMinSketch
        from sketchbit.bnp.core.fit import MODELS, FitConfig, SummaryVector, fit_dp, fit_params

        try:
            if model not in MODELS:
                raise CliException(f"Unknown model {model!r}; choose from {', '.join(MODELS)}")
            sketch = CountMinSketch.load(sketch_file)
            if sketch.m < 1:
                raise CliException("Cannot fit a prior to an empty sketch")
            if model == "dp":
                result = fit_dp(sketch)
            else:
                overrides: Dict[str, object] = {
                    "seed": seed,
                    "r_replicates": replicates,
                    "budget": budget,
                }
                if m_prime is not None:
                    overrides["m_prime"] = m_prime
                cfg = FitConfig.for_stream(sketch.m, **overrides)
                result = fit_params(SummaryVector.from_sketch(sketch), cfg, sketch.family)
            result.save(output_file)
        except SketchBitException as e:
            return self._failed("Fit", e)

        print(
            f"model={result.model} alpha={result.params.alpha:.6g} theta={result.params.theta:.6g} "
            f"objective={result.objective:.6g} evaluations={result.evaluations}"
        )
        return EXIT_OK

    def query_command(
        self,
        sketch_file: str,
        tokens: Sequence[str],
        estimator: str,
        params_file: Optional[str] = None,
        range2: Optional[Sequence[str]] = None,
        summary: str = "mean",
        exact_correction: bool = False,
    ) -> int:
        """Handle query command"""
        logger.info("Starting query command")
        logger.debug(
            f"Parameters: sketch={sketch_file}, params={params_file}, estimator={estimator}, "
            f"tokens={list(tokens)}, range2={range2}"
        )
        from sketchbit.sketch.core.hashing import tokenize_text
        from sketchbit.sketch.core.count_min import CountMinSketch
        from sketchbit.bnp.core.fit import FitResult
        from sketchbit.bnp.core.range_query import range2_estimate
        from sketchbit.bench.core.harness import ESTIMATORS, make_estimators

        try:
            if estimator not in ESTIMATORS:
                raise CliException(f"Unknown estimator {estimator!r}; choose from {', '.join(ESTIMATORS)}")
            if not tokens and not range2:
                raise CliException("Give at least one token or --range2 V1 V2")
            needs_params = estimator.startswith(("dp-", "pyp-")) or bool(range2)
            if needs_params and not params_file:
                raise CliException(f"Estimator {estimator} needs a params file (--params)")

            sketch = CountMinSketch.load(sketch_file)
            fit = FitResult.load(params_file) if needs_params and params_file else None
            model = estimator.split("-", 1)[0]
            if fit is not None and model in ("dp", "pyp") and fit.model != model:
                raise CliException(
                    f"Estimator {estimator} needs {model} parameters, params file holds a {fit.model} fit"
                )

            estimate = make_estimators(
                sketch,
                [estimator],
                dp_theta=fit.params.theta if fit is not None and fit.model == "dp" else None,
                pyp_params=fit.params if fit is not None and fit.model == "pyp" else None,
                exact_correction=exact_correction,
            )[estimator]
            for token in tokens:
                row = sketch.hashed_row(tokenize_text(token))
                values = ",".join(str(int(v)) for v in row.values)
                print(f"{token}\t{values}\t{estimate(row):.6g}")

            if range2:
                if fit is None or fit.model != "dp":
                    raise CliException("--range2 needs DP parameters")
                first, second = range2
                rows = (
                    sketch.hashed_row(tokenize_text(first)),
                    sketch.hashed_row(tokenize_text(second)),
                )
                value = range2_estimate(fit.params.theta, sketch.j, sketch.m, rows, kind=summary)
                values = ";".join(",".join(str(int(v)) for v in row.values) for row in rows)
                print(f"{first}+{second}\t{values}\t{value:.6g}")
        except SketchBitException as e:
            return self._failed("Query", e)
        return EXIT_OK

    def bench_command(
        self,
        estimators: Sequence[str],
        configs: Sequence[str],
        seed: int,
        workers: int,
        input_file: Optional[str] = None,
        input_format: str = "text",
        split: bool = False,
        zipf: Optional[float] = None,
        tokens: int = 100_000,
        vocab: int = 100_000,
        max_queries: Optional[int] = None,
        alpha: Optional[float] = None,
        theta: Optional[float] = None,
        replicates: int = 25,
        budget: int = 50,
        csv_file: Optional[str] = None,
    ) -> int:
        """Handle bench command"""
        logger.info("Starting bench command")
        logger.debug(
            f"Parameters: input={input_file}, zipf={zipf}, estimators={list(estimators)}, "
            f"configs={list(configs)}, seed={seed}, workers={workers}"
        )
        from pathlib import Path
        from sketchbit.bench.core.datasets import DatasetDescriptor, load_dataset, materialize
        from sketchbit.bench.core.harness import BenchConfig, HashConfig, run_bench
        from sketchbit.bench.core.report import write_csv

        try:
            if (input_file is None) == (zipf is None):
                raise CliException("Give exactly one of --input_file or --zipf")
            if zipf is not None:
                descriptor = DatasetDescriptor(source="zipf", m=tokens, exponent=zipf, vocab=vocab, seed=seed)
                stream = materialize(descriptor)
            else:
                stream = load_dataset(input_format, input_file or "", split=split)
                descriptor = DatasetDescriptor(source=input_format, m=len(stream), path=Path(input_file or ""))
            cfg = BenchConfig(
                estimators=tuple(estimators),
                configs=tuple(HashConfig.parse(text) for text in configs),
                seed=seed,
                workers=workers,
                max_queries=max_queries,
                alpha=alpha,
                theta=theta,
                replicates=replicates,
                budget=budget,
            )
            self._print_header(f"Benchmark on {descriptor.label()}, m={descriptor.m}", "📊")
            result = run_bench(stream, cfg)
            for report in result.reports:
                for model, params in result.params.get(report.config, {}).items():
                    print(f"{model}: alpha={params.alpha:.4g} theta={params.theta:.4g}")
                print(report.to_text())
            if csv_file:
                write_csv(result.reports, csv_file)
                print(f"CSV written to {csv_file}")
            print(f"{C.BRIGHT_BLUE}{'─' * 70}{C.RESET}\n")
        except SketchBitException as e:
            return self._failed("Bench", e)
        return EXIT_OK


def _verbose_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-h", "--help", action="help", help=f"{C.CYAN}Show help message{C.RESET}"
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help=f"{C.CYAN}Enable verbose output{C.RESET}",
    )
    parser.add_argument(
        "--config",
        default=None,
        help=f"{C.CYAN}Config file of key = value defaults (or set SKETCHBIT_CONFIG){C.RESET}",
    )
    parser.add_argument(
        "--log-dir",
        dest="log_dir",
        default=None,
        help=f"{C.CYAN}Directory for sketchbit.log (or set SKETCHBIT_LOG_DIR, default ./logs){C.RESET}",
    )


def _hash_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-j", "--j_buckets", type=int, default=320, help=f"{C.CYAN}Buckets per hash row{C.RESET}"
    )
    parser.add_argument(
        "-n", "--n_hashes", type=int, default=2, help=f"{C.CYAN}Number of hash rows{C.RESET}"
    )


def build_parser() -> tuple[ErrorFriendlyArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = ErrorFriendlyArgumentParser(
        description=rf"""{C.BOLD}{C.GRAY}
  ┏━┓╻┏ ┏━╸╺┳╸┏━╸╻ ╻┏┓ ╻╺┳╸
  ┗━┓┣┻┓┣╸  ┃ ┃  ┣━┫┣┻┓┃ ┃
  ┗━┛╹ ╹┗━╸ ╹ ┗━╸╹ ╹┗━┛╹ ╹ (v{__version__})

  Count-min sketches with Bayesian nonparametric frequency estimates{C.RESET}
        """,
        formatter_class=ColorHelpFormatter,
        prog="sketchbit",
        add_help=False,
        epilog=f"""
{C.BOLD}{C.BLUE}examples:{C.RESET}
  {C.BOLD}{C.BLUE}Generate and ingest:{C.RESET}
    {C.BOLD}{C.PINK}sketchbit{C.RESET} {C.GREEN}generate-zipf{C.RESET} {C.GREEN}-c{C.RESET} {C.CYAN}1.3{C.RESET} {C.GREEN}-m{C.RESET} {C.CYAN}100000{C.RESET} {C.GREEN}-o{C.RESET} {C.CYAN}zipf.txt{C.RESET}
    {C.BOLD}{C.PINK}sketchbit{C.RESET} {C.GREEN}ingest{C.RESET} {C.GREEN}-i{C.RESET} {C.CYAN}zipf.txt{C.RESET} {C.GREEN}-o{C.RESET} {C.CYAN}zipf.cms{C.RESET}

  {C.BOLD}{C.BLUE}Fit and query:{C.RESET}
    {C.BOLD}{C.PINK}sketchbit{C.RESET} {C.GREEN}fit{C.RESET} {C.GREEN}-s{C.RESET} {C.CYAN}zipf.cms{C.RESET} {C.GREEN}--model{C.RESET} {C.CYAN}pyp{C.RESET} {C.GREEN}-o{C.RESET} {C.CYAN}pyp.fit{C.RESET}
    {C.BOLD}{C.PINK}sketchbit{C.RESET} {C.GREEN}query{C.RESET} {C.GREEN}-s{C.RESET} {C.CYAN}zipf.cms{C.RESET} {C.GREEN}-p{C.RESET} {C.CYAN}pyp.fit{C.RESET} {C.GREEN}-e{C.RESET} {C.CYAN}pyp-mean{C.RESET} {C.CYAN}17 4711{C.RESET}

  {C.BOLD}{C.BLUE}Benchmark:{C.RESET}
    {C.BOLD}{C.PINK}sketchbit{C.RESET} {C.GREEN}bench{C.RESET} {C.GREEN}--zipf{C.RESET} {C.CYAN}1.3{C.RESET} {C.GREEN}--csv{C.RESET} {C.CYAN}mae.csv{C.RESET}
    """,
    )
    parser.add_argument(
        "-h", "--help", action="help", help=f"{C.CYAN}Show help message{C.RESET}"
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help=f"{C.CYAN}Enable verbose output{C.RESET}",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"SK3TCHB1T v{__version__}",
        help=f"{C.CYAN}Program version{C.RESET}",
    )

    subparsers = parser.add_subparsers(dest="subparser_command")
    commands: Dict[str, argparse.ArgumentParser] = {}

    ingest_parser = subparsers.add_parser(
        "ingest",
        formatter_class=ColorHelpFormatter,
        add_help=False,
        help=f"{C.CYAN}Sketch a token stream{C.RESET}",
    )
    _verbose_flag(ingest_parser)
    ingest_parser.add_argument(
        "-i", "--input_file", required=True, help=f"{C.CYAN}Token stream file{C.RESET}"
    )
    ingest_parser.add_argument(
        "-o", "--output_file", required=True, help=f"{C.CYAN}Sketch snapshot to write{C.RESET}"
    )
    ingest_parser.add_argument(
        "--format",
        dest="input_format",
        choices=["text", "uci"],
        default="text",
        help=f"{C.CYAN}One token per line, or UCI bag-of-words{C.RESET}",
    )
    ingest_parser.add_argument(
        "--split",
        action="store_true",
        help=f"{C.CYAN}Split text lines on whitespace and lowercase them{C.RESET}",
    )
    _hash_flags(ingest_parser)
    ingest_parser.add_argument("--seed", type=int, default=0, help=f"{C.CYAN}Hash family seed{C.RESET}")
    commands["ingest"] = ingest_parser

    zipf_parser = subparsers.add_parser(
        "generate-zipf",
        formatter_class=ColorHelpFormatter,
        add_help=False,
        help=f"{C.CYAN}Write a synthetic Zipf token stream{C.RESET}",
    )
    _verbose_flag(zipf_parser)
    zipf_parser.add_argument(
        "-c", "--exponent", type=float, required=True, help=f"{C.CYAN}Zipf exponent, > 1{C.RESET}"
    )
    zipf_parser.add_argument(
        "-m", "--tokens", type=int, default=100_000, help=f"{C.CYAN}Stream length{C.RESET}"
    )
    zipf_parser.add_argument(
        "--vocab", type=int, default=100_000, help=f"{C.CYAN}Number of ranks{C.RESET}"
    )
    zipf_parser.add_argument("--seed", type=int, default=0, help=f"{C.CYAN}Random seed{C.RESET}")
    zipf_parser.add_argument(
        "-o", "--output_file", required=True, help=f"{C.CYAN}Token stream to write{C.RESET}"
    )
    commands["generate-zipf"] = zipf_parser

    fit_parser = subparsers.add_parser(
        "fit",
        formatter_class=ColorHelpFormatter,
        add_help=False,
        help=f"{C.CYAN}Fit a DP or PYP prior to a sketch{C.RESET}",
    )
    _verbose_flag(fit_parser)
    fit_parser.add_argument(
        "-s", "--sketch_file", required=True, help=f"{C.CYAN}Sketch snapshot{C.RESET}"
    )
    fit_parser.add_argument(
        "--model", choices=["dp", "pyp"], default="pyp", help=f"{C.CYAN}Prior to fit{C.RESET}"
    )
    fit_parser.add_argument(
        "-o", "--output_file", required=True, help=f"{C.CYAN}Params record to write{C.RESET}"
    )
    fit_parser.add_argument("--seed", type=int, default=0, help=f"{C.CYAN}Common random number seed{C.RESET}")
    fit_parser.add_argument(
        "--replicates", type=int, default=25, help=f"{C.CYAN}Synthetic sketches per objective{C.RESET}"
    )
    fit_parser.add_argument(
        "--budget", type=int, default=50, help=f"{C.CYAN}Objective evaluations{C.RESET}"
    )
    fit_parser.add_argument(
        "--m_prime",
        type=int,
        default=None,
        help=f"{C.CYAN}(Optional) Synthetic stream length, m/10 capped at 100000 if unset{C.RESET}",
    )
    commands["fit"] = fit_parser

    query_parser = subparsers.add_parser(
        "query",
        formatter_class=ColorHelpFormatter,
        add_help=False,
        help=f"{C.CYAN}Estimate token frequencies from a sketch{C.RESET}",
    )
    _verbose_flag(query_parser)
    query_parser.add_argument(
        "-s", "--sketch_file", required=True, help=f"{C.CYAN}Sketch snapshot{C.RESET}"
    )
    query_parser.add_argument(
        "-p", "--params_file", default=None, help=f"{C.CYAN}(Optional) Params record from fit{C.RESET}"
    )
    query_parser.add_argument(
        "-e",
        "--estimator",
        default="cms",
        choices=["cms", "cmm", "dp-mean", "dp-median", "dp-mode", "pyp-mean", "pyp-median", "pyp-mode"],
        help=f"{C.CYAN}Point estimator{C.RESET}",
    )
    query_parser.add_argument(
        "--range2",
        nargs=2,
        metavar=("V1", "V2"),
        default=None,
        help=f"{C.CYAN}(Optional) Estimate f(V1) + f(V2) under DP parameters{C.RESET}",
    )
    query_parser.add_argument(
        "--summary",
        choices=["mean", "median"],
        default="mean",
        help=f"{C.CYAN}Summary of the --range2 posterior{C.RESET}",
    )
    query_parser.add_argument(
        "--exact_correction",
        action="store_true",
        help=f"{C.CYAN}Divide the multi-hash product by the prior N-1 times{C.RESET}",
    )
    query_parser.add_argument("tokens", nargs="*", help=f"{C.CYAN}Tokens to query{C.RESET}")
    commands["query"] = query_parser

    bench_parser = subparsers.add_parser(
        "bench",
        formatter_class=ColorHelpFormatter,
        add_help=False,
        help=f"{C.CYAN}Binned MAE of the estimators on a stream{C.RESET}",
    )
    _verbose_flag(bench_parser)
    bench_parser.add_argument(
        "-i", "--input_file", default=None, help=f"{C.CYAN}(Optional) Token stream file{C.RESET}"
    )
    bench_parser.add_argument(
        "--format",
        dest="input_format",
        choices=["text", "uci"],
        default="text",
        help=f"{C.CYAN}Input file format{C.RESET}",
    )
    bench_parser.add_argument(
        "--split",
        action="store_true",
        help=f"{C.CYAN}Split text lines on whitespace and lowercase them{C.RESET}",
    )
    bench_parser.add_argument(
        "--zipf", type=float, default=None, help=f"{C.CYAN}(Optional) Generate a Zipf stream with this exponent{C.RESET}"
    )
    bench_parser.add_argument(
        "-m", "--tokens", type=int, default=100_000, help=f"{C.CYAN}Zipf stream length{C.RESET}"
    )
    bench_parser.add_argument(
        "--vocab", type=int, default=100_000, help=f"{C.CYAN}Zipf ranks{C.RESET}"
    )
    bench_parser.add_argument(
        "--estimators",
        nargs="+",
        default=["cms", "cmm", "dp-mean", "pyp-mean"],
        help=f"{C.CYAN}Estimators to compare{C.RESET}",
    )
    bench_parser.add_argument(
        "--configs",
        nargs="+",
        default=["320x2", "160x4"],
        help=f"{C.CYAN}Hash configurations as JxN{C.RESET}",
    )
    bench_parser.add_argument(
        "--alpha", type=float, default=None, help=f"{C.CYAN}(Optional) Fixed PYP alpha, skips fitting{C.RESET}"
    )
    bench_parser.add_argument(
        "--theta", type=float, default=None, help=f"{C.CYAN}(Optional) Fixed PYP theta, skips fitting{C.RESET}"
    )
    bench_parser.add_argument(
        "--replicates", type=int, default=25, help=f"{C.CYAN}Synthetic sketches per objective{C.RESET}"
    )
    bench_parser.add_argument(
        "--budget", type=int, default=50, help=f"{C.CYAN}Objective evaluations per fit{C.RESET}"
    )
    bench_parser.add_argument(
        "--max_queries", type=int, default=None, help=f"{C.CYAN}(Optional) Uniform sample of query tokens{C.RESET}"
    )
    bench_parser.add_argument(
        "--workers", type=int, default=1, help=f"{C.CYAN}Parallel query threads{C.RESET}"
    )
    bench_parser.add_argument("--seed", type=int, default=0, help=f"{C.CYAN}Random seed{C.RESET}")
    bench_parser.add_argument(
        "--csv", dest="csv_file", default=None, help=f"{C.CYAN}(Optional) Write report rows as CSV{C.RESET}"
    )
    commands["bench"] = bench_parser

    return parser, commands


def _command_in(argv: Sequence[str]) -> Optional[str]:
    return next((arg for arg in argv if arg in COMMANDS), None)


def _config_flag(argv: Sequence[str]) -> Optional[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    return known.config


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()

    try:
        command = _command_in(argv)
        config_path = resolve_config_path(_config_flag(argv))
        if command is not None and config_path is not None:
            apply_config_defaults(commands[command], load_config(config_path))
    except SketchBitException as e:
        logger.error(f"Configuration failed: {e}")
        print(f"\n❌ Configuration failed: {e}", file=sys.stderr)
        return e.exit_code

    args = parser.parse_args(argv)

    if not getattr(args, "subparser_command", None):
        print(f"\n{C.RED}❌ Error: No command provided!{C.RESET}\n")
        parser.print_help()
        return EXIT_USAGE

    log_file = setup_logging(
        verbose=args.verbose, command=args.subparser_command, log_dir=args.log_dir
    )
    logger.debug(f"Logging {args.subparser_command} to {log_file}")

    if not RequirementsChecker().check_requirements():
        return EXIT_USAGE

    cli = SketchBitCLI(verbose=args.verbose)
    logger.debug("Main function started")

    try:
        if args.subparser_command == "ingest":
            return cli.ingest_command(
                args.input_file,
                args.output_file,
                args.j_buckets,
                args.n_hashes,
                args.seed,
                input_format=args.input_format,
                split=args.split,
            )

        elif args.subparser_command == "generate-zipf":
            return cli.generate_zipf_command(
                args.exponent, args.tokens, args.vocab, args.seed, args.output_file
            )

        elif args.subparser_command == "fit":
            return cli.fit_command(
                args.sketch_file,
                args.model,
                args.output_file,
                args.seed,
                args.replicates,
                args.budget,
                m_prime=args.m_prime,
            )

        elif args.subparser_command == "query":
            return cli.query_command(
                args.sketch_file,
                args.tokens,
                args.estimator,
                params_file=args.params_file,
                range2=args.range2,
                summary=args.summary,
                exact_correction=args.exact_correction,
            )

        elif args.subparser_command == "bench":
            return cli.bench_command(
                args.estimators,
                args.configs,
                args.seed,
                args.workers,
                input_file=args.input_file,
                input_format=args.input_format,
                split=args.split,
                zipf=args.zipf,
                tokens=args.tokens,
                vocab=args.vocab,
                max_queries=args.max_queries,
                alpha=args.alpha,
                theta=args.theta,
                replicates=args.replicates,
                budget=args.budget,
                csv_file=args.csv_file,
            )

        else:
            parser.print_help()
            return EXIT_USAGE

    except KeyboardInterrupt:
        print("\n⚠️  Operation cancelled")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"❌ I/O error: {e}")
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
