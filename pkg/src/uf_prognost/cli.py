"""``uf-prognost`` command-line driver.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import artifacts
from .config import ConfigError, DataError, PipelineConfig, load_config
from .evaluation import chronological_split, run_evaluation
from .fuzzy import make_uniform_partition
from .ingest import read_series, validate_series, write_series_csv
from .prognosis import build_library, explain, predict_batch, run_signatures
from .segmentation import segment_series
from .simulate import ScenarioConfig, generate_scenario, standard_config

log = logging.getLogger("uf_prognost")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _config(args) -> PipelineConfig:
    overrides = {}
    if getattr(args, "k", None) is not None:
        overrides["top_k"] = args.k
    if getattr(args, "allow_same_run", False):
        overrides["exclude_same_run"] = False
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return load_config(getattr(args, "config", None), **overrides)


def cmd_ingest(args) -> int:
    config = _config(args)
    series = read_series(args.input, config.mapping, config.delimiter)
    seg = segment_series(series, config)
    if not seg.runs:
        raise DataError(f"{args.input}: no complete cycles found")
    counts = dict(seg.diagnostics, runs=len(seg.runs), cycles=seg.n_cycles, backwash_events=seg.n_events)
    artifacts.write_cycles(args.out, seg.runs, config, str(args.input), counts)
    n_failed = sum(r.reached_failure for r in seg.runs)
    print(f"{len(seg.runs)} runs ({n_failed} reached failure), {seg.n_cycles} cycles -> {args.out}")
    return EXIT_OK


def _partitions(config: PipelineConfig):
    return (make_uniform_partition(*config.hi_range, feature="HI"),
            make_uniform_partition(*config.dhi_range, feature="dHI"))


def cmd_build(args) -> int:
    runs, config, _ = artifacts.read_cycles(args.cycles)
    train = runs if args.all_runs else chronological_split(runs, config.train_fraction)[0]
    hi_p, dhi_p = _partitions(config)
    library = build_library(
        train, hi_p, dhi_p, config.window_length,
        {"config_digest": config.digest(), "config": config.to_dict()},
    )
    artifacts.save_library(args.out, library)
    if args.export_text:
        artifacts.export_library_text(args.export_text, library)
    print(f"{len(library)} exemplars from {len(library.metadata['source_runs'])} failed runs -> {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    library = artifacts.load_library(args.library)
    runs, config, _ = artifacts.read_cycles(args.cycles)
    if library.config_digest != config.digest():
        raise ConfigError(
            f"config digest mismatch: library {library.config_digest} vs cycles {config.digest()}; "
            "rebuild the library from this cycles artifact"
        )
    k = args.k or config.top_k
    L = library.window_length
    by_id = {r.run_id: r for r in runs}

    if args.all_test:
        targets = [(r, t) for r in chronological_split(runs, config.train_fraction)[1] for t in range(len(r))]
    else:
        if args.run is None:
            raise ConfigError("predict needs --run R [--cycle C] or --all-test")
        if args.run not in by_id:
            raise DataError(f"run {args.run} not in {args.cycles}")
        run = by_id[args.run]
        cycle = len(run) - 1 if args.cycle is None else args.cycle
        if not 0 <= cycle < len(run):
            raise DataError(f"run {args.run} has cycles 0..{len(run) - 1}, got {cycle}")
        targets = [(run, cycle)]

    queries, skipped = [], 0
    sig_cache = {}
    for run, t in targets:
        if t < L - 1:
            skipped += 1
            continue
        if run.run_id not in sig_cache:
            sig_cache[run.run_id] = run_signatures(run, library.hi_partition, library.dhi_partition, L)
        queries.append((sig_cache[run.run_id][t - L + 1], (run.run_id, t)))
    if skipped:
        print(f"skipped {skipped} query cycle(s) with fewer than {L} cycles of history", file=sys.stderr)
    if not queries:
        return EXIT_OK

    preds = predict_batch(queries, library, k, config.interval_level, config.eps,
                          config.exclude_same_run and not args.allow_same_run)
    docs = []
    for p in preds:
        d = p.to_dict(library)
        run = by_id[p.query_ref[0]]
        if run.rul_labels is not None:
            d["actual_rul"] = run.rul_labels[p.query_ref[1]]
        d["config_digest"] = config.digest()
        docs.append(d)
    text = json.dumps(docs if len(docs) > 1 or args.all_test else docs[0], sort_keys=True, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    elif not args.explain:
        sys.stdout.write(text)
    if args.explain:
        sys.stdout.write("\n".join(explain(p) for p in preds))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _config(args)
    if args.fixture:
        if args.fixture != "standard":
            raise ConfigError(f"unknown fixture {args.fixture!r} (only 'standard')")
        series = validate_series(generate_scenario(standard_config()))
    else:
        series = read_series(args.input, config.mapping, config.delimiter)
    report = run_evaluation(series, config, threads=args.threads, show_reference=not args.fixture)
    paths = artifacts.write_report(args.out, report)
    sys.stdout.write(report.table())
    print(f"report -> {paths['json']}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.scenario == "standard":
        scenario = standard_config()
    else:
        try:
            scenario = ScenarioConfig.from_dict(json.loads(Path(args.scenario).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ConfigError(f"{args.scenario}: invalid scenario: {exc}") from None
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    series = generate_scenario(scenario)
    if args.out == "-":
        write_series_csv(series, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_series_csv(series, fh)
        print(f"{len(series)} records -> {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uf-prognost", description="Explainable similarity-based RUL for UF membranes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="sensor CSV -> runs-and-cycles artifact")
    s.add_argument("--input", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("build", help="cycles artifact -> exemplar library")
    s.add_argument("--cycles", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--all-runs", action="store_true", help="use every failed run, not only the train split")
    s.add_argument("--export-text", help="also write a tab-separated exemplar listing")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("predict", help="RUL for selected cycles")
    s.add_argument("--library", required=True)
    s.add_argument("--cycles", required=True)
    s.add_argument("--run", type=int)
    s.add_argument("--cycle", type=int, help="cycle index within the run (default: last)")
    s.add_argument("--all-test", action="store_true")
    s.add_argument("--k", type=int)
    s.add_argument("--allow-same-run", action="store_true")
    s.add_argument("--explain", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="full pipeline with chronological split")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--fixture")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--allow-same-run", action="store_true")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("simulate", help="write a synthetic sensor CSV")
    s.add_argument("--scenario", default="standard", help="'standard' or a JSON scenario file")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True, help="output CSV path or '-' for stdout")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"uf-prognost: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"uf-prognost: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"uf-prognost: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
