"""``twinscope`` command line: ingest, twins, ate, diagnose, simulate.

Data goes only to the declared output files; everything else goes to
stderr. Each output file gets a ``<output>.manifest.json`` next to it.
Exit status: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .diagnostics import (abstract_distance_report, collab_distance_report,
                          year_gap_histogram)
from .estimator import (additivity_report, build_pair_dataset, estimate_ate,
                        naive_observational_ate, venue_ate_table)
from .ingest import FORMATS, load_cache, parse_corpus, resolve_threads, save_cache
from .outcomes import SOURCES, compute_outcomes
from .synthetic import SynthConfig, write_synthetic
from .treatments import parse_treatment
from .twin_graph import detect_twins, filter_twins, read_twins, restrict_to_corpus, write_twins

log = logging.getLogger("twinscope")

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(USAGE_ERROR, f"\n{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(output, args, inputs, started):
    manifest = {
        "subcommand": args.command,
        "options": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "tool_version": __version__,
        "duration_seconds": round(time.monotonic() - started, 3),
    }
    Path(str(output) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _load_twins(args, corpus):
    twins = read_twins(args.twins)
    twins, dropped = restrict_to_corpus(twins, corpus)
    if dropped:
        log.warning("%d twin pairs name papers missing from the corpus; ignored", dropped)
    if getattr(args, "max_year_gap", None) is not None:
        twins = filter_twins(twins, corpus, args.max_year_gap)
        if twins.dropped_missing_year:
            log.warning("%d twin pairs dropped for missing years", twins.dropped_missing_year)
    return twins


def cmd_ingest(args):
    started = time.monotonic()
    corpus = parse_corpus(args.input, args.format, threads=args.threads)
    save_cache(corpus, args.output)
    log.info("ingested %d papers (%d malformed lines skipped)", len(corpus), corpus.malformed)
    _write_manifest(args.output, args, [args.input], started)


def cmd_twins(args):
    started = time.monotonic()
    corpus = load_cache(args.corpus)
    twins = detect_twins(corpus)
    n_all = len(twins)
    twins = filter_twins(twins, corpus, args.max_year_gap)
    write_twins(twins, args.output)
    log.info("found %d twin pairs, wrote %d", n_all, len(twins))
    if twins.dropped_missing_year:
        log.warning("%d pairs dropped for missing years", twins.dropped_missing_year)
    _write_manifest(args.output, args, [args.corpus], started)


def cmd_ate(args):
    started = time.monotonic()
    if not args.treatment and not args.venue_table:
        raise UsageError("give at least one --treatment or --venue-table")
    try:
        specs = [parse_treatment(t) for t in args.treatment]
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.additivity and any(s.kind != "combo" or len(s.members) != 2 for s in specs):
        raise UsageError("--additivity needs combo treatments of exactly two members")
    if args.naive and any(not s.is_predicate for s in specs):
        raise UsageError("--naive only applies to single-paper treatments")
    corpus = load_cache(args.corpus)
    twins = _load_twins(args, corpus)
    outcomes = compute_outcomes(corpus, args.smoothing, args.source)

    rows = []
    for spec in specs:
        if args.additivity:
            rep = additivity_report(twins, corpus, outcomes, *spec.members)
            rows += [rep.ate_a, rep.ate_b, rep.ate_ab]
            log.info("%s: subadditive=%s", spec.name, rep.subadditive)
        else:
            rows.append(estimate_ate(build_pair_dataset(twins, spec, corpus), outcomes))
        if args.naive:
            rows.append(naive_observational_ate(corpus, spec, outcomes, args.naive_venue or None))
    if args.venue_table:
        rows += venue_ate_table(twins, corpus, outcomes, args.min_pairs)

    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("treatment\tn_pairs\tate\tstddev\tstderr\n")
        for r in rows:
            fh.write("\t".join(_fmt(x) for x in (r.description, r.n_pairs, r.ate, r.stddev, r.stderr)))
            fh.write("\n")
    for r in rows:
        log.info("%s: n=%d ate=%s", r.description, r.n_pairs, _fmt(r.ate))
    _write_manifest(args.output, args, [args.corpus, args.twins], started)


def cmd_diagnose(args):
    started = time.monotonic()
    if args.report in ("abstract", "collab") and args.seed is None:
        raise UsageError(f"--report {args.report} samples random pairs and needs an explicit --seed")
    if args.n_random is not None and args.n_random < 1:
        raise UsageError("--n-random must be at least 1")
    corpus = load_cache(args.corpus)
    twins = _load_twins(args, corpus)
    lines = ["bin_lo\tbin_hi\tcount_twins\tcount_random"]
    if args.report == "year":
        rep = year_gap_histogram(twins, corpus)
        h = rep.histogram
        for lo, hi, c in zip(h.edges, h.edges[1:], h.counts):
            lines.append(f"{lo}\t{hi}\t{c}\tNA")
        log.info("same-or-next-year fraction: %s (%d pairs missing a year)",
                 _fmt(rep.same_or_next_year_fraction), rep.n_missing_year)
    else:
        fn = abstract_distance_report if args.report == "abstract" else collab_distance_report
        rep = fn(twins, corpus, args.n_random, args.seed)
        for lo, hi, ct, cr in zip(rep.twins.edges, rep.twins.edges[1:], rep.twins.counts,
                                  rep.random.counts):
            lines.append(f"{_fmt(lo)}\t{_fmt(hi)}\t{ct}\t{cr}")
        if args.report == "collab":
            lines.append(f"inf\tinf\t{rep.twin_unreachable}\t{rep.random_unreachable}")
            log.info("pairs with an author-less paper: twins %d, random %d",
                     rep.twin_no_authors, rep.random_no_authors)
        log.info("mean distance: twins %s, random %s", _fmt(rep.twin_mean), _fmt(rep.random_mean))
    Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(args.output, args, [args.corpus, args.twins], started)


def cmd_simulate(args):
    started = time.monotonic()
    if args.config:
        config = dataclasses.replace(SynthConfig.from_toml(args.config), seed=args.seed)
    else:
        config = SynthConfig(seed=args.seed)
    if args.output_truth:
        n = write_synthetic(config, args.output_corpus, args.output_truth)
    else:
        n = write_synthetic(config, args.output_corpus)
    log.info("wrote %d synthetic papers (%d planted twin pairs)", n, config.n_twin_pairs)
    inputs = [args.config] if args.config else []
    _write_manifest(args.output_corpus, args, inputs, started)
    if args.output_truth:
        _write_manifest(args.output_truth, args, inputs, started)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes (0 = one per CPU); results do not depend on it")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="twinscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"twinscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="parse a dump into a corpus cache")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=FORMATS, default="json-lines")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("twins", parents=[common], help="detect mutually citing pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-year-gap", type=int)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_twins)

    p = sub.add_parser("ate", parents=[common], help="estimate treatment effects")
    p.add_argument("--corpus", required=True)
    p.add_argument("--twins", required=True)
    p.add_argument("--treatment", action="append", default=[],
                   help="colon | keyword=<w> | short-title | long-refs | long-abstract | "
                        "long-paper | self-cite | priority | venue=<a>::<b> | venue-is=<v> | "
                        "combo=<k1>+<k2>; repeatable")
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--source", choices=SOURCES, default="auto",
                   help="citation counts: dump field, in-corpus count, or dump with fallback")
    p.add_argument("--max-year-gap", type=int)
    p.add_argument("--naive", action="store_true", help="also report the naive difference in means")
    p.add_argument("--naive-venue", action="append", help="restrict the naive population; repeatable")
    p.add_argument("--venue-table", action="store_true")
    p.add_argument("--min-pairs", type=int, default=100)
    p.add_argument("--additivity", action="store_true",
                   help="for combo treatments, also report each member alone")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ate)

    p = sub.add_parser("diagnose", parents=[common], help="check twin assumptions")
    p.add_argument("--corpus", required=True)
    p.add_argument("--twins", required=True)
    p.add_argument("--report", choices=("year", "abstract", "collab"), required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-random", type=int, help="random pairs to sample (default: number of twins)")
    p.add_argument("--max-year-gap", type=int)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--config", help="TOML file with generator settings")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output-corpus", required=True)
    p.add_argument("--output-truth")
    p.set_defaults(func=cmd_simulate)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads < 0:
        print("twinscope: error: --threads must be >= 0", file=sys.stderr)
        return USAGE_ERROR
    args.threads = resolve_threads(args.threads)
    try:
        args.func(args)
    except UsageError as e:
        print(f"twinscope {args.command}: error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, KeyError, OSError) as e:
        print(f"twinscope {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return DATA_ERROR
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
