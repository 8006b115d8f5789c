"""
crowdprop command line.

    crowdprop aggregate   --annotations A.csv --output quality.json
    crowdprop split       --crowd crowd.jsonl --quality quality.json --dev-output dev.jsonl --test-output test.jsonl
    crowdprop propagate   --ds ds.jsonl --crowd dev.jsonl --embeddings vectors.bin --output ds_star.jsonl
    crowdprop combine     --ds ds.jsonl [--crowd dev.jsonl] --output baseline.jsonl
    crowdprop evaluate    --predictions NAME=PATH ... --gold test.jsonl --out-dir reports/
    crowdprop fp-ratio    --crowd crowd.jsonl --quality quality.json --output fp_ratio.json
    crowdprop embed-stats --embeddings vectors.bin --ds ds.jsonl --crowd crowd.jsonl --output coverage.json

Exit codes: 0 success, 1 invalid input, 2 file system error.
"""

import argparse
import json
import os
import sys
from typing import Callable, Dict, List, Optional

import config
from modules import factory
from modules.corpus import attach_scores, corpus_vocabulary, read_corpus, write_corpus
from modules.coverage import embedding_coverage
from modules.crowdtruth_metrics import load_quality_scores, write_quality_scores
from modules.annotations import parse_annotations
from modules.errors import ValidationError
from modules.evaluation import (
    false_positive_ratio,
    load_gold,
    read_score_records,
    write_eval_report,
    write_fp_ratio,
    write_summary,
)
from modules.interfaces import CorpusSentence
from modules.logging_utils import log_success, setup_logger
from modules.propagation import write_report, write_results
from modules.relation_inventory import RelationInventory
from modules.run_config import RunConfig, resolve_run_config
from modules.run_log import append_run_record
from modules.splits import combine_training_set, split_crowd

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


def _crowd_with_srs(run: RunConfig, inventory: RelationInventory) -> List[CorpusSentence]:
    """Crowd corpus with srs attached from --quality (sentences may already carry scores)."""
    crowd = read_corpus(run.crowd, inventory)
    if run.quality:
        quality = load_quality_scores(run.quality, inventory)
        crowd = attach_scores(crowd, quality.srs, inventory, source=run.quality)
    return crowd


def cmd_aggregate(run: RunConfig) -> Dict:
    run.require("annotations", "output")
    inventory = factory.create_inventory(run)
    matrix = parse_annotations(run.annotations, inventory)
    quality = factory.create_aggregator(run).compute(matrix)
    write_quality_scores(quality, run.output)
    print(
        f"aggregate: {len(quality.worker_quality)} workers, {len(quality.sentence_quality)} sentences, "
        f"{quality.iterations} iterations ({'converged' if quality.converged else 'not converged'}) -> {run.output}"
    )
    return {
        "workers": len(quality.worker_quality),
        "sentences": len(quality.sentence_quality),
        "iterations": quality.iterations,
        "converged": quality.converged,
        "outputs": [run.output],
    }


def cmd_split(run: RunConfig) -> Dict:
    run.require("crowd", "dev_output", "test_output")
    inventory = factory.create_inventory(run)
    crowd = _crowd_with_srs(run, inventory)
    if any(s.scores is None for s in crowd):
        raise ValidationError("split needs srs: pass --quality or a crowd corpus carrying scores")
    dev, test = split_crowd(crowd, run.dev_fraction)
    write_corpus(dev, run.dev_output, inventory)
    write_corpus(test, run.test_output, inventory)
    print(f"split: {len(dev)} dev / {len(test)} test sentences -> {run.dev_output}, {run.test_output}")
    return {"dev": len(dev), "test": len(test), "outputs": [run.dev_output, run.test_output]}


def cmd_propagate(run: RunConfig) -> Dict:
    run.require("ds", "crowd", "embeddings", "output")
    inventory = factory.create_inventory(run)
    ds = read_corpus(run.ds, inventory, require_ds_positive=True)
    crowd = _crowd_with_srs(run, inventory)
    vocabulary = corpus_vocabulary([ds, crowd], lowercase=run.lowercase_fallback)
    table = factory.create_embedding_table(run, vocabulary=vocabulary)

    propagator = factory.create_propagator(inventory, table, run).fit(crowd)
    count = write_results(propagator.propagate(ds), run.output, inventory)
    report_path = run.report or os.path.splitext(run.output)[0] + ".report.json"
    write_report(propagator.report, report_path)

    report = propagator.report
    print(
        f"propagate: {report.propagated} of {count} DS sentences propagated, "
        f"{report.unpropagatable} kept DS labels, {report.labeled} labeled -> {run.output}"
    )
    return {
        "total": report.total,
        "propagated": report.propagated,
        "unpropagatable": report.unpropagatable,
        "labeled": report.labeled,
        "threads": run.threads,
        "outputs": [run.output, report_path],
    }


def cmd_combine(run: RunConfig) -> Dict:
    run.require("ds", "output")
    inventory = factory.create_inventory(run)
    ds = read_corpus(run.ds, inventory, require_ds_positive=True)
    crowd = _crowd_with_srs(run, inventory) if run.crowd else []
    count = write_results(combine_training_set(ds, crowd), run.output, inventory)
    print(f"combine: {len(ds)} DS + {len(crowd)} crowd sentences -> {run.output}")
    return {"ds": len(ds), "crowd": len(crowd), "total": count, "outputs": [run.output]}


def cmd_evaluate(run: RunConfig) -> Dict:
    run.require("predictions", "gold", "out_dir")
    inventory = factory.create_inventory(run)
    restrict = None
    if run.gold_filter:
        restrict = [s.sentence_id for s in read_corpus(run.gold_filter, inventory)]
    gold = load_gold(run.gold, inventory, restrict_ids=restrict)

    fp_ratio = None
    if run.crowd:
        fp_ratio = false_positive_ratio(_crowd_with_srs(run, inventory), run.gold_threshold, inventory)

    evaluator = factory.create_evaluator(inventory, run)
    reports = []
    outputs = []
    for system, path in run.predictions:
        report = evaluator.evaluate(system, read_score_records(path, inventory), gold)
        report.fp_ratio = fp_ratio
        paths = write_eval_report(report, run.out_dir, run.gold_threshold, run.histogram_bins)
        outputs.extend(paths.values())
        reports.append(report)
        print(
            f"evaluate: {system}: auc={report.auc:.4f} mean_cosine={report.mean_cosine:.4f} "
            f"({report.counts['sentences']} sentences, {report.counts['pairs']} pairs)"
        )
    summary = os.path.join(run.out_dir, "summary.csv")
    write_summary(reports, summary)
    outputs.append(summary)
    return {"systems": {r.system: {"auc": r.auc, "mean_cosine": r.mean_cosine} for r in reports}, "outputs": outputs}


def cmd_fp_ratio(run: RunConfig) -> Dict:
    run.require("crowd", "output")
    inventory = factory.create_inventory(run)
    ratios = false_positive_ratio(_crowd_with_srs(run, inventory), run.gold_threshold, inventory)
    csv_path = os.path.splitext(run.output)[0] + ".csv"
    write_fp_ratio(ratios, run.output, csv_path, run.gold_threshold)
    for name, value in ratios.items():
        print(f"fp-ratio: {name}: {'n/a' if value is None else f'{value:.3f}'}")
    return {"fp_ratio": ratios, "outputs": [run.output, csv_path]}


def cmd_embed_stats(run: RunConfig) -> Dict:
    run.require("embeddings")
    inventory = factory.create_inventory(run)
    corpora = {}
    if run.ds:
        corpora["ds"] = read_corpus(run.ds, inventory, require_ds_positive=True)
    if run.crowd:
        corpora["crowd"] = read_corpus(run.crowd, inventory)
    if not corpora:
        raise ValidationError("embed-stats needs at least one corpus: --ds and/or --crowd")
    table = factory.create_embedding_table(
        run, vocabulary=corpus_vocabulary(corpora.values(), lowercase=run.lowercase_fallback)
    )
    report = embedding_coverage(table, corpora, top=run.top_oov)
    payload = report.to_dict()
    if run.output:
        directory = os.path.dirname(run.output)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(run.output, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2)
            f.write("\n")
    totals = report.totals
    print(
        f"embed-stats: vocab={report.vocabulary} retained={report.retained} dim={report.dimension} tokens={totals.tokens} "
        f"exact={totals.exact_hits} lowercase={totals.lowercase_hits} oov={totals.oov}"
    )
    for name, stats in report.corpora.items():
        print(
            f"embed-stats: {name}: {stats.sentences} sentences, {stats.empty_between_span} empty between-terms spans, "
            f"{stats.empty_vector} empty vectors"
        )
    return {"totals": totals.to_dict(), "outputs": [run.output] if run.output else []}


COMMANDS: Dict[str, Callable[[RunConfig], Dict]] = {
    "aggregate": cmd_aggregate,
    "split": cmd_split,
    "propagate": cmd_propagate,
    "combine": cmd_combine,
    "evaluate": cmd_evaluate,
    "fp-ratio": cmd_fp_ratio,
    "embed-stats": cmd_embed_stats,
}


def _off(parser: argparse.ArgumentParser, flag: str, dest: str, help: str) -> None:
    parser.add_argument(flag, dest=dest, action="store_const", const=False, default=None, help=help)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", dest="config_file", help="YAML file overriding config.py defaults")
    common.add_argument("--inventory", help="Relation inventory file")
    common.add_argument("--debug", action="store_const", const=True, default=None, help="Debug logging")
    _off(common, "--no-progress", "show_progress", "Disable the stderr progress counter")

    parser = argparse.ArgumentParser(prog="crowdprop", description="Crowd-driven label propagation for DS corpora")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("aggregate", parents=[common], help="Crowd quality scores from an annotation CSV")
    p.add_argument("--annotations", help="worker_id,sentence_id,choices CSV")
    p.add_argument("--output", help="Quality scores JSON")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--srs-relation-weighting", choices=config.SRS_RELATION_WEIGHTING_MODES)
    p.add_argument("--unweighted-srs", action="store_const", const=True, default=None,
                   help="Also write the plain worker share per relation")

    p = sub.add_parser("split", parents=[common], help="Deterministic dev/test split of the crowd corpus")
    p.add_argument("--crowd", help="Crowd corpus JSONL")
    p.add_argument("--quality", help="Quality scores JSON")
    p.add_argument("--dev-output")
    p.add_argument("--test-output")
    p.add_argument("--dev-fraction", type=float)

    p = sub.add_parser("propagate", parents=[common], help="Relabel a DS corpus from crowd srs")
    p.add_argument("--ds", help="DS corpus JSONL")
    p.add_argument("--crowd", help="Crowd corpus JSONL (labeled set)")
    p.add_argument("--quality", help="Quality scores JSON (when the crowd corpus carries no scores)")
    p.add_argument("--embeddings", help="word2vec-format vector file")
    p.add_argument("--embedding-format", choices=config.EMBEDDING_FORMATS)
    _off(p, "--no-lowercase-fallback", "lowercase_fallback", "Exact token lookups only")
    p.add_argument("--output", help="DS* JSONL")
    p.add_argument("--report", help="Run report JSON (default: <output>.report.json)")
    p.add_argument("--threads", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--span-policy", choices=config.SPAN_POLICIES)
    _off(p, "--no-span-fallback", "span_fallback", "Leave sentences with an OOV-only between-terms span unpropagated")
    _off(
        p, "--no-similarity-clamp", "similarity_clamp",
        "Blend with the raw cosine; a negative cosine gives scores outside [0, 1] that evaluate rejects",
    )
    p.add_argument("--search", choices=config.NEIGHBOR_SEARCH_MODES)

    p = sub.add_parser("combine", parents=[common], help="DS or DS + crowd baseline training set")
    p.add_argument("--ds", help="DS corpus JSONL")
    p.add_argument("--crowd", help="Crowd corpus JSONL to append (omit for DS alone)")
    p.add_argument("--quality", help="Quality scores JSON")
    p.add_argument("--output")

    p = sub.add_parser("evaluate", parents=[common], help="P/R AUC and sentence cosine against gold srs")
    p.add_argument("--predictions", action="append", metavar="NAME=PATH", help="Prediction JSONL (repeatable)")
    p.add_argument("--gold", help="Gold JSONL with scores, or a quality scores JSON")
    p.add_argument("--gold-filter", help="Corpus whose ids restrict the gold set")
    p.add_argument("--crowd", help="Crowd corpus for the DS false-positive ratio")
    p.add_argument("--quality", help="Quality scores JSON for --crowd")
    p.add_argument("--out-dir")
    p.add_argument("--gold-threshold", type=float)
    p.add_argument("--histogram-bins", type=int)
    p.add_argument("--orphan-limit", type=int)

    p = sub.add_parser("fp-ratio", parents=[common], help="DS false-positive ratio per relation")
    p.add_argument("--crowd", help="Crowd corpus JSONL")
    p.add_argument("--quality", help="Quality scores JSON")
    p.add_argument("--output", help="JSON output (a CSV is written next to it)")
    p.add_argument("--gold-threshold", type=float)

    p = sub.add_parser("embed-stats", parents=[common], help="Embedding vocabulary coverage")
    p.add_argument("--embeddings")
    p.add_argument("--embedding-format", choices=config.EMBEDDING_FORMATS)
    _off(p, "--no-lowercase-fallback", "lowercase_fallback", "Exact token lookups only")
    p.add_argument("--ds")
    p.add_argument("--crowd")
    p.add_argument("--output", help="Coverage JSON")
    p.add_argument("--top-oov", type=int)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    flags = vars(args)
    command = flags.pop("command")
    config_file = flags.pop("config_file", None)
    try:
        run = resolve_run_config(flags, config_file)
        if run.debug:
            setup_logger(__name__, debug=True)
        summary = COMMANDS[command](run)
    except ValueError as e:
        print(f"crowdprop {command}: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"crowdprop {command}: error: {e}", file=sys.stderr)
        return EXIT_IO

    append_run_record(command, summary)
    log_success(logger, f"{command} done")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
